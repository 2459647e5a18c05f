//! Overlapping, fog-anchored clustering and grey relational cluster-head
//! election.
//!
//! Every fog anchors one cluster. A device belongs to every cluster whose fog
//! it can reach directly, so devices in the overlap of several fog radii are
//! members of several clusters at once. Devices that reach no fog attach to
//! the clusters of their nearest covered neighbour through a single relay hop.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use crate::grey::{rank_candidates, CriterionSpec, DecisionMatrix, Direction, GreyError, Ranked};
use crate::model::{distance, LinkSample, NodeId, NodeState, RadioModel, Role};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("scenario has no fog nodes")]
    NoFogs,
    #[error("device {0} is not covered by any cluster")]
    NoRoute(NodeId),
    #[error("cluster anchored at fog {0} has no elected head")]
    NoHead(NodeId),
    #[error(transparent)]
    Grey(#[from] GreyError),
}

/// Names and directions of the six cluster-head criteria, in matrix column
/// order. Weights in [`ElectionParams`] follow the same order.
pub const CH_CRITERIA: [(&str, Direction); 6] = [
    ("residual_energy", Direction::Benefit),
    ("rssi", Direction::Benefit),
    ("link_expiration_time", Direction::Benefit),
    ("distance", Direction::Cost),
    ("hop_estimate", Direction::Cost),
    ("noise_figure", Direction::Cost),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ElectionParams {
    pub radio: RadioModel,
    pub weights: [f64; 6],
    pub rho: f64,
    /// Infinite link expiration times are clamped to this many seconds.
    pub let_cap: f64,
    /// Head candidates need residual energy of at least this fraction of
    /// the cluster's mean; `0` admits every alive member.
    pub energy_gate: f64,
}

impl Default for ElectionParams {
    fn default() -> Self {
        Self {
            radio: RadioModel::default(),
            weights: [1.0; 6],
            rho: crate::grey::DEFAULT_RHO,
            let_cap: 3600.0,
            energy_gate: 1.0,
        }
    }
}

impl ElectionParams {
    fn criteria(&self) -> Vec<CriterionSpec> {
        CH_CRITERIA
            .iter()
            .zip(self.weights)
            .map(|(&(name, dir), w)| CriterionSpec::new(name, dir, w))
            .collect()
    }

    fn matrix(&self, candidates: Vec<NodeId>, rows: &[Vec<f64>]) -> Result<DecisionMatrix, GreyError> {
        DecisionMatrix::new(candidates, self.criteria(), rows)?.with_rho(self.rho)
    }

    fn criterion_row(&self, link: &LinkSample, energy: f64, noise: f64) -> Vec<f64> {
        vec![
            energy,
            link.rssi,
            link.let_s.min(self.let_cap),
            link.distance,
            f64::from(link.hop_estimate),
            noise,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub fog_anchor: NodeId,
    pub members: BTreeSet<NodeId>,
    /// Members that reach the fog only through a one-hop relay, mapped to
    /// that relay.
    pub relays: BTreeMap<NodeId, NodeId>,
    pub head: Option<NodeId>,
    pub epoch: u32,
}

impl Cluster {
    pub fn new(fog_anchor: NodeId) -> Self {
        Self {
            fog_anchor,
            members: BTreeSet::new(),
            relays: BTreeMap::new(),
            head: None,
            epoch: 0,
        }
    }

    pub fn is_direct(&self, device: NodeId) -> bool {
        self.members.contains(&device) && !self.relays.contains_key(&device)
    }

    /// Hops from `device` to the fog anchor when `device` talks to the fog
    /// itself: 1 for direct members, 2 through a relay.
    pub fn hops_to_fog(&self, device: NodeId) -> u32 {
        if self.relays.contains_key(&device) {
            2
        } else {
            1
        }
    }
}

/// Per-device cluster membership. Clusters are keyed by their fog anchor.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MembershipMap {
    pub clusters_of: BTreeMap<NodeId, Vec<NodeId>>,
    pub uncovered: BTreeSet<NodeId>,
}

impl MembershipMap {
    pub fn clusters(&self, device: NodeId) -> &[NodeId] {
        self.clusters_of.get(&device).map_or(&[], Vec::as_slice)
    }
}

fn in_range(a: &NodeState, b: &NodeState) -> bool {
    distance(a, b) <= a.comm_radius.min(b.comm_radius)
}

/// Forms one cluster per fog over the alive devices in `nodes`.
///
/// Returned clusters are ordered by fog id and may be empty; heads are not
/// elected here.
pub fn form_overlapping_clusters(nodes: &[NodeState]) -> Result<(Vec<Cluster>, MembershipMap), ClusterError> {
    let fogs: Vec<&NodeState> = nodes.iter().filter(|n| n.role == Role::Fog).collect();
    if fogs.is_empty() {
        return Err(ClusterError::NoFogs);
    }
    let devices: Vec<&NodeState> = nodes.iter().filter(|n| n.role == Role::Device && n.alive).collect();

    let mut clusters: Vec<Cluster> = fogs.iter().map(|f| Cluster::new(f.id)).collect();
    let mut map = MembershipMap::default();

    for d in &devices {
        let mut joined = Vec::new();
        for (cluster, fog) in clusters.iter_mut().zip(&fogs) {
            if in_range(d, fog) {
                cluster.members.insert(d.id);
                joined.push(fog.id);
            }
        }
        if !joined.is_empty() {
            map.clusters_of.insert(d.id, joined);
        }
    }

    let orphans: Vec<&NodeState> = devices
        .iter()
        .copied()
        .filter(|d| !map.clusters_of.contains_key(&d.id))
        .collect();
    for orphan in orphans {
        let relay = devices
            .iter()
            .filter(|c| map.clusters_of.contains_key(&c.id) && c.id != orphan.id && in_range(orphan, c))
            .min_by(|a, b| {
                distance(orphan, a)
                    .total_cmp(&distance(orphan, b))
                    .then(a.id.cmp(&b.id))
            });
        match relay {
            Some(relay) => {
                let anchors = map.clusters_of[&relay.id].clone();
                for cluster in clusters.iter_mut().filter(|c| anchors.contains(&c.fog_anchor)) {
                    cluster.members.insert(orphan.id);
                    cluster.relays.insert(orphan.id, relay.id);
                }
                map.clusters_of.insert(orphan.id, anchors);
            }
            None => {
                map.uncovered.insert(orphan.id);
            }
        }
    }
    Ok((clusters, map))
}

/// One row per head candidate, six columns in [`CH_CRITERIA`] order, all
/// measured on the member's link to the fog anchor. Candidates are the alive
/// members whose residual energy reaches `energy_gate` times the mean over
/// alive members, so drained former heads sit out until the others catch up.
pub fn build_ch_decision_matrix(
    cluster: &Cluster,
    nodes: &[NodeState],
    params: &ElectionParams,
) -> Result<DecisionMatrix, GreyError> {
    ch_matrix(cluster, nodes, params, &BTreeSet::new())
}

fn ch_matrix(
    cluster: &Cluster,
    nodes: &[NodeState],
    params: &ElectionParams,
    excluded: &BTreeSet<NodeId>,
) -> Result<DecisionMatrix, GreyError> {
    let fog = &nodes[cluster.fog_anchor.index()];
    let alive: Vec<&NodeState> = cluster
        .members
        .iter()
        .map(|m| &nodes[m.index()])
        .filter(|n| n.alive)
        .collect();
    let mean = alive.iter().map(|n| n.residual_energy).sum::<f64>() / alive.len().max(1) as f64;
    let threshold = params.energy_gate * mean;
    let eligible = |n: &&&NodeState| !excluded.contains(&n.id) && n.residual_energy >= threshold;
    // Fall back to every alive member if all eligible ones already head
    // another cluster.
    let pool: Vec<&NodeState> = if alive.iter().any(|n| eligible(&n)) {
        alive.iter().filter(eligible).copied().collect()
    } else {
        alive
    };
    let mut candidates = Vec::with_capacity(pool.len());
    let mut rows = Vec::with_capacity(pool.len());
    for member in pool {
        let link = LinkSample::measure(&params.radio, member, fog, cluster.hops_to_fog(member.id));
        candidates.push(member.id);
        rows.push(params.criterion_row(&link, member.residual_energy, member.noise_figure));
    }
    params.matrix(candidates, &rows)
}

/// Runs a fresh election in every cluster. Clusters without alive members
/// are dropped with a warning.
pub fn elect_cluster_heads(
    clusters: &mut Vec<Cluster>,
    nodes: &[NodeState],
    params: &ElectionParams,
) -> Result<(), ClusterError> {
    refresh_heads(clusters, &[], nodes, params, |_| true)
}

/// Carries heads over from `previous` clusters with the same anchor, and
/// re-elects wherever `due` says so, the head is missing or dead, or the old
/// head is no longer a member.
pub fn refresh_heads(
    clusters: &mut Vec<Cluster>,
    previous: &[Cluster],
    nodes: &[NodeState],
    params: &ElectionParams,
    due: impl Fn(&Cluster) -> bool,
) -> Result<(), ClusterError> {
    clusters.retain(|c| {
        let keep = c.members.iter().any(|m| nodes[m.index()].alive);
        if !keep {
            warn!("dropping empty cluster anchored at fog {}", c.fog_anchor);
        }
        keep
    });
    // A device heads at most one cluster; clusters are served in fog-id order.
    let mut heads: BTreeSet<NodeId> = BTreeSet::new();
    for cluster in clusters.iter_mut() {
        if let Some(prev) = previous.iter().find(|p| p.fog_anchor == cluster.fog_anchor) {
            cluster.head = prev.head;
            cluster.epoch = prev.epoch;
        }
        let head_ok = cluster
            .head
            .is_some_and(|h| cluster.members.contains(&h) && nodes[h.index()].alive && !heads.contains(&h));
        if !head_ok || due(cluster) {
            let ranking = rank_candidates(&ch_matrix(cluster, nodes, params, &heads)?)?;
            cluster.head = Some(ranking[0].id);
            cluster.epoch += 1;
        }
        heads.extend(cluster.head);
    }
    Ok(())
}

/// Ordered hop list from `device` to its cluster's fog anchor.
pub fn intra_cluster_route(device: NodeId, cluster: &Cluster) -> Result<Vec<NodeId>, ClusterError> {
    if !cluster.members.contains(&device) {
        return Err(ClusterError::NoRoute(device));
    }
    let head = cluster.head.ok_or(ClusterError::NoHead(cluster.fog_anchor))?;
    let mut route = vec![device];
    if device != head {
        if let Some(&relay) = cluster.relays.get(&device) {
            route.push(relay);
        }
        route.push(head);
    }
    if let Some(&relay) = cluster.relays.get(&head) {
        route.push(relay);
    }
    route.push(cluster.fog_anchor);
    Ok(splice_loops(route))
}

/// Removes any cycle from a hop list by jumping from the first visit of a
/// node to its last visit.
fn splice_loops(route: Vec<NodeId>) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::with_capacity(route.len());
    for hop in route {
        if let Some(pos) = out.iter().position(|&h| h == hop) {
            out.truncate(pos + 1);
        } else {
            out.push(hop);
        }
    }
    out
}

/// Picks the cluster a device should send a packet through.
///
/// A device that heads one of its clusters uses it. Otherwise each candidate
/// cluster is scored by grey relational analysis from the device's point of
/// view: the head's residual energy, the device-to-head link (RSSI, link
/// expiration time, distance), the route length, and the head's noise.
/// Returns the fog anchor of the winning cluster.
pub fn select_uplink_cluster(
    device: NodeId,
    candidates: &[&Cluster],
    nodes: &[NodeState],
    params: &ElectionParams,
) -> Result<Option<NodeId>, ClusterError> {
    let usable: Vec<&Cluster> = candidates
        .iter()
        .copied()
        .filter(|c| c.head.is_some() && c.members.contains(&device))
        .collect();
    if let Some(own) = usable.iter().find(|c| c.head == Some(device)) {
        return Ok(Some(own.fog_anchor));
    }
    match usable.len() {
        0 => return Ok(None),
        1 => return Ok(Some(usable[0].fog_anchor)),
        _ => {}
    }
    let src = &nodes[device.index()];
    let mut ids = Vec::with_capacity(usable.len());
    let mut rows = Vec::with_capacity(usable.len());
    for c in &usable {
        let head = &nodes[c.head.expect("filtered").index()];
        let hops = intra_cluster_route(device, c)?.len() as u32 - 1;
        let link = LinkSample::measure(&params.radio, src, head, hops);
        ids.push(c.fog_anchor);
        rows.push(params.criterion_row(&link, head.residual_energy, head.noise_figure));
    }
    let ranking: Vec<Ranked> = rank_candidates(&params.matrix(ids, &rows)?)?;
    Ok(Some(ranking[0].id))
}
