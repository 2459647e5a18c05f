//! Balanced b-ary hierarchy of fog nodes rooted at the cloud, and per-round
//! bottom-up aggregation along it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::model::{distance, NodeId, NodeState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("branching factor must be at least 1")]
    ZeroBranching,
    #[error("fog {0} is not part of the tree")]
    UnknownFog(NodeId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FogTree {
    root: NodeId,
    branching: usize,
    /// Fogs in placement (level) order.
    order: Vec<NodeId>,
    parent: BTreeMap<NodeId, NodeId>,
    depth: BTreeMap<NodeId, usize>,
}

/// Fogs are sorted by distance to the cloud (ties by id) and laid out in
/// level order: the nearest fog is the cloud's only child and fog `i > 0`
/// hangs under fog `(i - 1) / b`.
pub fn build_balanced_tree(fogs: &[NodeState], cloud: &NodeState, branching: usize) -> Result<FogTree, TreeError> {
    if branching == 0 {
        return Err(TreeError::ZeroBranching);
    }
    let mut sorted: Vec<&NodeState> = fogs.iter().collect();
    sorted.sort_by(|a, b| distance(a, cloud).total_cmp(&distance(b, cloud)).then(a.id.cmp(&b.id)));
    let order: Vec<NodeId> = sorted.iter().map(|f| f.id).collect();
    let mut parent = BTreeMap::new();
    let mut depth = BTreeMap::new();
    for (i, &fog) in order.iter().enumerate() {
        if i == 0 {
            parent.insert(fog, cloud.id);
            depth.insert(fog, 1);
        } else {
            let up = order[(i - 1) / branching];
            parent.insert(fog, up);
            depth.insert(fog, depth[&up] + 1);
        }
    }
    Ok(FogTree {
        root: cloud.id,
        branching,
        order,
        parent,
        depth,
    })
}

/// Depth of a complete b-ary fog tree with `fogs` nodes.
pub fn balanced_depth(fogs: usize, branching: usize) -> usize {
    if fogs == 0 {
        return 0;
    }
    if branching == 1 {
        return fogs;
    }
    // Smallest h with 1 + b + ... + b^(h-1) >= fogs.
    let (mut level, mut capacity, mut h) = (1usize, 0usize, 0usize);
    while capacity < fogs {
        capacity += level;
        level = level.saturating_mul(branching);
        h += 1;
    }
    h
}

impl FogTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn fogs(&self) -> &[NodeId] {
        &self.order
    }

    pub fn contains(&self, fog: NodeId) -> bool {
        self.parent.contains_key(&fog)
    }

    pub fn parent(&self, fog: NodeId) -> Option<NodeId> {
        self.parent.get(&fog).copied()
    }

    pub fn depth(&self, fog: NodeId) -> Option<usize> {
        self.depth.get(&fog).copied()
    }

    pub fn max_depth(&self) -> usize {
        self.depth.values().copied().max().unwrap_or(0)
    }

    pub fn children(&self, node: NodeId) -> Vec<NodeId> {
        self.order.iter().copied().filter(|f| self.parent[f] == node).collect()
    }

    /// `[fog, parent, ..., cloud]`.
    pub fn path_to_root(&self, fog: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let mut path = vec![fog];
        let mut at = fog;
        while at != self.root {
            at = *self.parent.get(&at).ok_or(TreeError::UnknownFog(at))?;
            path.push(at);
        }
        Ok(path)
    }

    /// Bottom-up transmission schedule for one round.
    ///
    /// Each fog with anything in its subtree sends exactly one packet to its
    /// parent, merging its local payloads with its children's. The packet
    /// size is `header_bits + round(aggregation_ratio * raw payload bits)`.
    /// Deeper levels come first; within a level, placement order.
    pub fn aggregate_upward(
        &self,
        collected: &BTreeMap<NodeId, Vec<Payload>>,
        params: &AggregationParams,
    ) -> Vec<Transmission> {
        let mut carried: BTreeMap<NodeId, Vec<Payload>> = BTreeMap::new();
        let mut by_depth: Vec<NodeId> = self.order.clone();
        // stable: placement order within a level
        by_depth.sort_by_key(|f| std::cmp::Reverse(self.depth[f]));

        let mut schedule = Vec::new();
        for fog in by_depth {
            let mut payloads = collected.get(&fog).cloned().unwrap_or_default();
            if let Some(from_children) = carried.remove(&fog) {
                payloads.extend(from_children);
            }
            if payloads.is_empty() {
                continue;
            }
            let to = self.parent[&fog];
            let raw: u64 = payloads.iter().map(|p| p.bits).sum();
            let bits = params.header_bits + (params.aggregation_ratio * raw as f64).round() as u64;
            carried.entry(to).or_default().extend(payloads.iter().copied());
            schedule.push(Transmission {
                from: fog,
                to,
                depth: self.depth[&fog],
                bits,
                payloads,
            });
        }
        schedule
    }

    /// Parent list as text, one `fog parent depth` line per fog in placement
    /// order.
    pub fn parent_list(&self) -> String {
        let mut out = String::new();
        for f in &self.order {
            let _ = writeln!(out, "{} {} {}", f, self.parent[f], self.depth[f]);
        }
        out
    }
}

/// A device payload travelling through the fog tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Payload {
    pub id: u64,
    pub bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationParams {
    pub header_bits: u64,
    pub aggregation_ratio: f64,
}

impl Default for AggregationParams {
    fn default() -> Self {
        Self {
            header_bits: 200,
            aggregation_ratio: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub from: NodeId,
    pub to: NodeId,
    pub depth: usize,
    pub bits: u64,
    pub payloads: Vec<Payload>,
}

/// Distinct payload ids arriving at `root` in a schedule.
pub fn delivered_payload_ids(schedule: &[Transmission], root: NodeId) -> BTreeSet<u64> {
    schedule
        .iter()
        .filter(|t| t.to == root)
        .flat_map(|t| t.payloads.iter().map(|p| p.id))
        .collect()
}
