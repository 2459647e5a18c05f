//! Deterministic round-based simulation engine.
//!
//! A round runs mobility, protocol preparation (clustering and elections for
//! HR-IoT), sensing, and forwarding. Forwarding inside a round is a small
//! discrete-event loop ordered by `(time, node id, packet id)`. A node sends
//! one frame at a time and receives one frame at a time (the two directions
//! use separate channels, as with per-cluster codes), so frames queue behind
//! a busy sender or a busy receiver; the fog backhaul is reliable,
//! contention-free and mains-powered.

pub mod metrics;
pub mod rng;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use log::debug;
use rand_distr::{Distribution, Poisson};

use crate::baselines::{direct_route, EecrpState, ErgidState};
use crate::clustering::{
    form_overlapping_clusters, intra_cluster_route, refresh_heads, select_uplink_cluster, Cluster, ClusterError,
    ElectionParams, MembershipMap,
};
use crate::config::{ConfigError, ScenarioConfig, TrafficModel};
use crate::fog_tree::{build_balanced_tree, delivered_payload_ids, FogTree, Payload};
use crate::model::{distance, Charge, NodeId, NodeState, Role, Vec2};

pub use metrics::{finalize_metrics, DropReason, Lifetime, MetricsLedger, Packet, RoundRecord, Summary};
use rng::{SimRng, Stream};

/// Propagation speed, m/s.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Hriot,
    Direct,
    EecrpLike,
    ErgidLike,
}

impl Protocol {
    pub const ALL: [Protocol; 4] = [
        Protocol::Hriot,
        Protocol::Direct,
        Protocol::EecrpLike,
        Protocol::ErgidLike,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Hriot => "HRIOT",
            Protocol::Direct => "DIRECT",
            Protocol::EecrpLike => "EECRP_LIKE",
            Protocol::ErgidLike => "ERGID_LIKE",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase().replace('-', "_");
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == upper)
            .ok_or_else(|| format!("unknown protocol `{s}` (expected HRIOT, DIRECT, EECRP_LIKE or ERGID_LIKE)"))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
}

/// One-hop latency: serialization + propagation + per-hop processing.
pub fn per_hop_latency(bits: u64, d: f64, bandwidth: f64, proc_delay: f64) -> f64 {
    bits as f64 / bandwidth + d / SPEED_OF_LIGHT + proc_delay
}

/// Probability a frame survives a hop: zero below receiver sensitivity,
/// otherwise `1 - base_loss`.
pub fn link_success_probability(rssi_dbm: f64, sensitivity_dbm: f64, base_loss: f64) -> f64 {
    if rssi_dbm < sensitivity_dbm {
        0.0
    } else {
        1.0 - base_loss
    }
}

/// Position inside the current round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundClock {
    pub round_index: u64,
    pub round_duration: f64,
    now: f64,
}

impl RoundClock {
    pub fn new(round_index: u64, round_duration: f64) -> Self {
        Self {
            round_index,
            round_duration,
            now: 0.0,
        }
    }

    /// Absolute time at which the round starts.
    pub fn start(&self) -> f64 {
        self.round_index as f64 * self.round_duration
    }

    /// Offset into the round, within `[0, round_duration]`.
    pub fn now(&self) -> f64 {
        self.now
    }

    /// Moves the clock to absolute time `t`; traffic that drains past the
    /// end of the round pins the clock at the round boundary.
    pub fn observe(&mut self, t: f64) {
        let offset = (t - self.start()).clamp(0.0, self.round_duration);
        self.now = self.now.max(offset);
    }
}

/// Auxiliary per-protocol routing state.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineState {
    Hriot {
        clusters: Vec<Cluster>,
        membership: MembershipMap,
    },
    Direct,
    Eecrp(EecrpState),
    Ergid(Option<ErgidState>),
}

#[derive(Debug, Clone, PartialEq)]
enum RouteState {
    Fixed { hops: Vec<NodeId>, pos: usize },
    Greedy { visited: BTreeSet<NodeId> },
}

#[derive(Debug, Clone)]
struct Flight {
    packet: usize,
    route: RouteState,
    path: Vec<(NodeId, f64)>,
    outcome: Option<Result<f64, DropReason>>,
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    node: NodeId,
    packet: u64,
    copy: usize,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // Reversed so `BinaryHeap` pops the earliest event.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.node.cmp(&self.node))
            .then(other.packet.cmp(&self.packet))
            .then(other.copy.cmp(&self.copy))
    }
}

/// Everything a finished run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub protocol: Protocol,
    pub seed: u64,
    pub ledger: MetricsLedger,
    pub summary: Summary,
    pub tree: FogTree,
}

pub struct Simulation {
    cfg: ScenarioConfig,
    protocol: Protocol,
    seed: u64,
    params: ElectionParams,
    nodes: Vec<NodeState>,
    cloud: NodeId,
    tree: FogTree,
    state: BaselineState,
    traffic_rng: SimRng,
    channel_rng: SimRng,
    routing_rng: SimRng,
    ledger: MetricsLedger,
    round: u64,
    next_packet_id: u64,
    packets: Vec<Packet>,
}

/// Places devices, fogs and the cloud for `cfg` from the seed's topology
/// stream. Devices get ids `0..n`, fogs follow, the cloud is last.
pub fn build_topology(cfg: &ScenarioConfig, seed: u64) -> Vec<NodeState> {
    let mut rng = SimRng::new(seed, Stream::Topology);
    let mut nodes = Vec::new();
    for i in 0..cfg.device_count {
        let pos = Vec2::new(rng.uniform(0.0, cfg.area_width), rng.uniform(0.0, cfg.area_height));
        let speed = rng.uniform(0.0, cfg.max_speed);
        let heading = rng.uniform(0.0, std::f64::consts::TAU);
        let noise = rng.uniform(0.0, cfg.noise_figure_max);
        nodes.push(
            NodeState::device(NodeId(i as u32), pos, cfg.initial_energy, cfg.device_radius)
                .with_velocity(Vec2::new(speed * heading.cos(), speed * heading.sin()))
                .with_noise(noise),
        );
    }
    for p in cfg.fog_coordinates() {
        let id = NodeId(nodes.len() as u32);
        nodes.push(NodeState::fog(id, p, cfg.fog_radius));
    }
    let id = NodeId(nodes.len() as u32);
    nodes.push(NodeState::cloud(id, cfg.cloud_coordinates(), cfg.cloud_radius));
    nodes
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, protocol: Protocol, seed: u64) -> Result<Self, SimError> {
        cfg.validate()?;
        Self::with_nodes(cfg, protocol, seed, build_topology(cfg, seed))
    }

    /// Runs over a hand-built node table. Ids must equal table indices and
    /// exactly one node must be the cloud.
    pub fn with_nodes(
        cfg: &ScenarioConfig,
        protocol: Protocol,
        seed: u64,
        nodes: Vec<NodeState>,
    ) -> Result<Self, SimError> {
        cfg.validate()?;
        if let Some(bad) = nodes.iter().enumerate().find(|(i, n)| n.id.index() != *i) {
            return Err(SimError::Topology(format!(
                "node at index {} has id {}",
                bad.0, bad.1.id
            )));
        }
        let clouds: Vec<NodeId> = nodes.iter().filter(|n| n.role == Role::Cloud).map(|n| n.id).collect();
        let [cloud] = clouds[..] else {
            return Err(SimError::Topology(format!(
                "expected exactly one cloud, found {}",
                clouds.len()
            )));
        };
        let fogs: Vec<NodeState> = nodes.iter().filter(|n| n.role == Role::Fog).cloned().collect();
        if fogs.is_empty() && matches!(protocol, Protocol::Hriot | Protocol::EecrpLike) {
            return Err(ConfigError::single(None, "fog_count", format!("{protocol} needs at least one fog")).into());
        }
        let tree = build_balanced_tree(&fogs, &nodes[cloud.index()], cfg.branching as usize)
            .map_err(|e| ConfigError::single(None, "branching", e.to_string()))?;
        let state = match protocol {
            Protocol::Hriot => BaselineState::Hriot {
                clusters: Vec::new(),
                membership: MembershipMap::default(),
            },
            Protocol::Direct => BaselineState::Direct,
            Protocol::EecrpLike => BaselineState::Eecrp(EecrpState::new(fogs.iter().map(|f| f.position).collect())),
            Protocol::ErgidLike => BaselineState::Ergid(None),
        };
        Ok(Self {
            params: cfg.election_params(),
            cfg: cfg.clone(),
            protocol,
            seed,
            ledger: MetricsLedger::new(nodes.len()),
            nodes,
            cloud,
            tree,
            state,
            traffic_rng: SimRng::new(seed, Stream::Traffic),
            channel_rng: SimRng::new(seed, Stream::Channel),
            routing_rng: SimRng::new(seed, Stream::Routing),
            round: 0,
            next_packet_id: 0,
            packets: Vec::new(),
        })
    }

    pub fn protocol(&self) -> Protocol {
        self.protocol
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn ledger(&self) -> &MetricsLedger {
        &self.ledger
    }

    pub fn tree(&self) -> &FogTree {
        &self.tree
    }

    pub fn state(&self) -> &BaselineState {
        &self.state
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    /// Packets generated in the most recent round.
    pub fn last_packets(&self) -> &[Packet] {
        &self.packets
    }

    pub fn alive_devices(&self) -> usize {
        self.nodes.iter().filter(|n| n.role == Role::Device && n.alive).count()
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.cfg.rounds || self.alive_devices() == 0
    }

    /// Runs one round. Returns `false` without doing anything once the run
    /// is over.
    pub fn step(&mut self) -> Result<bool, SimError> {
        if self.is_finished() {
            return Ok(false);
        }
        let mut clock = RoundClock::new(self.round, self.cfg.round_duration);
        if self.round > 0 {
            let (w, h, dt) = (self.cfg.area_width, self.cfg.area_height, self.cfg.round_duration);
            for n in self.nodes.iter_mut().filter(|n| n.role == Role::Device && n.alive) {
                n.advance(dt, w, h);
            }
        }
        self.prepare_routing()?;
        self.generate_packets(&clock);
        let mut copies = self.plan_routes()?;
        let mut record = RoundRecord {
            round: self.round,
            alive: 0,
            sent: self.packets.len() as u64,
            delivered: 0,
            sum_delay: 0.0,
            sum_response: 0.0,
            energy_consumed: 0.0,
            payloads_to_fogs: 0,
            payloads_from_fogs: 0,
            drops: [0; 3],
        };
        self.forward(&mut copies, &mut clock);
        let delivered_at = if self.protocol == Protocol::Hriot {
            self.fog_tier(&mut copies, &mut record, &mut clock)
        } else {
            copies
                .iter()
                .enumerate()
                .filter_map(|(i, c)| match c.outcome {
                    Some(Ok(t)) => Some((i, t)),
                    _ => None,
                })
                .collect()
        };
        self.settle(&copies, &delivered_at, &mut record);
        record.alive = self.alive_devices();
        record.energy_consumed = self.ledger.energy_consumed;
        debug!(
            "{} seed {} round {}: sent {} delivered {} alive {}",
            self.protocol, self.seed, self.round, record.sent, record.delivered, record.alive
        );
        self.ledger.close_round(record);
        self.round += 1;
        Ok(true)
    }

    pub fn run(mut self) -> Result<RunOutput, SimError> {
        while self.step()? {}
        Ok(RunOutput {
            protocol: self.protocol,
            seed: self.seed,
            summary: finalize_metrics(&self.ledger),
            ledger: self.ledger,
            tree: self.tree,
        })
    }

    fn prepare_routing(&mut self) -> Result<(), SimError> {
        let due = self.round.is_multiple_of(self.cfg.reelection_period);
        match &mut self.state {
            BaselineState::Hriot { clusters, membership } => {
                let (mut fresh, map) = form_overlapping_clusters(&self.nodes)?;
                refresh_heads(&mut fresh, clusters, &self.nodes, &self.params, |_| due)?;
                *clusters = fresh;
                *membership = map;
            }
            BaselineState::Direct => {}
            BaselineState::Eecrp(s) => s.prepare(&self.nodes, due),
            BaselineState::Ergid(s) => {
                let hop = per_hop_latency(self.cfg.packet_bits, 0.0, self.cfg.radio.bandwidth, self.cfg.proc_delay);
                *s = Some(ErgidState::prepare(&self.nodes, self.cloud, hop));
            }
        }
        Ok(())
    }

    fn generate_packets(&mut self, clock: &RoundClock) {
        self.packets.clear();
        let start = clock.start();
        let devices: Vec<NodeId> = self
            .nodes
            .iter()
            .filter(|n| n.role == Role::Device && n.alive)
            .map(|n| n.id)
            .collect();
        for d in devices {
            let mut times: Vec<f64> = match self.cfg.traffic {
                TrafficModel::Constant => vec![0.0; self.cfg.packets_per_round as usize],
                TrafficModel::Poisson => {
                    let count = if self.cfg.packets_per_round > 0.0 {
                        Poisson::new(self.cfg.packets_per_round)
                            .map(|p| p.sample(self.traffic_rng.inner()) as usize)
                            .unwrap_or(0)
                    } else {
                        0
                    };
                    (0..count)
                        .map(|_| self.traffic_rng.uniform(0.0, self.cfg.round_duration))
                        .collect()
                }
            };
            times.sort_by(f64::total_cmp);
            for t in times {
                self.packets
                    .push(Packet::new(self.next_packet_id, d, start + t, self.cfg.packet_bits));
                self.next_packet_id += 1;
            }
        }
    }

    fn plan_routes(&mut self) -> Result<Vec<Flight>, SimError> {
        let mut copies = Vec::with_capacity(self.packets.len());
        let mut uplinks: BTreeMap<NodeId, Vec<Vec<NodeId>>> = BTreeMap::new();
        for (i, p) in self.packets.iter().enumerate() {
            let d = p.src_device;
            let routes: Vec<RouteState> = match &self.state {
                BaselineState::Hriot { clusters, membership } => {
                    if let std::collections::btree_map::Entry::Vacant(slot) = uplinks.entry(d) {
                        let routes = hriot_routes(
                            d,
                            clusters,
                            membership,
                            &self.nodes,
                            &self.params,
                            self.cfg.duplicate_to_all_overlaps,
                        )?;
                        slot.insert(routes);
                    }
                    uplinks[&d]
                        .iter()
                        .map(|h| RouteState::Fixed {
                            hops: h.clone(),
                            pos: 0,
                        })
                        .collect()
                }
                BaselineState::Direct => vec![RouteState::Fixed {
                    hops: direct_route(d, self.cloud),
                    pos: 0,
                }],
                BaselineState::Eecrp(s) => s
                    .route(d, self.cloud)
                    .map(|hops| RouteState::Fixed { hops, pos: 0 })
                    .into_iter()
                    .collect(),
                BaselineState::Ergid(_) => vec![RouteState::Greedy {
                    visited: BTreeSet::from([d]),
                }],
            };
            if routes.is_empty() {
                copies.push(Flight {
                    packet: i,
                    route: RouteState::Fixed { hops: vec![d], pos: 0 },
                    path: p.path.clone(),
                    outcome: Some(Err(DropReason::NoRoute)),
                });
            }
            for route in routes {
                copies.push(Flight {
                    packet: i,
                    route,
                    path: p.path.clone(),
                    outcome: None,
                });
            }
        }
        Ok(copies)
    }

    fn is_terminal(&self, node: NodeId) -> bool {
        match self.protocol {
            Protocol::Hriot => self.nodes[node.index()].role == Role::Fog,
            _ => node == self.cloud,
        }
    }

    fn link_bandwidth(&self, a: NodeId, b: NodeId) -> f64 {
        let infra = |n: NodeId| self.nodes[n.index()].role != Role::Device;
        if infra(a) && infra(b) {
            self.cfg.backhaul_bandwidth
        } else {
            self.cfg.radio.bandwidth
        }
    }

    fn charge(&mut self, node: NodeId, joules: f64) -> bool {
        let was_alive = self.nodes[node.index()].alive;
        let charge = self.nodes[node.index()].charge(joules);
        self.ledger.record_energy(node, charge.joules());
        if was_alive && !self.nodes[node.index()].alive {
            debug!(
                "{} seed {}: node {} died in round {}",
                self.protocol, self.seed, node, self.round
            );
            self.ledger.record_death(self.round);
        }
        matches!(charge, Charge::Paid(_))
    }

    /// Device-tier forwarding: drains the event queue until every copy has
    /// reached its terminal or been dropped.
    fn forward(&mut self, copies: &mut [Flight], clock: &mut RoundClock) {
        let mut tx_free = vec![clock.start(); self.nodes.len()];
        let mut rx_free = tx_free.clone();
        let mut queue = BinaryHeap::new();
        for (i, c) in copies.iter().enumerate() {
            if c.outcome.is_none() {
                let p = &self.packets[c.packet];
                queue.push(Event {
                    time: p.created_at,
                    node: p.src_device,
                    packet: p.id,
                    copy: i,
                });
            }
        }
        while let Some(ev) = queue.pop() {
            clock.observe(ev.time);
            let copy = &mut copies[ev.copy];
            let bits = self.packets[copy.packet].bits;
            let at = ev.node;
            if !self.nodes[at.index()].alive {
                copy.outcome = Some(Err(DropReason::DeadNode));
                continue;
            }
            let next = match &mut copy.route {
                RouteState::Fixed { hops, pos } => hops.get(*pos + 1).copied(),
                RouteState::Greedy { visited } => {
                    let ttl = self.cfg.device_count as usize;
                    let BaselineState::Ergid(Some(s)) = &self.state else {
                        unreachable!("greedy routes only exist under ERGID_LIKE")
                    };
                    if copy.path.len() > ttl {
                        None
                    } else {
                        s.next_hop(at, visited, &self.nodes, &mut self.routing_rng)
                    }
                }
            };
            let Some(next) = next else {
                copy.outcome = Some(Err(DropReason::NoRoute));
                continue;
            };
            let d = distance(&self.nodes[at.index()], &self.nodes[next.index()]);
            let bw = self.link_bandwidth(at, next);
            let start = ev.time.max(tx_free[at.index()]).max(rx_free[next.index()]);
            let airtime = per_hop_latency(bits, d, bw, 0.0);
            let end = start + airtime;
            tx_free[at.index()] = end;
            rx_free[next.index()] = end;
            let arrival = end + self.cfg.proc_delay;

            let tx = self.cfg.radio.tx_energy(bits, d);
            let sent_ok = self.charge(at, tx);
            let copy = &mut copies[ev.copy];
            if !sent_ok || !self.nodes[next.index()].alive {
                copy.outcome = Some(Err(DropReason::DeadNode));
                continue;
            }
            let rssi = self.cfg.radio.rssi(d, self.nodes[at.index()].noise_figure);
            let p_ok = link_success_probability(rssi, self.cfg.radio.rx_sensitivity, self.cfg.base_loss);
            if !self.channel_rng.bernoulli(p_ok) {
                copy.outcome = Some(Err(DropReason::LinkLoss));
                continue;
            }
            let rx = self.cfg.radio.rx_energy(bits);
            if !self.charge(next, rx) {
                copies[ev.copy].outcome = Some(Err(DropReason::DeadNode));
                continue;
            }
            let copy = &mut copies[ev.copy];
            copy.path.push((next, arrival));
            match &mut copy.route {
                RouteState::Fixed { pos, .. } => *pos += 1,
                RouteState::Greedy { visited } => {
                    visited.insert(next);
                }
            }
            if self.is_terminal(next) {
                copy.outcome = Some(Ok(arrival));
            } else {
                queue.push(Event {
                    time: arrival,
                    node: next,
                    packet: ev.packet,
                    copy: ev.copy,
                });
            }
        }
    }

    /// Aggregates fog arrivals up the tree. Returns `(copy index, cloud
    /// arrival)` for every copy that made it to a fog.
    fn fog_tier(&self, copies: &mut [Flight], record: &mut RoundRecord, clock: &mut RoundClock) -> Vec<(usize, f64)> {
        let mut collected: BTreeMap<NodeId, Vec<Payload>> = BTreeMap::new();
        let mut ready: BTreeMap<NodeId, f64> = BTreeMap::new();
        let mut at_fog: Vec<(usize, NodeId)> = Vec::new();
        for (i, c) in copies.iter().enumerate() {
            if let Some(Ok(t)) = c.outcome {
                let fog = c.path.last().expect("non-empty path").0;
                let p = &self.packets[c.packet];
                collected
                    .entry(fog)
                    .or_default()
                    .push(Payload { id: p.id, bits: p.bits });
                let r = ready.entry(fog).or_insert(t);
                *r = r.max(t);
                at_fog.push((i, fog));
            }
        }
        record.payloads_to_fogs = collected
            .values()
            .flatten()
            .map(|p| p.id)
            .collect::<BTreeSet<_>>()
            .len();
        let schedule = self.tree.aggregate_upward(&collected, &self.cfg.aggregation_params());
        let mut arrival_up: BTreeMap<NodeId, f64> = BTreeMap::new();
        for tx in &schedule {
            let depart = ready.get(&tx.from).copied().unwrap_or(f64::NEG_INFINITY);
            let d = distance(&self.nodes[tx.from.index()], &self.nodes[tx.to.index()]);
            let arrive = depart + per_hop_latency(tx.bits, d, self.link_bandwidth(tx.from, tx.to), self.cfg.proc_delay);
            clock.observe(arrive);
            arrival_up.insert(tx.from, arrive);
            let r = ready.entry(tx.to).or_insert(arrive);
            *r = r.max(arrive);
        }
        record.payloads_from_fogs = delivered_payload_ids(&schedule, self.tree.root()).len();

        let mut out = Vec::with_capacity(at_fog.len());
        for (i, fog) in at_fog {
            let route = self.tree.path_to_root(fog).expect("fogs are in the tree");
            for hop in route.windows(2) {
                copies[i].path.push((hop[1], arrival_up[&hop[0]]));
            }
            let t = copies[i].path.last().expect("non-empty path").1;
            copies[i].outcome = Some(Ok(t));
            out.push((i, t));
        }
        out
    }

    /// Folds copy outcomes into packets and the round record.
    fn settle(&mut self, copies: &[Flight], delivered: &[(usize, f64)], record: &mut RoundRecord) {
        let mut best: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for &(ci, t) in delivered {
            let e = best.entry(copies[ci].packet).or_insert((t, ci));
            if t < e.0 {
                *e = (t, ci);
            }
        }
        for (pi, packet) in self.packets.iter_mut().enumerate() {
            if let Some(&(t, ci)) = best.get(&pi) {
                packet.path = copies[ci].path.clone();
                packet.delivered_at = Some(t);
            } else if let Some(c) = copies.iter().find(|c| c.packet == pi) {
                packet.path = c.path.clone();
                packet.dropped_reason = match c.outcome {
                    Some(Err(r)) => r,
                    _ => DropReason::NoRoute,
                };
            }
        }
        for pi in 0..self.packets.len() {
            let Some(t) = self.packets[pi].delivered_at else {
                let slot = match self.packets[pi].dropped_reason {
                    DropReason::NoRoute | DropReason::None => 0,
                    DropReason::LinkLoss => 1,
                    DropReason::DeadNode => 2,
                };
                record.drops[slot] += 1;
                continue;
            };
            let back = self.return_latency(&self.packets[pi].path);
            let packet = &mut self.packets[pi];
            let response_at = t + self.cfg.cloud_proc_delay + back;
            packet.response_at = Some(response_at);
            record.delivered += 1;
            record.sum_delay += t - packet.created_at;
            record.sum_response += response_at - packet.created_at;
        }
    }

    /// Latency of a response retracing `path` from the cloud back to the
    /// source, without queueing.
    fn return_latency(&self, path: &[(NodeId, f64)]) -> f64 {
        path.windows(2)
            .rev()
            .map(|w| {
                let (a, b) = (w[0].0, w[1].0);
                let d = distance(&self.nodes[a.index()], &self.nodes[b.index()]);
                per_hop_latency(
                    self.cfg.response_bits,
                    d,
                    self.link_bandwidth(a, b),
                    self.cfg.proc_delay,
                )
            })
            .sum()
    }
}

fn hriot_routes(
    device: NodeId,
    clusters: &[Cluster],
    membership: &MembershipMap,
    nodes: &[NodeState],
    params: &ElectionParams,
    duplicate: bool,
) -> Result<Vec<Vec<NodeId>>, SimError> {
    let mine: Vec<&Cluster> = clusters
        .iter()
        .filter(|c| membership.clusters(device).contains(&c.fog_anchor) && c.head.is_some())
        .collect();
    let chosen: Vec<&Cluster> = if duplicate {
        mine
    } else {
        match select_uplink_cluster(device, &mine, nodes, params)? {
            Some(anchor) => mine.into_iter().filter(|c| c.fog_anchor == anchor).collect(),
            None => Vec::new(),
        }
    };
    chosen
        .into_iter()
        .map(|c| intra_cluster_route(device, c).map_err(SimError::from))
        .collect()
}

/// Runs `cfg` to completion under `protocol` with `seed`.
pub fn run_scenario(cfg: &ScenarioConfig, protocol: Protocol, seed: u64) -> Result<RunOutput, SimError> {
    Simulation::new(cfg, protocol, seed)?.run()
}
