//! Simplified comparison protocols: direct transmission, an EECRP-like
//! centroid clustering, and an ERGID-like delay-tiered, energy-proportional
//! greedy forwarder.
//!
//! These are trend-level approximations of the published protocols, kept
//! deliberately small. They share the engine's energy, loss and delay models.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::{distance, NodeId, NodeState, Role, Vec2};
use crate::sim::rng::SimRng;

/// Route for direct transmission: straight to the cloud.
pub fn direct_route(device: NodeId, cloud: NodeId) -> Vec<NodeId> {
    vec![device, cloud]
}

/// Cluster-head score for the EECRP-like baseline.
pub fn eecrp_head_score(residual_energy: f64, distance_to_centroid: f64) -> f64 {
    residual_energy / (1.0 + distance_to_centroid)
}

const KMEANS_MAX_ITERS: usize = 20;

fn nearest(point: Vec2, centroids: &[Vec2]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = (point - *c).norm_squared();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Lloyd's algorithm from the given starting centroids. Empty clusters keep
/// their previous centroid.
pub fn kmeans(points: &[Vec2], mut centroids: Vec<Vec2>) -> Vec<Vec2> {
    if points.is_empty() || centroids.is_empty() {
        return centroids;
    }
    let mut assign: Vec<usize> = points.iter().map(|p| nearest(*p, &centroids)).collect();
    for _ in 0..KMEANS_MAX_ITERS {
        let mut sums = vec![(Vec2::ZERO, 0usize); centroids.len()];
        for (p, &k) in points.iter().zip(&assign) {
            sums[k].0 = sums[k].0 + *p;
            sums[k].1 += 1;
        }
        for (c, (sum, n)) in centroids.iter_mut().zip(sums) {
            if n > 0 {
                *c = sum * (1.0 / n as f64);
            }
        }
        let next: Vec<usize> = points.iter().map(|p| nearest(*p, &centroids)).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    centroids
}

/// EECRP-like state: a non-overlapping partition of the alive devices around
/// `k` centroids, one head per non-empty part. Heads relay straight to the
/// cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct EecrpState {
    pub centroids: Vec<Vec2>,
    pub assignment: BTreeMap<NodeId, usize>,
    pub heads: Vec<Option<NodeId>>,
}

impl EecrpState {
    pub fn new(initial_centroids: Vec<Vec2>) -> Self {
        let k = initial_centroids.len();
        Self {
            centroids: initial_centroids,
            assignment: BTreeMap::new(),
            heads: vec![None; k],
        }
    }

    /// Re-partitions the alive devices. When `due`, centroids are recomputed
    /// and every head re-elected; otherwise heads are only replaced when dead
    /// or no longer in their part.
    pub fn prepare(&mut self, nodes: &[NodeState], due: bool) {
        let alive: Vec<&NodeState> = nodes.iter().filter(|n| n.role == Role::Device && n.alive).collect();
        if due {
            let points: Vec<Vec2> = alive.iter().map(|n| n.position).collect();
            self.centroids = kmeans(&points, std::mem::take(&mut self.centroids));
        }
        self.assignment = alive
            .iter()
            .map(|n| (n.id, nearest(n.position, &self.centroids)))
            .collect();
        for k in 0..self.centroids.len() {
            let keep =
                !due && self.heads[k].is_some_and(|h| nodes[h.index()].alive && self.assignment.get(&h) == Some(&k));
            if keep {
                continue;
            }
            let centroid = self.centroids[k];
            self.heads[k] = alive
                .iter()
                .filter(|n| self.assignment[&n.id] == k)
                .map(|n| {
                    (
                        n.id,
                        eecrp_head_score(n.residual_energy, (n.position - centroid).norm()),
                    )
                })
                .fold(None, |best: Option<(NodeId, f64)>, (id, s)| match best {
                    Some((_, bs)) if bs >= s => best,
                    _ => Some((id, s)),
                })
                .map(|(id, _)| id);
        }
    }

    pub fn members(&self, k: usize) -> Vec<NodeId> {
        self.assignment
            .iter()
            .filter(|(_, &c)| c == k)
            .map(|(&id, _)| id)
            .collect()
    }

    pub fn route(&self, device: NodeId, cloud: NodeId) -> Option<Vec<NodeId>> {
        let k = *self.assignment.get(&device)?;
        let head = self.heads[k]?;
        Some(if head == device {
            vec![device, cloud]
        } else {
            vec![device, head, cloud]
        })
    }
}

/// Picks one candidate with probability proportional to its weight (residual
/// energy). Falls back to the first candidate when every weight is zero.
pub fn repc_select(candidates: &[(NodeId, f64)], rng: &mut SimRng) -> Option<NodeId> {
    let total: f64 = candidates.iter().map(|c| c.1.max(0.0)).sum();
    if candidates.is_empty() {
        return None;
    }
    if total <= 0.0 {
        return Some(candidates[0].0);
    }
    let mut target = rng.unit() * total;
    for &(id, w) in candidates {
        let w = w.max(0.0);
        if target < w {
            return Some(id);
        }
        target -= w;
    }
    candidates.iter().rev().find(|c| c.1 > 0.0).map(|c| c.0)
}

/// ERGID-like forwarding state, rebuilt every round: the alive neighbour
/// graph and hop counts to the cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgidState {
    pub cloud: NodeId,
    pub neighbors: Vec<Vec<NodeId>>,
    pub hops: Vec<Option<u32>>,
    /// Estimated per-hop latency used to turn hop counts into delay
    /// estimates.
    pub mean_hop_latency: f64,
}

impl ErgidState {
    pub fn prepare(nodes: &[NodeState], cloud: NodeId, mean_hop_latency: f64) -> Self {
        let mut neighbors = vec![Vec::new(); nodes.len()];
        let routable: Vec<&NodeState> = nodes
            .iter()
            .filter(|n| (n.role == Role::Device && n.alive) || n.id == cloud)
            .collect();
        for (i, a) in routable.iter().enumerate() {
            for b in &routable[i + 1..] {
                if distance(a, b) <= a.comm_radius.min(b.comm_radius) {
                    neighbors[a.id.index()].push(b.id);
                    neighbors[b.id.index()].push(a.id);
                }
            }
        }
        let mut hops = vec![None; nodes.len()];
        hops[cloud.index()] = Some(0);
        let mut queue = VecDeque::from([cloud]);
        while let Some(at) = queue.pop_front() {
            let h = hops[at.index()].expect("queued nodes have hop counts");
            for &n in &neighbors[at.index()] {
                if hops[n.index()].is_none() {
                    hops[n.index()] = Some(h + 1);
                    queue.push_back(n);
                }
            }
        }
        Self {
            cloud,
            neighbors,
            hops,
            mean_hop_latency,
        }
    }

    /// Estimated remaining delay from `node` to the cloud.
    pub fn delay_estimate(&self, node: NodeId) -> Option<f64> {
        self.hops[node.index()].map(|h| f64::from(h) * self.mean_hop_latency)
    }

    /// Next hop from `at`: admissible neighbours (alive, unvisited, with a
    /// route) are tiered by estimated delay and the best tier is sampled in
    /// proportion to residual energy. The cloud, when adjacent, is always
    /// the sole best tier.
    pub fn next_hop(
        &self,
        at: NodeId,
        visited: &BTreeSet<NodeId>,
        nodes: &[NodeState],
        rng: &mut SimRng,
    ) -> Option<NodeId> {
        let mut best = f64::INFINITY;
        let mut tier: Vec<(NodeId, f64)> = Vec::new();
        for &n in &self.neighbors[at.index()] {
            if visited.contains(&n) || !nodes[n.index()].alive {
                continue;
            }
            let Some(est) = self.delay_estimate(n) else {
                continue;
            };
            if est < best {
                best = est;
                tier.clear();
            }
            if est == best {
                tier.push((n, nodes[n.index()].residual_energy));
            }
        }
        if tier.iter().any(|&(n, _)| n == self.cloud) {
            return Some(self.cloud);
        }
        tier.sort_by_key(|c| c.0);
        repc_select(&tier, rng)
    }
}
