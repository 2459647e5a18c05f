//! Shared helpers for the integration suites: an independent grey relational
//! oracle, random matrix generation, and small hand-built topologies.

#![allow(dead_code)]

use hriot_core::grey::{CriterionSpec, DecisionMatrix, Direction};
use hriot_core::sim::rng::{SimRng, Stream};
use hriot_core::{NodeId, NodeState, ScenarioConfig, Vec2};

/// A raw decision problem, kept separate from the library types so the
/// oracle never touches library code.
#[derive(Debug, Clone)]
pub struct Problem {
    pub ids: Vec<u32>,
    pub benefit: Vec<bool>,
    pub weights: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rho: f64,
}

impl Problem {
    pub fn to_matrix(&self) -> DecisionMatrix {
        let criteria = self
            .benefit
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(k, (&b, &w))| {
                let dir = if b { Direction::Benefit } else { Direction::Cost };
                CriterionSpec::new(format!("c{k}"), dir, w)
            })
            .collect();
        let ids = self.ids.iter().map(|&i| NodeId(i)).collect();
        DecisionMatrix::new(ids, criteria, &self.rows)
            .and_then(|m| m.with_rho(self.rho))
            .expect("generated problems are valid")
    }
}

/// Grey relational ranking recomputed straight from the definitions:
/// min-max normalization against the all-ones ideal, absolute deviations,
/// Deng's coefficient over the global deviation range, weighted grade, and
/// ordering by grade descending then id ascending.
pub fn oracle_rank(p: &Problem) -> Vec<(u32, f64)> {
    let m = p.benefit.len();
    let mut x = vec![vec![0.0; m]; p.rows.len()];
    for k in 0..m {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for row in &p.rows {
            lo = lo.min(row[k]);
            hi = hi.max(row[k]);
        }
        for (xi, row) in x.iter_mut().zip(&p.rows) {
            xi[k] = if hi == lo {
                1.0
            } else if p.benefit[k] {
                (row[k] - lo) / (hi - lo)
            } else {
                (hi - row[k]) / (hi - lo)
            };
        }
    }
    let delta: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| (1.0 - v).abs()).collect()).collect();
    let all = delta.iter().flatten();
    let dmin = all.clone().copied().fold(f64::INFINITY, f64::min);
    let dmax = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = p.weights.iter().sum();
    let mut graded: Vec<(u32, f64)> = delta
        .iter()
        .zip(&p.ids)
        .map(|(d, &id)| {
            let mut g = 0.0;
            for (dk, wk) in d.iter().zip(&p.weights) {
                let xi = if dmax == 0.0 {
                    1.0
                } else {
                    (dmin + p.rho * dmax) / (dk + p.rho * dmax)
                };
                g += (wk / total) * xi;
            }
            (id, g)
        })
        .collect();
    // Insertion sort, deliberately unlike the library's sort.
    for i in 1..graded.len() {
        let mut j = i;
        while j > 0 {
            let (a, b) = (graded[j - 1], graded[j]);
            let swap = b.1 > a.1 || (b.1 == a.1 && b.0 < a.0);
            if !swap {
                break;
            }
            graded.swap(j - 1, j);
            j -= 1;
        }
    }
    graded
}

/// Random problem with up to `max_rows` x `max_cols` values in `[0, 1000]`,
/// mixed directions, random positive weights and shuffled ids. Roughly one
/// in four problems uses coarse integer values and duplicated rows so exact
/// ties (and their id tie-break) are exercised.
pub fn random_problem(rng: &mut SimRng, max_rows: usize, max_cols: usize) -> Problem {
    let n = 1 + (rng.unit() * max_rows as f64) as usize;
    let m = 1 + (rng.unit() * max_cols as f64) as usize;
    let coarse = rng.unit() < 0.25;
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| {
                    if coarse {
                        (rng.unit() * 4.0).floor() * 250.0
                    } else {
                        rng.uniform(0.0, 1000.0)
                    }
                })
                .collect()
        })
        .collect();
    if coarse && n > 1 {
        let src = (rng.unit() * n as f64) as usize;
        let dst = (rng.unit() * n as f64) as usize;
        rows[dst] = rows[src].clone();
    }
    let mut ids: Vec<u32> = (0..n as u32).map(|i| i * 7 + 3).collect();
    for i in (1..n).rev() {
        let j = (rng.unit() * (i + 1) as f64) as usize;
        ids.swap(i, j);
    }
    Problem {
        ids,
        benefit: (0..m).map(|_| rng.unit() < 0.5).collect(),
        weights: (0..m).map(|_| rng.uniform(0.05, 1.0)).collect(),
        rows,
        rho: 0.5,
    }
}

pub fn rng(seed: u64) -> SimRng {
    SimRng::new(seed, Stream::Topology)
}

/// Reference scenario: 100 devices in 200 x 200 m, 4 grid fogs, cloud at the
/// centre, defaults elsewhere.
pub fn reference() -> ScenarioConfig {
    ScenarioConfig::default()
}

pub fn device(id: u32, x: f64, y: f64, energy: f64, radius: f64) -> NodeState {
    NodeState::device(NodeId(id), Vec2::new(x, y), energy, radius)
}

pub fn fog(id: u32, x: f64, y: f64, radius: f64) -> NodeState {
    NodeState::fog(NodeId(id), Vec2::new(x, y), radius)
}

pub fn cloud(id: u32, x: f64, y: f64, radius: f64) -> NodeState {
    NodeState::cloud(NodeId(id), Vec2::new(x, y), radius)
}

/// Median of `values` (mean of the middle pair for even counts).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
