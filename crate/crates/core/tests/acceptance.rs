//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances are fixed here, not tuned per run.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{median, oracle_rank, random_problem, reference, rng, Problem};
use hriot_core::baselines::repc_select;
use hriot_core::experiment::{run_experiment, run_sweep};
use hriot_core::fog_tree::{build_balanced_tree, delivered_payload_ids, AggregationParams, Payload};
use hriot_core::model::link_expiration_time;
use hriot_core::sim::{link_success_probability, BaselineState};
use hriot_core::{rank_candidates, NodeId, NodeState, Protocol, ScenarioConfig, Simulation, Vec2};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn ranking(p: &Problem) -> Vec<u32> {
    rank_candidates(&p.to_matrix())
        .unwrap()
        .iter()
        .map(|r| r.id.0)
        .collect()
}

fn gra_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1001);
    let mut agree = 0;
    for _ in 0..500 {
        let p = random_problem(&mut r, 20, 6);
        let oracle: Vec<u32> = oracle_rank(&p).iter().map(|o| o.0).collect();
        if ranking(&p) == oracle {
            agree += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        agree == 500 && elapsed < Duration::from_secs(5),
        format!(
            "{agree}/500 rankings match the oracle in {:.3} s (limit 5 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn gra_scale_shift_invariance() -> Outcome {
    let mut r = rng(1002);
    let mut agree = 0;
    let mut checks = 0;
    for _ in 0..200 {
        let p = random_problem(&mut r, 20, 6);
        let base = ranking(&p);
        let col = (r.unit() * p.benefit.len() as f64) as usize;
        let scale = r.uniform(0.01, 100.0);
        let shift = r.uniform(-1000.0, 1000.0);
        for (a, b) in [(scale, 0.0), (1.0, shift), (scale, shift)] {
            let mut q = p.clone();
            for row in &mut q.rows {
                row[col] = row[col] * a + b;
            }
            checks += 1;
            if ranking(&q) == base {
                agree += 1;
            }
        }
    }
    outcome(
        agree == checks,
        format!("{agree}/{checks} scaled/shifted rankings unchanged over 200 matrices"),
    )
}

fn energy_conservation() -> Outcome {
    let cfg = ScenarioConfig {
        rounds: 500,
        ..reference()
    };
    let mut sim = Simulation::new(&cfg, Protocol::Hriot, 1).unwrap();
    let mut worst: f64 = 0.0;
    let mut rounds = 0;
    while sim.step().unwrap() {
        rounds += 1;
        for n in sim.nodes().iter().filter(|n| n.is_battery_powered()) {
            let spent = n.initial_energy - n.residual_energy;
            let audit = sim.ledger().energy_audit[n.id.index()];
            let err = if audit == 0.0 {
                spent.abs()
            } else {
                (spent - audit).abs() / audit
            };
            worst = worst.max(err);
        }
    }
    outcome(
        rounds == 500 && worst <= 1e-9,
        format!("{rounds} rounds, worst per-node relative error {worst:.3e} (limit 1e-9)"),
    )
}

fn lossless_pdr() -> Outcome {
    let cfg = ScenarioConfig {
        rounds: 200,
        base_loss: 0.0,
        initial_energy: 1e3,
        ..reference()
    };
    let mut sim = Simulation::new(&cfg, Protocol::Hriot, 1).unwrap();
    let mut uncovered = 0;
    while sim.step().unwrap() {
        if let BaselineState::Hriot { membership, .. } = sim.state() {
            uncovered += membership.uncovered.len();
        }
    }
    let l = sim.ledger();
    let pdr = l.delivered as f64 / l.sent as f64;
    outcome(
        l.sent == 200 * 100 && l.delivered == l.sent && uncovered == 0,
        format!(
            "delivered {}/{} (PDR {pdr}), uncovered device-rounds {uncovered}",
            l.delivered, l.sent
        ),
    )
}

/// Depth of a complete `b`-ary tree holding `f` nodes, root at depth 1.
fn complete_depth(f: usize, b: usize) -> usize {
    let (mut depth, mut capacity, mut level) = (0, 0, 1);
    while capacity < f {
        capacity += level;
        level *= b;
        depth += 1;
    }
    depth
}

fn tree_balance() -> Outcome {
    let mut r = rng(1005);
    let cloud = NodeState::cloud(NodeId(10_000), Vec2::new(500.0, 500.0), 1e4);
    let params = AggregationParams {
        header_bits: 200,
        aggregation_ratio: 0.5,
    };
    let mut depth_ok = 0;
    let mut payload_ok = 0;
    let mut cases = 0;
    for b in [2usize, 3, 4] {
        for f in 1..=64usize {
            cases += 1;
            let fogs: Vec<NodeState> = (0..f)
                .map(|i| {
                    let p = Vec2::new(r.uniform(0.0, 1000.0), r.uniform(0.0, 1000.0));
                    NodeState::fog(NodeId(i as u32), p, 100.0)
                })
                .collect();
            let tree = build_balanced_tree(&fogs, &cloud, b).unwrap();
            if tree.max_depth() == complete_depth(f, b) {
                depth_ok += 1;
            }
            let mut collected: BTreeMap<NodeId, Vec<Payload>> = BTreeMap::new();
            let mut next = 0u64;
            for fog in &fogs {
                if r.unit() < 0.3 {
                    continue;
                }
                for _ in 0..(r.unit() * 5.0) as usize {
                    collected
                        .entry(fog.id)
                        .or_default()
                        .push(Payload { id: next, bits: 2000 });
                    next += 1;
                }
            }
            let schedule = tree.aggregate_upward(&collected, &params);
            let at_cloud: usize = schedule
                .iter()
                .filter(|t| t.to == tree.root())
                .map(|t| t.payloads.len())
                .sum();
            let ids = delivered_payload_ids(&schedule, tree.root());
            if at_cloud as u64 == next && ids.len() as u64 == next {
                payload_ok += 1;
            }
        }
    }
    // Conservation inside a full HR-IoT run, round by round.
    let cfg = ScenarioConfig {
        rounds: 200,
        ..reference()
    };
    let mut sim = Simulation::new(&cfg, Protocol::Hriot, 5).unwrap();
    let mut bad_rounds = 0;
    while sim.step().unwrap() {
        let rec = sim.ledger().rounds.last().unwrap();
        if rec.payloads_to_fogs != rec.payloads_from_fogs {
            bad_rounds += 1;
        }
    }
    outcome(
        depth_ok == cases && payload_ok == cases && bad_rounds == 0,
        format!(
            "depth matches closed form {depth_ok}/{cases}; payloads conserved {payload_ok}/{cases} schedules, \
             {bad_rounds} bad rounds in a 200-round run"
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = ScenarioConfig {
        rounds: 100,
        ..reference()
    };
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_experiment(&cfg, &Protocol::ALL, &[1, 2], d.path()).unwrap();
    }
    let same = |name: &str| {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        a == b && !a.is_empty()
    };
    let (rounds, summary) = (same("rounds.csv"), same("summary.csv"));
    outcome(
        rounds && summary,
        format!("rounds.csv identical: {rounds}; summary.csv identical: {summary} (4 protocols x 2 seeds)"),
    )
}

fn comparative_trend() -> Outcome {
    let cfg = reference();
    let seeds: Vec<u64> = (1..=10).collect();
    let start = Instant::now();
    let runs = run_sweep(&cfg, &Protocol::ALL, &seeds).unwrap();
    let elapsed = start.elapsed();
    let stat = |p: Protocol, f: &dyn Fn(&hriot_core::RunOutput) -> f64| {
        median(&runs.iter().filter(|r| r.protocol == p).map(f).collect::<Vec<_>>())
    };
    // A run without any death outlives every observed death.
    let fnd = |r: &hriot_core::RunOutput| {
        r.summary
            .lifetime
            .first_node_death_round
            .map_or(r.summary.rounds_run as f64 + 1.0, |x| x as f64)
    };
    let delay = |r: &hriot_core::RunOutput| r.summary.mean_delay.unwrap_or(f64::INFINITY);
    let pdr = |r: &hriot_core::RunOutput| r.summary.pdr.unwrap_or(0.0);
    let (h_fnd, d_fnd) = (stat(Protocol::Hriot, &fnd), stat(Protocol::Direct, &fnd));
    let (h_delay, d_delay) = (stat(Protocol::Hriot, &delay), stat(Protocol::Direct, &delay));
    let (h_pdr, e_pdr) = (stat(Protocol::Hriot, &pdr), stat(Protocol::EecrpLike, &pdr));
    let clauses = [
        h_fnd >= d_fnd,
        h_delay <= d_delay,
        h_pdr >= e_pdr - 0.02,
        elapsed < Duration::from_secs(60),
    ];
    outcome(
        clauses.iter().all(|&c| c),
        format!(
            "median FND HRIOT {h_fnd} vs DIRECT {d_fnd}; median delay HRIOT {h_delay:.4} s vs DIRECT {d_delay:.4} s; \
             median PDR HRIOT {h_pdr:.4} vs EECRP_LIKE {e_pdr:.4} (-0.02); sweep {:.1} s (limit 60 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn stochastic_calibration() -> Outcome {
    let trials = 100_000;
    let mut r = rng(1008);
    let p = link_success_probability(-60.0, -90.0, 0.1);
    let loss = (0..trials).filter(|_| !r.bernoulli(p)).count() as f64 / trials as f64;
    let mut r = rng(1009);
    let cands = [(NodeId(1), 3.0), (NodeId(2), 1.0)];
    let share = (0..trials)
        .filter(|_| repc_select(&cands, &mut r) == Some(NodeId(1)))
        .count() as f64
        / trials as f64;
    outcome(
        (loss - 0.1).abs() <= 0.01 && (share - 0.75).abs() <= 0.01,
        format!("link loss {loss:.4} (target 0.10 +/- 0.01); REPC share {share:.4} (target 0.75 +/- 0.01)"),
    )
}

fn let_correctness() -> Outcome {
    let mut r = rng(1010);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let range = r.uniform(20.0, 200.0);
        let d = r.uniform(0.0, range);
        let v = r.uniform(0.1, 30.0);
        let theta = r.uniform(0.0, std::f64::consts::TAU);
        let dir = Vec2::new(theta.cos(), theta.sin());
        let origin = Vec2::new(r.uniform(-100.0, 100.0), r.uniform(-100.0, 100.0));
        let drift = r.uniform(-5.0, 5.0);
        let a = NodeState::device(NodeId(0), origin, 1.0, range).with_velocity(dir * drift);
        let b = NodeState::device(NodeId(1), origin + dir * d, 1.0, range).with_velocity(dir * (drift + v));
        worst = worst.max((link_expiration_time(&a, &b, range) - (range - d) / v).abs());
    }
    let a = NodeState::device(NodeId(0), Vec2::new(0.0, 0.0), 1.0, 100.0);
    let b = NodeState::device(NodeId(1), Vec2::new(40.0, 0.0), 1.0, 100.0);
    let infinite = link_expiration_time(&a, &b, 100.0) == f64::INFINITY;
    outcome(
        worst <= 1e-9 && infinite,
        format!("worst collinear error {worst:.3e} s (limit 1e-9); static in-range pair infinite: {infinite}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("GRA oracle equivalence", gra_oracle_equivalence),
        ("GRA scale/shift invariance", gra_scale_shift_invariance),
        ("energy conservation", energy_conservation),
        ("lossless PDR", lossless_pdr),
        ("tree balance", tree_balance),
        ("determinism", determinism),
        ("comparative trend", comparative_trend),
        ("stochastic calibration", stochastic_calibration),
        ("LET correctness", let_correctness),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
