//! Hierarchical IoT routing over fog nodes: overlapping fog-anchored
//! clustering with grey relational cluster-head election, a balanced fog tree
//! toward the cloud, comparison baselines, and a deterministic round-based
//! simulator with PDR, delay, response-time and lifetime metrics.

pub mod baselines;
pub mod clustering;
pub mod config;
pub mod experiment;
pub mod fog_tree;
pub mod grey;
pub mod model;
pub mod sim;

pub use clustering::{Cluster, ElectionParams, MembershipMap};
pub use config::{parse_config, ConfigError, ScenarioConfig};
pub use fog_tree::FogTree;
pub use grey::{rank_candidates, CriterionSpec, DecisionMatrix, Direction};
pub use model::{LinkSample, NodeId, NodeState, RadioModel, Role, Vec2};
pub use sim::{run_scenario, MetricsLedger, Protocol, RunOutput, SimError, Simulation, Summary};
