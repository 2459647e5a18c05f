//! Per-packet evidence and the run ledger behind PDR, delay, response time
//! and lifetime.

use crate::model::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    None,
    NoRoute,
    LinkLoss,
    DeadNode,
}

/// One generated data packet. Times are absolute simulation seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub src_device: NodeId,
    pub created_at: f64,
    pub bits: u64,
    /// Hops taken with the time each was reached, starting at the source.
    pub path: Vec<(NodeId, f64)>,
    pub delivered_at: Option<f64>,
    pub response_at: Option<f64>,
    pub dropped_reason: DropReason,
}

impl Packet {
    pub fn new(id: u64, src_device: NodeId, created_at: f64, bits: u64) -> Self {
        Self {
            id,
            src_device,
            created_at,
            bits,
            path: vec![(src_device, created_at)],
            delivered_at: None,
            response_at: None,
            dropped_reason: DropReason::None,
        }
    }

    pub fn delay(&self) -> Option<f64> {
        self.delivered_at.map(|t| t - self.created_at)
    }

    pub fn response_time(&self) -> Option<f64> {
        self.response_at.map(|t| t - self.created_at)
    }
}

/// Traffic and energy totals for a single round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub alive: usize,
    pub sent: u64,
    pub delivered: u64,
    pub sum_delay: f64,
    pub sum_response: f64,
    /// Cumulative energy consumed by the end of this round.
    pub energy_consumed: f64,
    /// Distinct payloads handed to the fog tier / received by the cloud from
    /// it. Both zero for protocols without a fog tier.
    pub payloads_to_fogs: usize,
    pub payloads_from_fogs: usize,
    pub drops: [u64; 3],
}

impl RoundRecord {
    pub fn pdr(&self) -> Option<f64> {
        ratio(self.delivered as f64, self.sent)
    }

    pub fn mean_delay(&self) -> Option<f64> {
        ratio(self.sum_delay, self.delivered)
    }

    pub fn mean_response(&self) -> Option<f64> {
        ratio(self.sum_response, self.delivered)
    }
}

fn ratio(num: f64, den: u64) -> Option<f64> {
    (den > 0).then(|| num / den as f64)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsLedger {
    pub sent: u64,
    pub delivered: u64,
    pub sum_delay: f64,
    pub sum_response: f64,
    pub first_node_death_round: Option<u64>,
    pub alive_curve: Vec<usize>,
    pub energy_consumed: f64,
    /// Joules consumed per node, indexed by node id.
    pub energy_audit: Vec<f64>,
    pub rounds: Vec<RoundRecord>,
}

impl MetricsLedger {
    pub fn new(node_count: usize) -> Self {
        Self {
            energy_audit: vec![0.0; node_count],
            ..Self::default()
        }
    }

    pub fn record_energy(&mut self, node: NodeId, joules: f64) {
        if joules > 0.0 {
            self.energy_audit[node.index()] += joules;
            self.energy_consumed += joules;
        }
    }

    pub fn record_death(&mut self, round: u64) {
        self.first_node_death_round.get_or_insert(round);
    }

    pub(crate) fn close_round(&mut self, record: RoundRecord) {
        self.sent += record.sent;
        self.delivered += record.delivered;
        self.sum_delay += record.sum_delay;
        self.sum_response += record.sum_response;
        self.alive_curve.push(record.alive);
        self.rounds.push(record);
    }
}

/// Network lifetime: first-node-death round (if any) plus the alive curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Lifetime {
    pub first_node_death_round: Option<u64>,
    pub alive_curve: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rounds_run: u64,
    pub sent: u64,
    pub delivered: u64,
    /// `None` when nothing was sent.
    pub pdr: Option<f64>,
    pub mean_delay: Option<f64>,
    pub mean_response: Option<f64>,
    pub lifetime: Lifetime,
    pub energy_consumed: f64,
}

pub fn finalize_metrics(ledger: &MetricsLedger) -> Summary {
    Summary {
        rounds_run: ledger.rounds.len() as u64,
        sent: ledger.sent,
        delivered: ledger.delivered,
        pdr: ratio(ledger.delivered as f64, ledger.sent),
        mean_delay: ratio(ledger.sum_delay, ledger.delivered),
        mean_response: ratio(ledger.sum_response, ledger.delivered),
        lifetime: Lifetime {
            first_node_death_round: ledger.first_node_death_round,
            alive_curve: ledger.alive_curve.clone(),
        },
        energy_consumed: ledger.energy_consumed,
    }
}
