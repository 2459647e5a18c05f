//! Scenario configuration: a strict `key = value` text format.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! # comment (also allowed after a value)
//! key = value
//! ```
//!
//! Numbers use Rust float/integer syntax (`0.5`, `5e-8`, `-90`). Booleans are
//! `true`/`false`. Lists separate numbers with commas or whitespace; point
//! lists separate points with `;` (`fog_positions = 50 50; 150 50`).
//! Unknown keys, repeated keys and malformed values are rejected with the
//! line number. Every key is optional; omitted keys take the defaults shown
//! by [`ScenarioConfig::to_text`] on `ScenarioConfig::default()`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::clustering::ElectionParams;
use crate::fog_tree::AggregationParams;
use crate::model::{RadioModel, Vec2};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.key, self.message),
            None => write!(f, "{}: {}", self.key, self.message),
        }
    }
}

/// One or more problems with a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    pub fn single(line: Option<usize>, key: &str, message: impl Into<String>) -> Self {
        Self {
            issues: vec![ConfigIssue {
                line,
                key: key.to_string(),
                message: message.into(),
            }],
        }
    }

    pub fn keys(&self) -> Vec<&str> {
        self.issues.iter().map(|i| i.key.as_str()).collect()
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: ")?;
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficModel {
    /// `packets_per_round` packets from every alive device at the start of
    /// each round.
    Constant,
    /// Poisson-distributed count with mean `packets_per_round`, creation
    /// times uniform over the round.
    Poisson,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Placement {
    Grid,
    Explicit(Vec<Vec2>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum CloudPlacement {
    Center,
    At(Vec2),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub area_width: f64,
    pub area_height: f64,
    pub device_count: u64,
    pub fog_count: u64,
    pub fog_positions: Placement,
    pub cloud_position: CloudPlacement,
    pub rounds: u64,
    pub round_duration: f64,
    pub seed: u64,

    pub initial_energy: f64,
    pub device_radius: f64,
    pub fog_radius: f64,
    pub cloud_radius: f64,
    pub noise_figure_max: f64,
    pub max_speed: f64,

    pub radio: RadioModel,
    pub backhaul_bandwidth: f64,
    pub proc_delay: f64,
    pub cloud_proc_delay: f64,

    pub packet_bits: u64,
    pub header_bits: u64,
    pub response_bits: u64,
    pub traffic: TrafficModel,
    pub packets_per_round: f64,

    pub rho: f64,
    pub weights: [f64; 6],
    pub let_cap: f64,
    pub ch_energy_gate: f64,
    pub reelection_period: u64,
    pub branching: u64,
    pub aggregation_ratio: f64,
    pub base_loss: f64,
    pub duplicate_to_all_overlaps: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_width: 200.0,
            area_height: 200.0,
            device_count: 100,
            fog_count: 4,
            fog_positions: Placement::Grid,
            cloud_position: CloudPlacement::Center,
            rounds: 1000,
            round_duration: 1.0,
            seed: 1,
            initial_energy: 0.5,
            device_radius: 80.0,
            fog_radius: 80.0,
            cloud_radius: 80.0,
            noise_figure_max: 2.0,
            max_speed: 0.5,
            radio: RadioModel::default(),
            backhaul_bandwidth: 100e6,
            proc_delay: 0.002,
            cloud_proc_delay: 0.005,
            packet_bits: 2000,
            header_bits: 200,
            response_bits: 200,
            traffic: TrafficModel::Constant,
            packets_per_round: 1.0,
            rho: 0.5,
            weights: [1.0; 6],
            let_cap: 3600.0,
            ch_energy_gate: 1.0,
            reelection_period: 5,
            branching: 2,
            aggregation_ratio: 1.0,
            base_loss: 0.02,
            duplicate_to_all_overlaps: false,
        }
    }
}

impl ScenarioConfig {
    pub fn election_params(&self) -> ElectionParams {
        ElectionParams {
            radio: self.radio.clone(),
            weights: self.weights,
            rho: self.rho,
            let_cap: self.let_cap,
            energy_gate: self.ch_energy_gate,
        }
    }

    pub fn aggregation_params(&self) -> AggregationParams {
        AggregationParams {
            header_bits: self.header_bits,
            aggregation_ratio: self.aggregation_ratio,
        }
    }

    /// Fog coordinates: explicit, or the centers of a near-square grid of
    /// cells filled row by row.
    pub fn fog_coordinates(&self) -> Vec<Vec2> {
        match &self.fog_positions {
            Placement::Explicit(points) => points.clone(),
            Placement::Grid => {
                let n = self.fog_count as usize;
                if n == 0 {
                    return Vec::new();
                }
                let cols = (n as f64).sqrt().ceil() as usize;
                let rows = n.div_ceil(cols);
                let (cw, ch) = (self.area_width / cols as f64, self.area_height / rows as f64);
                (0..n)
                    .map(|i| Vec2::new((i % cols) as f64 * cw + cw / 2.0, (i / cols) as f64 * ch + ch / 2.0))
                    .collect()
            }
        }
    }

    pub fn cloud_coordinates(&self) -> Vec2 {
        match self.cloud_position {
            CloudPlacement::Center => Vec2::new(self.area_width / 2.0, self.area_height / 2.0),
            CloudPlacement::At(p) => p,
        }
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_with_lines(&BTreeMap::new())
    }

    fn validate_with_lines(&self, lines: &BTreeMap<String, usize>) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        let mut check = |ok: bool, key: &str, msg: &str| {
            if !ok {
                issues.push(ConfigIssue {
                    line: lines.get(key).copied(),
                    key: key.to_string(),
                    message: msg.to_string(),
                });
            }
        };
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;

        check(pos(self.area_width), "area_width", "must be > 0");
        check(pos(self.area_height), "area_height", "must be > 0");
        check(pos(self.round_duration), "round_duration", "must be > 0");
        check(pos(self.initial_energy), "initial_energy", "must be > 0");
        check(pos(self.device_radius), "device_radius", "must be > 0");
        check(pos(self.fog_radius), "fog_radius", "must be > 0");
        check(pos(self.cloud_radius), "cloud_radius", "must be > 0");
        check(nonneg(self.noise_figure_max), "noise_figure_max", "must be >= 0");
        check(nonneg(self.max_speed), "max_speed", "must be >= 0");
        for (key, v) in [
            ("e_elec", self.radio.e_elec),
            ("eps_fs", self.radio.eps_fs),
            ("eps_mp", self.radio.eps_mp),
            ("bandwidth", self.radio.bandwidth),
            ("path_loss_exponent", self.radio.path_loss_exponent),
        ] {
            check(pos(v), key, "must be > 0");
        }
        for (key, v) in [
            ("tx_power", self.radio.tx_power),
            ("pl0", self.radio.pl0),
            ("rx_sensitivity", self.radio.rx_sensitivity),
        ] {
            check(v.is_finite(), key, "must be finite");
        }
        check(pos(self.backhaul_bandwidth), "backhaul_bandwidth", "must be > 0");
        check(pos(self.proc_delay), "proc_delay", "must be > 0");
        check(nonneg(self.cloud_proc_delay), "cloud_proc_delay", "must be >= 0");
        check(self.packet_bits > 0, "packet_bits", "must be >= 1");
        check(nonneg(self.packets_per_round), "packets_per_round", "must be >= 0");
        if self.traffic == TrafficModel::Constant {
            check(
                self.packets_per_round.fract() == 0.0,
                "packets_per_round",
                "must be a whole number with constant traffic",
            );
        }
        check(self.rho > 0.0 && self.rho <= 1.0, "rho", "must lie in (0, 1]");
        check(
            self.weights.iter().all(|w| nonneg(*w)) && self.weights.iter().sum::<f64>() > 0.0,
            "weights",
            "must be six non-negative numbers, not all zero",
        );
        check(pos(self.let_cap), "let_cap", "must be > 0");
        check(
            (0.0..=1.0).contains(&self.ch_energy_gate),
            "ch_energy_gate",
            "must be in [0, 1]",
        );
        check(self.reelection_period >= 1, "reelection_period", "must be >= 1");
        check(self.branching >= 1, "branching", "must be >= 1");
        check(
            self.aggregation_ratio.is_finite() && self.aggregation_ratio > 0.0 && self.aggregation_ratio <= 1.0,
            "aggregation_ratio",
            "must lie in (0, 1]",
        );
        check((0.0..=1.0).contains(&self.base_loss), "base_loss", "must lie in [0, 1]");
        if let Placement::Explicit(points) = &self.fog_positions {
            check(
                points.len() as u64 == self.fog_count,
                "fog_positions",
                "must list exactly fog_count points",
            );
            check(points.iter().all(|p| p.is_finite()), "fog_positions", "must be finite");
        }
        if let CloudPlacement::At(p) = self.cloud_position {
            check(p.is_finite(), "cloud_position", "must be finite");
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    /// Serializes every key, defaults included. Parsing the output yields an
    /// identical config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("area_width", self.area_width.to_string());
        kv("area_height", self.area_height.to_string());
        kv("device_count", self.device_count.to_string());
        kv("fog_count", self.fog_count.to_string());
        kv(
            "fog_positions",
            match &self.fog_positions {
                Placement::Grid => "grid".into(),
                Placement::Explicit(ps) => ps
                    .iter()
                    .map(|p| format!("{} {}", p.x, p.y))
                    .collect::<Vec<_>>()
                    .join("; "),
            },
        );
        kv(
            "cloud_position",
            match self.cloud_position {
                CloudPlacement::Center => "center".into(),
                CloudPlacement::At(p) => format!("{} {}", p.x, p.y),
            },
        );
        kv("rounds", self.rounds.to_string());
        kv("round_duration", self.round_duration.to_string());
        kv("seed", self.seed.to_string());
        kv("initial_energy", self.initial_energy.to_string());
        kv("device_radius", self.device_radius.to_string());
        kv("fog_radius", self.fog_radius.to_string());
        kv("cloud_radius", self.cloud_radius.to_string());
        kv("noise_figure_max", self.noise_figure_max.to_string());
        kv("max_speed", self.max_speed.to_string());
        kv("e_elec", self.radio.e_elec.to_string());
        kv("eps_fs", self.radio.eps_fs.to_string());
        kv("eps_mp", self.radio.eps_mp.to_string());
        kv("tx_power", self.radio.tx_power.to_string());
        kv("pl0", self.radio.pl0.to_string());
        kv("path_loss_exponent", self.radio.path_loss_exponent.to_string());
        kv("rx_sensitivity", self.radio.rx_sensitivity.to_string());
        kv("bandwidth", self.radio.bandwidth.to_string());
        kv("backhaul_bandwidth", self.backhaul_bandwidth.to_string());
        kv("proc_delay", self.proc_delay.to_string());
        kv("cloud_proc_delay", self.cloud_proc_delay.to_string());
        kv("packet_bits", self.packet_bits.to_string());
        kv("header_bits", self.header_bits.to_string());
        kv("response_bits", self.response_bits.to_string());
        kv(
            "traffic",
            match self.traffic {
                TrafficModel::Constant => "constant".into(),
                TrafficModel::Poisson => "poisson".into(),
            },
        );
        kv("packets_per_round", self.packets_per_round.to_string());
        kv("rho", self.rho.to_string());
        kv(
            "weights",
            self.weights.iter().map(f64::to_string).collect::<Vec<_>>().join(", "),
        );
        kv("let_cap", self.let_cap.to_string());
        kv("ch_energy_gate", self.ch_energy_gate.to_string());
        kv("reelection_period", self.reelection_period.to_string());
        kv("branching", self.branching.to_string());
        kv("aggregation_ratio", self.aggregation_ratio.to_string());
        kv("base_loss", self.base_loss.to_string());
        kv("duplicate_to_all_overlaps", self.duplicate_to_all_overlaps.to_string());
        out
    }
}

fn parse_f64(v: &str) -> Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("expected a number, got `{v}`"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("expected a finite number, got `{v}`"))
    }
}

fn parse_count(v: &str) -> Result<u64, String> {
    match v.parse::<i128>() {
        Ok(x) if x < 0 => Err(format!("must be >= 0, got {x}")),
        Ok(x) => u64::try_from(x).map_err(|_| format!("out of range: {x}")),
        Err(_) => Err(format!("expected a non-negative integer, got `{v}`")),
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, String> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(parse_f64)
        .collect()
}

fn parse_point(v: &str) -> Result<Vec2, String> {
    match parse_list(v)?.as_slice() {
        [x, y] => Ok(Vec2::new(*x, *y)),
        _ => Err(format!("expected a point `x y`, got `{v}`")),
    }
}

fn parse_points(v: &str) -> Result<Vec<Vec2>, String> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_point)
        .collect()
}

fn apply(cfg: &mut ScenarioConfig, key: &str, v: &str) -> Result<(), String> {
    match key {
        "area_width" => cfg.area_width = parse_f64(v)?,
        "area_height" => cfg.area_height = parse_f64(v)?,
        "device_count" => cfg.device_count = parse_count(v)?,
        "fog_count" => cfg.fog_count = parse_count(v)?,
        "fog_positions" => {
            cfg.fog_positions = if v == "grid" {
                Placement::Grid
            } else {
                Placement::Explicit(parse_points(v)?)
            }
        }
        "cloud_position" => {
            cfg.cloud_position = if v == "center" {
                CloudPlacement::Center
            } else {
                CloudPlacement::At(parse_point(v)?)
            }
        }
        "rounds" => cfg.rounds = parse_count(v)?,
        "round_duration" => cfg.round_duration = parse_f64(v)?,
        "seed" => cfg.seed = parse_count(v)?,
        "initial_energy" => cfg.initial_energy = parse_f64(v)?,
        "device_radius" => cfg.device_radius = parse_f64(v)?,
        "fog_radius" => cfg.fog_radius = parse_f64(v)?,
        "cloud_radius" => cfg.cloud_radius = parse_f64(v)?,
        "noise_figure_max" => cfg.noise_figure_max = parse_f64(v)?,
        "max_speed" => cfg.max_speed = parse_f64(v)?,
        "e_elec" => cfg.radio.e_elec = parse_f64(v)?,
        "eps_fs" => cfg.radio.eps_fs = parse_f64(v)?,
        "eps_mp" => cfg.radio.eps_mp = parse_f64(v)?,
        "tx_power" => cfg.radio.tx_power = parse_f64(v)?,
        "pl0" => cfg.radio.pl0 = parse_f64(v)?,
        "path_loss_exponent" => cfg.radio.path_loss_exponent = parse_f64(v)?,
        "rx_sensitivity" => cfg.radio.rx_sensitivity = parse_f64(v)?,
        "bandwidth" => cfg.radio.bandwidth = parse_f64(v)?,
        "backhaul_bandwidth" => cfg.backhaul_bandwidth = parse_f64(v)?,
        "proc_delay" => cfg.proc_delay = parse_f64(v)?,
        "cloud_proc_delay" => cfg.cloud_proc_delay = parse_f64(v)?,
        "packet_bits" => cfg.packet_bits = parse_count(v)?,
        "header_bits" => cfg.header_bits = parse_count(v)?,
        "response_bits" => cfg.response_bits = parse_count(v)?,
        "traffic" => {
            cfg.traffic = match v {
                "constant" => TrafficModel::Constant,
                "poisson" => TrafficModel::Poisson,
                _ => return Err(format!("expected constant or poisson, got `{v}`")),
            }
        }
        "packets_per_round" => cfg.packets_per_round = parse_f64(v)?,
        "rho" => cfg.rho = parse_f64(v)?,
        "weights" => {
            let w = parse_list(v)?;
            cfg.weights = w
                .try_into()
                .map_err(|w: Vec<f64>| format!("expected 6 weights, got {}", w.len()))?;
        }
        "let_cap" => cfg.let_cap = parse_f64(v)?,
        "ch_energy_gate" => cfg.ch_energy_gate = parse_f64(v)?,
        "reelection_period" => cfg.reelection_period = parse_count(v)?,
        "branching" => cfg.branching = parse_count(v)?,
        "aggregation_ratio" => cfg.aggregation_ratio = parse_f64(v)?,
        "base_loss" => cfg.base_loss = parse_f64(v)?,
        "duplicate_to_all_overlaps" => cfg.duplicate_to_all_overlaps = parse_bool(v)?,
        _ => return Err("unknown key".to_string()),
    }
    Ok(())
}

/// Parses and validates a scenario. Syntax errors stop at the first bad line;
/// constraint violations are all reported together.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = ScenarioConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut issues = Vec::new();
    let mut issue = |line: usize, key: &str, message: String| {
        issues.push(ConfigIssue {
            line: Some(line),
            key: key.to_string(),
            message,
        })
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            issue(line_no, line, "expected `key = value`".to_string());
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if let Some(first) = seen.get(key) {
            issue(line_no, key, format!("duplicate key (first set on line {first})"));
            continue;
        }
        match apply(&mut cfg, key, value) {
            Ok(()) => {
                seen.insert(key.to_string(), line_no);
            }
            Err(m) => issue(line_no, key, m),
        }
    }
    // Semantic checks still run so one pass reports every offending key.
    if let Err(e) = cfg.validate_with_lines(&seen) {
        issues.extend(e.issues);
    }
    if issues.is_empty() {
        Ok(cfg)
    } else {
        issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        Err(ConfigError { issues })
    }
}
