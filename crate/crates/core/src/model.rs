//! Network entities, the first-order radio model, and per-link physical
//! quantities (distance, RSSI, link expiration time).

use std::fmt;
use std::ops::{Add, Mul, Sub};

/// Identifier of a node in a scenario. Devices, fogs and the cloud share one
/// id space; ids double as indices into the scenario's node table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Device,
    Fog,
    Cloud,
}

/// Outcome of charging energy to a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Charge {
    /// The full amount was paid. Carries the joules actually deducted, which
    /// is zero for mains-powered roles.
    Paid(f64),
    /// The battery could not cover the cost; the remaining charge was drained
    /// and the node is now dead.
    Exhausted(f64),
}

impl Charge {
    pub fn joules(self) -> f64 {
        match self {
            Charge::Paid(j) | Charge::Exhausted(j) => j,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: NodeId,
    pub role: Role,
    pub position: Vec2,
    pub velocity: Vec2,
    pub residual_energy: f64,
    pub initial_energy: f64,
    /// Ambient noise at this node, in dB.
    pub noise_figure: f64,
    pub comm_radius: f64,
    pub alive: bool,
}

impl NodeState {
    pub fn device(id: NodeId, position: Vec2, energy: f64, comm_radius: f64) -> Self {
        Self {
            id,
            role: Role::Device,
            position,
            velocity: Vec2::ZERO,
            residual_energy: energy,
            initial_energy: energy,
            noise_figure: 0.0,
            comm_radius,
            alive: true,
        }
    }

    pub fn fog(id: NodeId, position: Vec2, comm_radius: f64) -> Self {
        Self {
            role: Role::Fog,
            residual_energy: 0.0,
            initial_energy: 0.0,
            ..Self::device(id, position, 0.0, comm_radius)
        }
    }

    pub fn cloud(id: NodeId, position: Vec2, comm_radius: f64) -> Self {
        Self {
            role: Role::Cloud,
            ..Self::fog(id, position, comm_radius)
        }
    }

    pub fn with_velocity(mut self, velocity: Vec2) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn with_noise(mut self, noise_figure: f64) -> Self {
        self.noise_figure = noise_figure;
        self
    }

    pub fn is_battery_powered(&self) -> bool {
        self.role == Role::Device
    }

    /// Deducts `joules` from a battery-powered node. Fog and cloud nodes are
    /// mains-powered and never pay.
    pub fn charge(&mut self, joules: f64) -> Charge {
        if !self.is_battery_powered() {
            return Charge::Paid(0.0);
        }
        if joules <= self.residual_energy {
            self.residual_energy -= joules;
            if self.residual_energy <= 0.0 {
                self.residual_energy = 0.0;
                self.alive = false;
            }
            Charge::Paid(joules)
        } else {
            let drained = self.residual_energy;
            self.residual_energy = 0.0;
            self.alive = false;
            Charge::Exhausted(drained)
        }
    }

    /// Moves the node for `dt` seconds at its current velocity, reflecting
    /// off the walls of the `[0, width] x [0, height]` area.
    pub fn advance(&mut self, dt: f64, width: f64, height: f64) {
        if self.velocity == Vec2::ZERO || dt <= 0.0 {
            return;
        }
        let (x, vx) = reflect(self.position.x + self.velocity.x * dt, self.velocity.x, width);
        let (y, vy) = reflect(self.position.y + self.velocity.y * dt, self.velocity.y, height);
        self.position = Vec2::new(x, y);
        self.velocity = Vec2::new(vx, vy);
    }
}

fn reflect(mut p: f64, mut v: f64, extent: f64) -> (f64, f64) {
    if extent <= 0.0 {
        return (0.0, v);
    }
    // Unfold onto a period of 2*extent, then fold back.
    let period = 2.0 * extent;
    p = p.rem_euclid(period);
    if p > extent {
        p = period - p;
        v = -v;
    }
    (p, v)
}

/// First-order radio energy model plus a log-distance path-loss channel.
///
/// Energies are stored in SI units (joules per bit, joules per bit per m^2,
/// joules per bit per m^4).
#[derive(Debug, Clone, PartialEq)]
pub struct RadioModel {
    pub e_elec: f64,
    pub eps_fs: f64,
    pub eps_mp: f64,
    /// Transmit power in dBm.
    pub tx_power: f64,
    /// Path loss at the 1 m reference distance, in dB.
    pub pl0: f64,
    pub path_loss_exponent: f64,
    /// Receiver sensitivity in dBm.
    pub rx_sensitivity: f64,
    /// Radio bit rate, bits/s.
    pub bandwidth: f64,
}

impl Default for RadioModel {
    fn default() -> Self {
        Self {
            e_elec: 50e-9,
            eps_fs: 10e-12,
            eps_mp: 0.0013e-12,
            tx_power: 0.0,
            pl0: 40.0,
            path_loss_exponent: 2.0,
            rx_sensitivity: -90.0,
            bandwidth: 250_000.0,
        }
    }
}

impl RadioModel {
    /// Distance at which the free-space and multipath amplifier terms meet.
    pub fn crossover_distance(&self) -> f64 {
        (self.eps_fs / self.eps_mp).sqrt()
    }

    /// Energy to transmit `bits` over `d` meters.
    pub fn tx_energy(&self, bits: u64, d: f64) -> f64 {
        let bits = bits as f64;
        let amp = if d < self.crossover_distance() {
            self.eps_fs * d * d
        } else {
            self.eps_mp * d.powi(4)
        };
        self.e_elec * bits + amp * bits
    }

    pub fn rx_energy(&self, bits: u64) -> f64 {
        self.e_elec * bits as f64
    }

    /// Received power in dBm at distance `d` with `noise` dB of degradation.
    /// Distances below the 1 m reference are clamped to it.
    pub fn rssi(&self, d: f64, noise: f64) -> f64 {
        let d = d.max(1.0);
        self.tx_power - self.pl0 - 10.0 * self.path_loss_exponent * d.log10() - noise
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [
            ("e_elec", self.e_elec),
            ("eps_fs", self.eps_fs),
            ("eps_mp", self.eps_mp),
            ("bandwidth", self.bandwidth),
            ("path_loss_exponent", self.path_loss_exponent),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name} must be strictly positive, got {v}"));
            }
        }
        for (name, v) in [
            ("tx_power", self.tx_power),
            ("pl0", self.pl0),
            ("rx_sensitivity", self.rx_sensitivity),
        ] {
            if !v.is_finite() {
                return Err(format!("{name} must be finite, got {v}"));
            }
        }
        Ok(())
    }
}

pub fn distance(a: &NodeState, b: &NodeState) -> f64 {
    (a.position - b.position).norm()
}

/// Predicted time until `a` and `b`, moving at their current constant
/// velocities, first drift farther apart than `range`.
///
/// Returns `0.0` when the pair is already out of range and `f64::INFINITY`
/// when the pair is in range with zero relative velocity.
pub fn link_expiration_time(a: &NodeState, b: &NodeState, range: f64) -> f64 {
    let dp = b.position - a.position;
    let dv = b.velocity - a.velocity;
    let c = dp.norm_squared() - range * range;
    if c > 0.0 {
        return 0.0;
    }
    let a2 = dv.norm_squared();
    if a2 == 0.0 {
        return f64::INFINITY;
    }
    // |dp + t dv|^2 = range^2  =>  a2 t^2 + b t + c = 0, c <= 0.
    let b1 = 2.0 * dp.dot(dv);
    let disc = (b1 * b1 - 4.0 * a2 * c).max(0.0).sqrt();
    let t = if b1 >= 0.0 {
        if b1 + disc == 0.0 {
            0.0
        } else {
            -2.0 * c / (b1 + disc)
        }
    } else {
        (disc - b1) / (2.0 * a2)
    };
    t.max(0.0)
}

/// Physical snapshot of a directed link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkSample {
    pub src: NodeId,
    pub dst: NodeId,
    pub distance: f64,
    pub rssi: f64,
    pub let_s: f64,
    pub hop_estimate: u32,
}

impl LinkSample {
    /// Samples the link from `src` to `dst`. RSSI is degraded by the sender's
    /// noise figure; the link range is the smaller of the two radii.
    pub fn measure(radio: &RadioModel, src: &NodeState, dst: &NodeState, hop_estimate: u32) -> Self {
        let d = distance(src, dst);
        let range = src.comm_radius.min(dst.comm_radius);
        Self {
            src: src.id,
            dst: dst.id,
            distance: d,
            rssi: radio.rssi(d, src.noise_figure),
            let_s: link_expiration_time(src, dst, range),
            hop_estimate: hop_estimate.max(1),
        }
    }
}
