//! Portable seeded randomness.
//!
//! Every run draws from xoshiro256++ (Blackman and Vigna). The 64-bit run
//! seed is expanded into the 256-bit state with SplitMix64
//! (`0x9e3779b97f4a7c15` increment, `0xbf58476d1ce4e5b9` / `0x94d049bb133111eb`
//! mixers), and independent streams are split off with the generator's
//! 2^128-step jump, so the topology a seed produces does not depend on which
//! protocol consumes the traffic and channel streams.

use rand::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Topology = 0,
    Traffic = 1,
    Channel = 2,
    Routing = 3,
}

#[derive(Debug, Clone)]
pub struct SimRng(Xoshiro256PlusPlus);

impl SimRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        let mut inner = Xoshiro256PlusPlus::seed_from_u64(seed);
        for _ in 0..stream as u32 {
            inner.jump();
        }
        Self(inner)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Bernoulli trial with success probability `p`.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    pub fn inner(&mut self) -> &mut Xoshiro256PlusPlus {
        &mut self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let mut a = SimRng::new(7, Stream::Channel);
        let mut b = SimRng::new(7, Stream::Channel);
        let mut c = SimRng::new(7, Stream::Traffic);
        let xs: Vec<f64> = (0..8).map(|_| a.unit()).collect();
        let ys: Vec<f64> = (0..8).map(|_| b.unit()).collect();
        let zs: Vec<f64> = (0..8).map(|_| c.unit()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        assert!(xs.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn known_first_output() {
        // Pins the algorithm so a dependency bump cannot silently change runs.
        let mut r = SimRng::new(0, Stream::Topology);
        let first = r.inner().next_u64();
        let mut again = SimRng::new(0, Stream::Topology);
        assert_eq!(first, again.inner().next_u64());
        assert_eq!(first, 0x53175d61490b23df);
    }
}
