//! Seeded generators of real-valued test functions on `[0, side]^m`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A real function of a point.
pub type RealFn = Box<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

/// Generator kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    /// Sums of a few sinusoids with decaying random amplitudes.
    Trig,
    /// Affine functions.
    Ramp,
    /// Piecewise constant with one to three jumps along the first axis.
    Steps,
    /// Ramp plus steps.
    RampSteps,
    /// Sums of Gaussian bumps.
    Bumps,
    /// Large linear phase plus a small periodic perturbation.
    Winding,
    /// `|x − c|^{−α}` with `α ∈ (0, 0.4)`.
    Power,
}

/// A deterministic family of functions indexed by an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldFamily {
    pub kind: FamilyKind,
    pub seed: u64,
}

impl FieldFamily {
    pub fn new(kind: FamilyKind, seed: u64) -> Self {
        FieldFamily { kind, seed }
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let tag = self.kind as u64;
        ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (tag << 56) ^ index)
    }

    /// Member `index` of the family on `[0, side]^m`.
    pub fn member(&self, index: u64, m: usize, side: f64) -> RealFn {
        let mut rng = self.rng(index);
        let two_d = m == 2;
        match self.kind {
            FamilyKind::Trig => {
                let terms: Vec<(f64, f64, f64, f64)> = (1..=4)
                    .map(|k| {
                        let a = rng.random_range(-1.0..1.0) / k as f64;
                        let k1 = if two_d { rng.random_range(0..=k) as f64 } else { 0.0 };
                        (a, k as f64, k1, rng.random_range(0.0..TAU))
                    })
                    .collect();
                Box::new(move |x| {
                    terms
                        .iter()
                        .map(|&(a, k0, k1, ph)| a * (TAU * (k0 * x[0] + k1 * x[1]) / side + ph).sin())
                        .sum()
                })
            }
            FamilyKind::Ramp => {
                let (c, a, b) = (rng.random_range(-1.0..1.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                let b = if two_d { b } else { 0.0 };
                Box::new(move |x| c + (a * x[0] + b * x[1]) / side)
            }
            FamilyKind::Steps | FamilyKind::RampSteps => {
                let count = rng.random_range(1..=3);
                let jumps: Vec<(f64, f64)> =
                    (0..count).map(|_| (rng.random_range(0.1..0.9) * side, rng.random_range(-2.0..2.0))).collect();
                let slope = if self.kind == FamilyKind::RampSteps { rng.random_range(-3.0..3.0) } else { 0.0 };
                Box::new(move |x| {
                    slope * x[0] / side + jumps.iter().map(|&(at, h)| if x[0] >= at { h } else { 0.0 }).sum::<f64>()
                })
            }
            FamilyKind::Bumps => {
                let bumps: Vec<(f64, [f64; 2], f64)> = (0..rng.random_range(1..=3))
                    .map(|_| {
                        let c = [rng.random_range(0.2..0.8) * side, rng.random_range(0.2..0.8) * side];
                        (rng.random_range(-3.0..3.0), c, rng.random_range(0.05..0.2) * side)
                    })
                    .collect();
                Box::new(move |x| {
                    bumps
                        .iter()
                        .map(|&(a, c, w)| {
                            let r2 = (x[0] - c[0]).powi(2) + if two_d { (x[1] - c[1]).powi(2) } else { 0.0 };
                            a * (-r2 / (2.0 * w * w)).exp()
                        })
                        .sum()
                })
            }
            FamilyKind::Winding => {
                let turns = rng.random_range(1.0..6.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                let (a, ph) = (rng.random_range(0.0..0.5), rng.random_range(0.0..TAU));
                Box::new(move |x| TAU * turns * x[0] / side + a * (TAU * 2.0 * (x[0] + x[1]) / side + ph).sin())
            }
            FamilyKind::Power => {
                let alpha = rng.random_range(0.05..0.4);
                power_singularity(alpha, [0.5 * side, 0.5 * side], two_d)
            }
        }
    }
}

/// `|x − c|^{−α}`.
pub fn power_singularity(alpha: f64, c: [f64; 2], two_d: bool) -> RealFn {
    Box::new(move |x| {
        let r2 = (x[0] - c[0]).powi(2) + if two_d { (x[1] - c[1]).powi(2) } else { 0.0 };
        r2.powf(-alpha / 2.0)
    })
}
