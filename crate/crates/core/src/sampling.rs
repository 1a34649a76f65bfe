//! Deterministic point sets inside rectangles, used for measure estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Minimum number of points placed in any rectangle.
pub const MIN_POINTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Cell-centered lattice whose aspect follows the rectangle.
    Grid,
    /// Additive recurrence on the plastic number (R2 sequence), shifted by a
    /// seed-derived offset.
    QuasiRandom,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub strategy: Strategy,
    /// Multiplier on the base budget `max(256, 64·len/wid)`.
    pub refine: f64,
    pub seed: u64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler { strategy: Strategy::QuasiRandom, refine: 1.0, seed: 0 }
    }
}

impl Sampler {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        Sampler { strategy, refine: 1.0, seed }
    }

    pub fn with_refinement(mut self, refine: f64) -> Result<Self> {
        if !(refine > 0.0) || !refine.is_finite() {
            return Err(Error::InvalidParam(format!("sampler refinement must be positive, got {refine}")));
        }
        self.refine = refine;
        Ok(self)
    }

    pub fn budget(&self, r: &Rect) -> usize {
        let base = (64.0 * r.len() / r.wid()).max(256.0);
        ((self.refine * base).ceil() as usize).max(MIN_POINTS)
    }

    /// Lattice shape `(along, across)` with about `n` points for aspect `len/wid`.
    pub fn lattice_dims(n: usize, aspect: f64) -> (usize, usize) {
        let across = ((n as f64 / aspect).sqrt().round() as usize).max(1);
        let along = n.div_ceil(across).max(1);
        (along, across)
    }

    /// Points in normalized frame coordinates `(u, w) ∈ [-1/2, 1/2]²`; the point of
    /// the rectangle is `center + u·len·dir + w·wid·dir⊥`.
    pub fn unit_points(&self, r: &Rect) -> Vec<(f64, f64)> {
        let n = self.budget(r);
        match self.strategy {
            Strategy::Grid => {
                let (nu, nw) = Self::lattice_dims(n, r.len() / r.wid());
                lattice(nu, nw)
            }
            Strategy::QuasiRandom => r2_points(n, self.seed),
        }
    }
}

/// Cell-centered `nu × nw` lattice in `[-1/2, 1/2]²`.
pub fn lattice(nu: usize, nw: usize) -> Vec<(f64, f64)> {
    let mut pts = Vec::with_capacity(nu * nw);
    for i in 0..nu {
        let u = (i as f64 + 0.5) / nu as f64 - 0.5;
        for j in 0..nw {
            let w = (j as f64 + 0.5) / nw as f64 - 0.5;
            pts.push((u, w));
        }
    }
    pts
}

const PLASTIC: f64 = 1.324_717_957_244_746;

fn r2_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ou: f64 = rng.gen();
    let ow: f64 = rng.gen();
    let a1 = 1.0 / PLASTIC;
    let a2 = 1.0 / (PLASTIC * PLASTIC);
    (0..n)
        .map(|i| {
            let k = (i + 1) as f64;
            ((ou + k * a1).fract() - 0.5, (ow + k * a2).fract() - 0.5)
        })
        .collect()
}
