//! `M_κ` applied to sums of indicators of dilated rectangles, evaluated
//! analytically: square terms by polygon clipping, segment terms by exact
//! line/rectangle spans.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};
use crate::geometry::{axis_square, line_span, quad_intersection_area, Point, Rect, UnitVec, AREA_FLOOR, CLIP_EPS};

/// Area of `(x + sQ) ∩ big`, where `Q` is the unit square centered at the origin.
pub fn square_term(x: Point, s: f64, big: &Rect) -> f64 {
    if x.dist(big.center()) > big.radius() + s * FRAC_1_SQRT_2 + CLIP_EPS {
        return 0.0;
    }
    let a = quad_intersection_area(&axis_square(x, s), &big.corners());
    if a < AREA_FLOOR {
        0.0
    } else {
        a
    }
}

/// Length of `{σ ∈ [-s, s] : x + σω ∈ big}`.
pub fn segment_term(x: Point, omega: Point, s: f64, big: &Rect) -> f64 {
    match line_span(x, omega, big) {
        Some(span) => clip_span(span, s),
        None => 0.0,
    }
}

#[inline]
fn clip_span((lo, hi): (f64, f64), s: f64) -> f64 {
    let len = hi.min(s) - lo.max(-s);
    if len > 0.0 {
        len
    } else {
        0.0
    }
}

/// Scales and directions of `M_κ` for one family.
///
/// Terms are indexed `scale·(1 + #dirs) + k`, with `k = 0` the square and
/// `k ≥ 1` the segment in direction `k - 1`. A term's value is its sum over
/// the dilated rectangles, taken in the order given, divided by `s²` or `2s`.
#[derive(Clone, Debug)]
pub struct KappaOperator {
    kappa: u32,
    thresh: f64,
    scales: Vec<f64>,
    dirs: Vec<Point>,
    norms: Vec<f64>,
}

impl KappaOperator {
    /// Scales run from half the smallest width, doubling, up to the first one
    /// at least the diameter of the bounding box of all `κR`.
    pub fn for_family(rects: &[Rect], kappa: u32) -> Result<Self> {
        if kappa < 8 {
            return Err(Error::InvalidParam(format!("κ must be at least 8, got {kappa}")));
        }
        if rects.is_empty() {
            return Err(Error::Precondition("empty family".into()));
        }
        let k = kappa as f64;
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut wmin = f64::INFINITY;
        for r in rects {
            wmin = wmin.min(r.wid());
            for c in r.dilate(k)?.corners() {
                lo = Point::new(lo.x.min(c.x), lo.y.min(c.y));
                hi = Point::new(hi.x.max(c.x), hi.y.max(c.y));
            }
        }
        let diam = lo.dist(hi);
        let mut scales = vec![0.5 * wmin];
        while *scales.last().unwrap() < diam {
            let s = 2.0 * scales.last().unwrap();
            scales.push(s);
        }
        let count = if kappa % 2 == 0 { kappa / 2 } else { kappa };
        let dirs: Vec<Point> = (0..count).map(|j| UnitVec::from_angle(TAU * j as f64 / k).as_point()).collect();
        let mut norms = Vec::with_capacity(scales.len() * (1 + dirs.len()));
        for &s in &scales {
            norms.push(s * s);
            norms.extend(std::iter::repeat(2.0 * s).take(dirs.len()));
        }
        Ok(KappaOperator { kappa, thresh: 1.0 / k, scales, dirs, norms })
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    /// The level `κ⁻¹` of the superlevel set.
    pub fn threshold(&self) -> f64 {
        self.thresh
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn directions(&self) -> &[Point] {
        &self.dirs
    }

    pub fn n_terms(&self) -> usize {
        self.norms.len()
    }

    pub fn norm(&self, t: usize) -> f64 {
        self.norms[t]
    }

    #[inline]
    pub fn term_passes(&self, t: usize, sum: f64) -> bool {
        sum / self.norms[t] >= self.thresh
    }

    /// Adds the contributions of `big` at `x` to `sums`, stopping at the first
    /// term that reaches the threshold. Returns whether one did; `sums` is then
    /// incomplete and should be dropped.
    pub fn accumulate(&self, x: Point, big: &Rect, sums: &mut [f64]) -> bool {
        self.add(x, big, sums, true)
    }

    fn add(&self, x: Point, big: &Rect, sums: &mut [f64], stop: bool) -> bool {
        let stride = 1 + self.dirs.len();
        let smax = *self.scales.last().unwrap();
        let reach = x.dist(big.center()) - big.radius();
        if reach > smax * (1.0 + 1e-9) + CLIP_EPS {
            return false;
        }
        let mut hit = false;
        // Segments first: deep inside `big` the finest one passes at once.
        for (k, &w) in self.dirs.iter().enumerate() {
            let Some(span) = line_span(x, w, big) else { continue };
            for (i, &s) in self.scales.iter().enumerate() {
                let len = clip_span(span, s);
                if len > 0.0 {
                    let t = i * stride + 1 + k;
                    sums[t] += len;
                    hit |= self.term_passes(t, sums[t]);
                    if hit && stop {
                        return true;
                    }
                }
            }
        }
        for (i, &s) in self.scales.iter().enumerate() {
            let a = square_term(x, s, big);
            if a > 0.0 {
                let t = i * stride;
                sums[t] += a;
                hit |= self.term_passes(t, sums[t]);
                if hit && stop {
                    return true;
                }
            }
        }
        hit
    }

    /// Index of the rectangle in `bigs` whose boundary is closest to `x`, as
    /// far as the circumscribed circles tell.
    pub fn nearest(x: Point, bigs: &[Rect]) -> Option<usize> {
        (0..bigs.len()).min_by(|&a, &b| {
            let ra = x.dist(bigs[a].center()) - bigs[a].radius();
            let rb = x.dist(bigs[b].center()) - bigs[b].radius();
            ra.total_cmp(&rb)
        })
    }

    /// Whether `x` lies in `{M_κ Σ 𝟏_big ≥ κ⁻¹}`. The nearest rectangle is
    /// tried alone first: a floating point sum of nonnegative terms is never
    /// below any of them, so if it passes by itself the full sum does too.
    pub fn reaches(&self, x: Point, bigs: &[Rect]) -> bool {
        let mut sums = vec![0.0; self.n_terms()];
        if let Some(k) = Self::nearest(x, bigs) {
            if self.accumulate(x, &bigs[k], &mut sums) {
                return true;
            }
            sums.iter_mut().for_each(|s| *s = 0.0);
        }
        bigs.iter().any(|b| self.accumulate(x, b, &mut sums))
    }

    /// `M_κ(Σ 𝟏_big)(x)` over the given dilated rectangles.
    pub fn value(&self, x: Point, bigs: &[Rect]) -> f64 {
        let mut sums = vec![0.0; self.n_terms()];
        for b in bigs {
            self.add(x, b, &mut sums, false);
        }
        sums.iter().zip(&self.norms).map(|(s, n)| s / n).fold(0.0, f64::max)
    }
}
