//! Unit vector fields given by angle maps, and the density sets `V(R)`.
//!
//! A field assigns to each point `x` of its domain the direction with angle
//! `θ(x)`. Since `|v(x) - v(y)|` in arc length is at most `|θ(x) - θ(y)|`,
//! the Lipschitz constant of `θ` bounds that of `v`.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_gap, Interval, Point, Rect, Segment, UnitVec};
use crate::sampling::{lattice, Sampler};

/// The constant in `ν = (100·‖v‖_Lip)⁻¹`.
pub const NU_FACTOR: f64 = 100.0;

/// Number of coarsening cells per half of a projection segment.
pub const COARSEN_CELLS_PER_HALF: u32 = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y) {
            return Err(Error::InvalidParam(format!("empty box {min:?}..{max:?}")));
        }
        Ok(BBox { min, max })
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn contains_rect(&self, r: &Rect) -> bool {
        r.corners().iter().all(|&c| self.contains(c))
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.min.x + self.max.x), 0.5 * (self.min.y + self.max.y))
    }

    /// Grown by `m` on every side.
    pub fn expand(&self, m: f64) -> BBox {
        BBox { min: Point::new(self.min.x - m, self.min.y - m), max: Point::new(self.max.x + m, self.max.y + m) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldKind {
    /// `θ ≡ angle`.
    Constant { angle: f64 },
    /// `θ(x) = offset + rate·x₁`.
    LinearAngle { rate: f64, offset: f64 },
    /// `θ(x) = offset + amp·sin(freq·x₁ + phase)`.
    Sinusoidal { amp: f64, freq: f64, phase: f64, offset: f64 },
    /// Lacunary triangle-wave sum `θ(x) = Σ_{k<terms} amp·2^{-kα}·tri(2^k·x₁/period)`,
    /// Hölder of order `α`.
    Holder { alpha: f64, amp: f64, period: f64, terms: u32 },
    /// Sum of the parts' angle maps.
    Composite { parts: Vec<FieldKind> },
}

/// Triangle wave with period 1, range `[0, 1]` and slopes `±2`.
#[inline]
fn tri(t: f64) -> f64 {
    2.0 * (t - t.round()).abs()
}

impl FieldKind {
    fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam(format!("field parameter {name} must be finite")))
            }
        };
        match self {
            FieldKind::Constant { angle } => finite("angle", *angle),
            FieldKind::LinearAngle { rate, offset } => {
                finite("rate", *rate)?;
                finite("offset", *offset)
            }
            FieldKind::Sinusoidal { amp, freq, phase, offset } => {
                finite("amp", *amp)?;
                finite("freq", *freq)?;
                finite("phase", *phase)?;
                finite("offset", *offset)
            }
            FieldKind::Holder { alpha, amp, period, terms } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(Error::InvalidParam(format!("Hölder exponent must lie in (0, 1], got {alpha}")));
                }
                finite("amp", *amp)?;
                if !(*period > 0.0) || !period.is_finite() {
                    return Err(Error::InvalidParam(format!("period must be positive, got {period}")));
                }
                if *terms == 0 || *terms > 60 {
                    return Err(Error::InvalidParam(format!("terms must lie in 1..=60, got {terms}")));
                }
                Ok(())
            }
            FieldKind::Composite { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidParam("composite field needs at least one part".into()));
                }
                parts.iter().try_for_each(FieldKind::validate)
            }
        }
    }

    #[inline]
    fn angle_at(&self, p: Point) -> f64 {
        match self {
            FieldKind::Constant { angle } => *angle,
            FieldKind::LinearAngle { rate, offset } => offset + rate * p.x,
            FieldKind::Sinusoidal { amp, freq, phase, offset } => offset + amp * (freq * p.x + phase).sin(),
            FieldKind::Holder { alpha, amp, period, terms } => {
                let t = p.x / period;
                let mut acc = 0.0;
                let mut scale = 1.0;
                for k in 0..*terms {
                    acc += amp * (-(k as f64) * alpha).exp2() * tri(scale * t);
                    scale *= 2.0;
                }
                acc
            }
            FieldKind::Composite { parts } => parts.iter().map(|f| f.angle_at(p)).sum(),
        }
    }

    /// A finite Lipschitz bound for the angle map as actually evaluated.
    fn variation_bound(&self) -> f64 {
        match self {
            FieldKind::Constant { .. } => 0.0,
            FieldKind::LinearAngle { rate, .. } => rate.abs(),
            FieldKind::Sinusoidal { amp, freq, .. } => (amp * freq).abs(),
            FieldKind::Holder { alpha, amp, period, terms } => (0..*terms)
                .map(|k| amp.abs() * ((k as f64) * (1.0 - alpha)).exp2() * 2.0 / period)
                .sum(),
            FieldKind::Composite { parts } => parts.iter().map(FieldKind::variation_bound).sum(),
        }
    }

    /// Bound on `|θ(p) - θ(q)|` for `|p - q| ≤ d`.
    fn oscillation(&self, d: f64) -> f64 {
        match self {
            FieldKind::Constant { .. } => 0.0,
            FieldKind::LinearAngle { rate, .. } => rate.abs() * d,
            FieldKind::Sinusoidal { amp, freq, .. } => (2.0 * amp.abs()).min((amp * freq).abs() * d),
            FieldKind::Holder { alpha, amp, period, terms } => (0..*terms)
                .map(|k| {
                    let a = amp.abs() * (-(k as f64) * alpha).exp2();
                    a * (2.0 * (k as f64).exp2() * d / period).min(1.0)
                })
                .sum(),
            FieldKind::Composite { parts } => parts.iter().map(|f| f.oscillation(d)).sum(),
        }
    }

    fn declared_lip(&self) -> f64 {
        match self {
            FieldKind::Holder { alpha, .. } if *alpha < 1.0 => f64::INFINITY,
            FieldKind::Composite { parts } => parts.iter().map(FieldKind::declared_lip).sum(),
            other => other.variation_bound(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    kind: FieldKind,
    domain: BBox,
    cap: Option<f64>,
}

impl VectorField {
    pub fn new(kind: FieldKind, domain: BBox) -> Result<Self> {
        kind.validate()?;
        Ok(VectorField { kind, domain, cap: None })
    }

    /// Restricts admissible rectangles to length at most `cap`.
    ///
    /// For Lipschitz fields the cap may only tighten `ν`. Fields declared
    /// non-Lipschitz have `ν = 0` and are usable only with an explicit cap.
    pub fn with_length_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) || !cap.is_finite() {
            return Err(Error::InvalidParam(format!("length cap must be positive, got {cap}")));
        }
        if self.is_lipschitz() && cap > self.nu() {
            return Err(Error::InvalidParam(format!("cap {cap} exceeds ν = {}", self.nu())));
        }
        self.cap = Some(cap);
        Ok(self)
    }

    pub fn kind(&self) -> &FieldKind {
        &self.kind
    }

    pub fn domain(&self) -> &BBox {
        &self.domain
    }

    /// Declared Lipschitz constant; `+∞` for Hölder fields of order below one.
    pub fn lip(&self) -> f64 {
        self.kind.declared_lip()
    }

    pub fn is_lipschitz(&self) -> bool {
        self.lip().is_finite()
    }

    /// Finite bound on the variation of the angle map actually evaluated.
    pub fn variation_bound(&self) -> f64 {
        self.kind.variation_bound()
    }

    /// Bound on the angle difference between points at distance at most `d`.
    pub fn oscillation(&self, d: f64) -> f64 {
        self.kind.oscillation(d)
    }

    /// `ν = (100·‖v‖_Lip)⁻¹`, the largest admissible rectangle length.
    pub fn nu(&self) -> f64 {
        let lip = self.lip();
        if lip == 0.0 {
            f64::INFINITY
        } else {
            1.0 / (NU_FACTOR * lip)
        }
    }

    /// Effective length cap: the explicit cap if set, else `ν`.
    pub fn length_cap(&self) -> f64 {
        self.cap.unwrap_or_else(|| self.nu())
    }

    pub fn finite_length_cap(&self) -> Result<f64> {
        let cap = self.length_cap();
        if cap.is_finite() && cap > 0.0 {
            Ok(cap)
        } else {
            Err(Error::UnboundedLength)
        }
    }

    pub fn eval(&self, p: Point) -> Result<UnitVec> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
        Ok(UnitVec::from_angle(self.kind.angle_at(p)))
    }

    /// Raw angle `θ(p)`, without the domain check.
    #[inline]
    pub fn angle_at(&self, p: Point) -> f64 {
        self.kind.angle_at(p)
    }

    pub fn check_admissible(&self, r: &Rect) -> Result<()> {
        let cap = self.length_cap();
        if r.len() > cap * (1.0 + 1e-12) {
            return Err(Error::LengthCap { len: r.len(), cap });
        }
        for c in r.corners() {
            if !self.domain.contains(c) {
                return Err(Error::OutsideDomain { x: c.x, y: c.y });
            }
        }
        Ok(())
    }

    /// Whether `v(p)` lies in the interval of uncertainty of `r`.
    #[inline]
    pub fn points_into_ex(&self, r: &Rect, p: Point) -> bool {
        angle_gap(self.kind.angle_at(p), r.dir().angle()) <= 0.5 * r.ex_len().min(TAU)
    }
}

/// Largest sampled difference quotient `dist(v(x), v(y)) / |x - y|` over `trials`
/// pairs in `region`, with separations log-uniform in `[max_sep/10, max_sep]`.
pub fn estimate_lipschitz(v: &VectorField, region: &BBox, trials: usize, max_sep: f64, seed: u64) -> Result<f64> {
    if trials < 1000 {
        return Err(Error::InvalidParam(format!("need at least 1000 trials, got {trials}")));
    }
    if !(max_sep > 0.0) {
        return Err(Error::InvalidParam(format!("pair separation must be positive, got {max_sep}")));
    }
    if !v.domain().contains(region.min) || !v.domain().contains(region.max) {
        return Err(Error::Precondition("sampling region must lie in the field domain".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    let mut done = 0;
    let mut attempts = 0usize;
    while done < trials && attempts < trials * 20 {
        attempts += 1;
        let x = Point::new(
            region.min.x + rng.gen::<f64>() * region.width(),
            region.min.y + rng.gen::<f64>() * region.height(),
        );
        let r = max_sep * 10f64.powf(-rng.gen::<f64>());
        let phi = rng.gen::<f64>() * TAU;
        let y = x + Point::new(phi.cos(), phi.sin()) * r;
        if !region.contains(y) {
            continue;
        }
        let sep = x.dist(y);
        if sep == 0.0 {
            continue;
        }
        best = best.max(angle_gap(v.angle_at(x), v.angle_at(y)) / sep);
        done += 1;
    }
    Ok(best)
}

/// Estimated `|V(R)| / |R|`, the fraction of `R` where `v` points into `EX(R)`.
pub fn vset_density(r: &Rect, v: &VectorField, s: &Sampler) -> Result<f64> {
    v.check_admissible(r)?;
    Ok(density_unchecked(r, v, &s.unit_points(r)))
}

pub(crate) fn density_unchecked(r: &Rect, v: &VectorField, unit: &[(f64, f64)]) -> f64 {
    let hit = unit
        .iter()
        .filter(|&&(u, w)| v.points_into_ex(r, r.from_local(u * r.len(), w * r.wid())))
        .count();
    hit as f64 / unit.len() as f64
}

/// A union of closed intervals on a uniform cell grid along a segment.
///
/// Cells are `[origin + k·pitch, origin + (k+1)·pitch]`; runs are half-open
/// index ranges, sorted and pairwise separated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSet {
    pub origin: f64,
    pub pitch: f64,
    pub ncells: u32,
    runs: Vec<(u32, u32)>,
}

impl CellSet {
    pub fn empty(origin: f64, pitch: f64, ncells: u32) -> Self {
        CellSet { origin, pitch, ncells, runs: Vec::new() }
    }

    /// The grid used for projections onto `s`.
    pub fn grid_for(s: &Segment) -> Self {
        let pitch = s.halfwidth / COARSEN_CELLS_PER_HALF as f64;
        Self::empty(-s.halfwidth, pitch, 2 * COARSEN_CELLS_PER_HALF)
    }

    /// Coarsens a union of exact intervals: components are merged first, then
    /// their endpoints are rounded to the nearest cell boundary.
    pub fn from_intervals(mut ivs: Vec<Interval>, origin: f64, pitch: f64, ncells: u32) -> Self {
        ivs.retain(|i| !i.is_empty());
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut merged: Vec<Interval> = Vec::new();
        for i in ivs {
            match merged.last_mut() {
                Some(last) if i.lo <= last.hi => last.hi = last.hi.max(i.hi),
                _ => merged.push(i),
            }
        }
        let to_cell = |x: f64| ((x - origin) / pitch).round().clamp(0.0, ncells as f64) as u32;
        let mut runs: Vec<(u32, u32)> = Vec::new();
        for i in merged {
            let (a, b) = (to_cell(i.lo), to_cell(i.hi));
            if b <= a {
                continue;
            }
            match runs.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => runs.push((a, b)),
            }
        }
        CellSet { origin, pitch, ncells, runs }
    }

    pub fn runs(&self) -> &[(u32, u32)] {
        &self.runs
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn cell_count(&self) -> u32 {
        self.runs.iter().map(|&(a, b)| b - a).sum()
    }

    pub fn total_len(&self) -> f64 {
        self.cell_count() as f64 * self.pitch
    }

    pub fn intervals(&self) -> Vec<Interval> {
        self.runs
            .iter()
            .map(|&(a, b)| Interval::new(self.origin + a as f64 * self.pitch, self.origin + b as f64 * self.pitch))
            .collect()
    }

    /// Whether the closed unions share a point. Both sets must share a grid.
    pub fn intersects(&self, other: &CellSet) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.runs.len() && j < other.runs.len() {
            let (a0, a1) = self.runs[i];
            let (b0, b1) = other.runs[j];
            if a0 <= b1 && b0 <= a1 {
                return true;
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        false
    }
}

/// The projection `𝖵_R` of `V(R)` onto `S`, coarsened to pitch `S.halfwidth/2048`.
///
/// `V(R)` is resolved on a lattice shaped like `R` with the sampler's budget;
/// every lattice cell whose center lies in `V(R)` contributes its projection.
pub fn vset_projection(r: &Rect, seg: &Segment, v: &VectorField, s: &Sampler) -> Result<CellSet> {
    v.check_admissible(r)?;
    let grid = CellSet::grid_for(seg);
    let (nu, nw) = Sampler::lattice_dims(s.budget(r), r.len() / r.wid());
    let e = r.dir().as_point();
    let d = seg.dir.as_point();
    let cos = e.dot(d).abs();
    let sin = e.cross(d).abs();
    let half = 0.5 * (r.len() / nu as f64 * cos + r.wid() / nw as f64 * sin);
    let extent = seg.extent();
    let mut ivs = Vec::new();
    for (u, w) in lattice(nu, nw) {
        let p = r.from_local(u * r.len(), w * r.wid());
        if v.points_into_ex(r, p) {
            let c = seg.coord(p);
            if let Some(i) = Interval::new(c - half, c + half).intersect(&extent) {
                ivs.push(i);
            }
        }
    }
    Ok(CellSet::from_intervals(ivs, grid.origin, grid.pitch, grid.ncells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project_onto_segment, RectId};
    use crate::sampling::Strategy;
    use std::f64::consts::FRAC_PI_2;

    fn domain() -> BBox {
        BBox::new(Point::new(-10.0, -10.0), Point::new(10.0, 10.0)).unwrap()
    }

    fn field(kind: FieldKind) -> VectorField {
        VectorField::new(kind, domain()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let c = field(FieldKind::Constant { angle: 0.7 });
        assert_eq!(c.eval(Point::new(3.0, -2.0)).unwrap().angle(), 0.7);
        let lin = field(FieldKind::LinearAngle { rate: 2.5, offset: 0.0 });
        assert_eq!(lin.eval(Point::new(0.0, 4.0)).unwrap().angle(), 0.0);
        let sin = field(FieldKind::Sinusoidal { amp: 0.3, freq: 1.0, phase: 0.0, offset: 0.0 });
        assert!((sin.eval(Point::new(FRAC_PI_2, 1.0)).unwrap().angle() - 0.3).abs() < 1e-15);
        assert!(matches!(c.eval(Point::new(11.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn declared_constants() {
        let sin = field(FieldKind::Sinusoidal { amp: 0.5, freq: 2.0, phase: 0.0, offset: 0.0 });
        assert_eq!(sin.lip(), 1.0);
        assert_eq!(sin.nu(), 0.01);
        let hol = field(FieldKind::Holder { alpha: 0.5, amp: 0.1, period: 1.0, terms: 8 });
        assert_eq!(hol.lip(), f64::INFINITY);
        assert_eq!(hol.nu(), 0.0);
        assert!(hol.variation_bound().is_finite());
        let one = field(FieldKind::Holder { alpha: 1.0, amp: 0.1, period: 1.0, terms: 1 });
        assert!((one.lip() - 0.2).abs() < 1e-15);
        assert_eq!(field(FieldKind::Constant { angle: 0.0 }).nu(), f64::INFINITY);
        assert!(sin.clone().with_length_cap(0.02).is_err());
        assert!(sin.with_length_cap(0.005).is_ok());
        assert!(hol.with_length_cap(0.05).is_ok());
    }

    #[test]
    fn lipschitz_estimates() {
        let region = BBox::new(Point::new(-1.0, -1.0), Point::new(1.0, 1.0)).unwrap();
        let c = field(FieldKind::Constant { angle: 1.0 });
        assert_eq!(estimate_lipschitz(&c, &region, 1000, 0.1, 1).unwrap(), 0.0);
        let lin = field(FieldKind::LinearAngle { rate: 3.0, offset: 0.0 });
        let est = estimate_lipschitz(&lin, &region, 100_000, 0.1, 2).unwrap();
        assert!(est <= 3.0 * (1.0 + 1e-6));
        assert!(est >= 3.0 * 0.98, "estimate {est}");
        assert!(estimate_lipschitz(&lin, &region, 999, 0.1, 2).is_err());
    }

    #[test]
    fn oscillation_bounds_angle_differences() {
        use rand::{Rng, SeedableRng};
        let kinds = [
            FieldKind::Constant { angle: 0.4 },
            FieldKind::LinearAngle { rate: -3.0, offset: 1.0 },
            FieldKind::Sinusoidal { amp: 0.3, freq: 7.0, phase: 0.2, offset: 0.0 },
            FieldKind::Holder { alpha: 0.5, amp: 0.4, period: 0.3, terms: 12 },
            FieldKind::Composite {
                parts: vec![
                    FieldKind::Holder { alpha: 0.3, amp: 0.1, period: 1.0, terms: 6 },
                    FieldKind::LinearAngle { rate: 1.0, offset: 0.0 },
                ],
            },
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for kind in kinds {
            let v = field(kind);
            for _ in 0..20_000 {
                let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                let d = (10.0f64).powf(rng.gen_range(-5.0..0.0));
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                let q = p + Point::new(a.cos(), a.sin()) * (d * rng.gen_range(0.0..1.0));
                let diff = (v.angle_at(p) - v.angle_at(q)).abs();
                assert!(diff <= v.oscillation(d) + 1e-12, "{:?}: {diff} > {}", v.kind(), v.oscillation(d));
            }
            assert!(v.oscillation(1e-3) <= v.variation_bound() * 1e-3 + 1e-15);
        }
    }

    #[test]
    fn holder_estimate_grows_under_refinement() {
        let region = BBox::new(Point::new(-1.0, -1.0), Point::new(1.0, 1.0)).unwrap();
        let hol = field(FieldKind::Holder { alpha: 0.5, amp: 0.2, period: 1.0, terms: 40 });
        let coarse = estimate_lipschitz(&hol, &region, 20_000, 1e-3, 3).unwrap();
        let fine = estimate_lipschitz(&hol, &region, 20_000, 1e-4, 3).unwrap();
        assert!(fine >= 2.0 * coarse, "coarse {coarse} fine {fine}");
    }

    fn rect(cx: f64, cy: f64, ang: f64, len: f64, wid: f64) -> Rect {
        Rect::new(RectId(0), Point::new(cx, cy), UnitVec::from_angle(ang), len, wid).unwrap()
    }

    #[test]
    fn density_of_constant_fields() {
        let s = Sampler::default();
        let c = field(FieldKind::Constant { angle: 0.02 });
        assert_eq!(vset_density(&rect(0.0, 0.0, 0.0, 1.0, 0.1), &c, &s).unwrap(), 1.0);
        assert_eq!(vset_density(&rect(0.0, 0.0, 0.5, 1.0, 0.1), &c, &s).unwrap(), 0.0);
    }

    #[test]
    fn density_rejects_long_rectangles() {
        let s = Sampler::default();
        let lin = field(FieldKind::LinearAngle { rate: 1.0, offset: 0.0 });
        let r = rect(0.0, 0.0, 0.0, 0.02, 0.001);
        assert!(matches!(vset_density(&r, &lin, &s), Err(Error::LengthCap { .. })));
        let out = rect(9.999, 0.0, 0.0, 0.01, 0.001);
        assert!(matches!(vset_density(&out, &lin, &s), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn density_against_refined_sampler() {
        // EX half-width 0.05; θ sweeps [0.045, 0.055] along R.
        let lin = field(FieldKind::LinearAngle { rate: 0.002, offset: 0.05 });
        let r = rect(0.0, 0.0, 0.0, 5.0, 0.5);
        let coarse = vset_density(&r, &lin, &Sampler::default()).unwrap();
        let fine = vset_density(&r, &lin, &Sampler::default().with_refinement(10.0).unwrap()).unwrap();
        assert!((coarse - fine).abs() <= 0.05, "coarse {coarse} fine {fine}");
        assert!((fine - 0.5).abs() < 0.01);
    }

    #[test]
    fn projection_of_full_density_rectangle() {
        let host = rect(0.0, 0.0, 0.0, 4.0, 0.05);
        let seg = Segment::for_host(&host);
        let c = field(FieldKind::Constant { angle: 0.0 });
        let r = rect(0.5, 0.0, 0.0, 1.0, 0.05);
        let vs = vset_projection(&r, &seg, &c, &Sampler::default()).unwrap();
        let ir = project_onto_segment(&r, &seg).unwrap();
        assert_eq!(vs.runs().len(), 1);
        assert!((vs.total_len() - ir.len()).abs() <= vs.pitch);
        let off = rect(0.5, 0.0, 1.0, 1.0, 0.05);
        assert!(vset_projection(&off, &seg, &c, &Sampler::default()).unwrap().is_empty());
    }

    #[test]
    fn projection_of_half_density_rectangle() {
        // θ = 0.05 + 0.01·x₁ enters EX = [-0.05, 0.05] exactly on x₁ ≤ 0.
        let lin = field(FieldKind::LinearAngle { rate: 0.01, offset: 0.05 });
        let host = rect(0.0, 0.0, 0.0, 1.0, 0.1);
        let seg = Segment::for_host(&host);
        let r = rect(0.0, 0.0, 0.0, 1.0, 0.1);
        let ir = project_onto_segment(&r, &seg).unwrap();
        let coarse = vset_projection(&r, &seg, &lin, &Sampler::default()).unwrap();
        let fine = vset_projection(&r, &seg, &lin, &Sampler::default().with_refinement(10.0).unwrap()).unwrap();
        assert!((coarse.total_len() - fine.total_len()).abs() <= 0.1 * fine.total_len());
        assert!((fine.total_len() - 0.5 * ir.len()).abs() <= 0.1 * 0.5 * ir.len());
    }

    #[test]
    fn density_is_reproducible() {
        let sin = field(FieldKind::Sinusoidal { amp: 1.0, freq: 1.0, phase: 0.0, offset: 0.0 });
        let r = rect(0.3, 0.2, 0.3, 0.01, 0.001);
        let s = Sampler::new(Strategy::QuasiRandom, 99);
        let a = vset_density(&r, &sin, &s).unwrap();
        let b = vset_density(&r, &sin, &s).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn cellset_merging_and_overlap() {
        let a = CellSet::from_intervals(
            vec![Interval::new(0.1, 0.9), Interval::new(0.8, 2.2), Interval::new(5.0, 6.0)],
            0.0,
            1.0,
            10,
        );
        assert_eq!(a.runs(), &[(0, 2), (5, 6)]);
        let b = CellSet::from_intervals(vec![Interval::new(2.0, 3.0)], 0.0, 1.0, 10);
        let c = CellSet::from_intervals(vec![Interval::new(3.0, 4.0)], 0.0, 1.0, 10);
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
        assert_eq!(a.total_len(), 3.0);
    }
}
