use std::collections::HashSet;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{angle_gap, Point, Rect, RectId, UnitVec};
use crate::sampling::Sampler;
use crate::vectorfield::{density_unchecked, BBox, VectorField};

/// Parameters of the rectangle enumeration.
///
/// Lengths are `top·2⁻ʲ` for `j = 0..=j_max`, widths `L·2⁻ᵐ ≥ min_wid`,
/// orientations a uniform grid on the circle with pitch at most
/// `orient_factor·W/L`, and centers the multiples of `center_factor·W`
/// inside `region`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    /// Longest length; the field's length cap when absent.
    pub top_len: Option<f64>,
    pub j_max: u32,
    pub min_wid: f64,
    pub orient_factor: f64,
    pub center_factor: f64,
    /// Where centers are placed; the field domain when absent.
    pub region: Option<BBox>,
}

impl Default for Enumeration {
    fn default() -> Self {
        Enumeration { top_len: None, j_max: 3, min_wid: 0.0, orient_factor: 0.5, center_factor: 0.5, region: None }
    }
}

impl Enumeration {
    fn validate(&self) -> Result<()> {
        if !(self.orient_factor > 0.0) || !(self.center_factor > 0.0) {
            return Err(Error::InvalidParam("enumeration pitches must be positive".into()));
        }
        if !(self.min_wid >= 0.0) {
            return Err(Error::InvalidParam(format!("min_wid must be nonnegative, got {}", self.min_wid)));
        }
        if let Some(t) = self.top_len {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidParam(format!("top length must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// `(L, W)` pairs in enumeration order.
    fn shapes(&self, top: f64, min_ecc: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for j in 0..=self.j_max {
            let len = top * (-(j as f64)).exp2();
            let mut m = 0;
            loop {
                let wid = len * (-(m as f64)).exp2();
                if wid < self.min_wid * (1.0 - 1e-12) || wid / len < min_ecc * (1.0 - 1e-12) {
                    break;
                }
                out.push((len, wid));
                m += 1;
                if m > 60 {
                    break;
                }
            }
        }
        out
    }
}

/// One `(L, W)` block of the enumeration: a center grid times an orientation grid.
struct Block {
    len: f64,
    wid: f64,
    base: u64,
    n_orient: u64,
    step: f64,
    ix0: i64,
    iy0: i64,
    ncx: u64,
    ncy: u64,
}

impl Block {
    fn plan(shapes: &[(f64, f64)], e: &Enumeration, region: &BBox) -> Result<(Vec<Block>, u64)> {
        let mut base = 0u64;
        let mut blocks = Vec::with_capacity(shapes.len());
        for &(len, wid) in shapes {
            let n_orient = (TAU / (e.orient_factor * wid / len)).ceil() as u64;
            let step = e.center_factor * wid;
            let ix0 = (region.min.x / step).ceil() as i64;
            let ix1 = (region.max.x / step).floor() as i64;
            let iy0 = (region.min.y / step).ceil() as i64;
            let iy1 = (region.max.y / step).floor() as i64;
            let ncx = (ix1 - ix0 + 1).max(0) as u64;
            let ncy = (iy1 - iy0 + 1).max(0) as u64;
            blocks.push(Block { len, wid, base, n_orient, step, ix0, iy0, ncx, ncy });
            base = ncx
                .checked_mul(ncy)
                .and_then(|n| n.checked_mul(n_orient))
                .and_then(|n| n.checked_add(base))
                .ok_or_else(|| Error::InvalidParam("enumeration size overflows".into()))?;
        }
        if base > u32::MAX as u64 {
            return Err(Error::InvalidParam(format!("enumeration has {base} rectangles, more than ids allow")));
        }
        Ok((blocks, base))
    }

    fn orient_pitch(&self) -> f64 {
        TAU / self.n_orient as f64
    }

    fn center(&self, cx: u64, cy: u64) -> Point {
        Point::new((self.ix0 + cx as i64) as f64 * self.step, (self.iy0 + cy as i64) as f64 * self.step)
    }

    fn rect(&self, cx: u64, cy: u64, k: u64) -> Rect {
        let id = self.base + (cy * self.ncx + cx) * self.n_orient + k;
        let dir = UnitVec::from_angle(k as f64 * self.orient_pitch());
        Rect::new(RectId(id as u32), self.center(cx, cy), dir, self.len, self.wid).expect("enumerated shape is valid")
    }

    /// Orientation indices within `gap` of `theta`, ascending.
    fn orientations_near(&self, theta: f64, gap: f64) -> Vec<u64> {
        let p = self.orient_pitch();
        let span = (gap / p).ceil() as i64 + 1;
        let ks: Vec<u64> = if 2 * span + 1 >= self.n_orient as i64 {
            (0..self.n_orient).collect()
        } else {
            let kc = (theta.rem_euclid(TAU) / p).round() as i64;
            let mut ks: Vec<u64> =
                (-span..=span).map(|d| (kc + d).rem_euclid(self.n_orient as i64) as u64).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        };
        ks.into_iter().filter(|&k| angle_gap(k as f64 * p, theta) <= gap).collect()
    }
}

/// Every rectangle of an enumeration that can have positive density for `v`,
/// with its density. Families for any threshold are filtered from the pool.
#[derive(Clone, Debug)]
pub struct CandidatePool {
    rects: Vec<Rect>,
    densities: Vec<f64>,
    nu: f64,
    enumeration: Enumeration,
    enumerated: u64,
}

impl CandidatePool {
    /// Rectangles lying in the field domain whose direction is far from every
    /// field value on them are skipped: their density is exactly zero.
    pub fn build(v: &VectorField, e: &Enumeration, s: &Sampler) -> Result<Self> {
        e.validate()?;
        let cap = v.length_cap();
        let top = match e.top_len {
            Some(t) if t > cap * (1.0 + 1e-12) => return Err(Error::LengthCap { len: t, cap }),
            Some(t) => t,
            None => v.finite_length_cap()?,
        };
        let region = e.region.unwrap_or(*v.domain());
        let (blocks, enumerated) = Block::plan(&e.shapes(top, 0.0), e, &region)?;
        let domain = *v.domain();
        let mut rects = Vec::new();
        let mut densities = Vec::new();
        for b in &blocks {
            let unit = s.unit_points(&b.rect(0, 0, 0));
            let gap = 0.5 * b.wid / b.len + v.oscillation(0.5 * b.len.hypot(b.wid)) * (1.0 + 1e-9) + 1e-12;
            let rows: Vec<Vec<(Rect, f64)>> = (0..b.ncy)
                .into_par_iter()
                .map(|cy| {
                    let mut row = Vec::new();
                    for cx in 0..b.ncx {
                        let theta = v.angle_at(b.center(cx, cy));
                        for k in b.orientations_near(theta, gap) {
                            let r = b.rect(cx, cy, k);
                            if !domain.contains_rect(&r) {
                                continue;
                            }
                            let d = density_unchecked(&r, v, &unit);
                            if d > 0.0 {
                                row.push((r, d));
                            }
                        }
                    }
                    row
                })
                .collect();
            for (r, d) in rows.into_iter().flatten() {
                rects.push(r);
                densities.push(d);
            }
        }
        Ok(CandidatePool { rects, densities, nu: cap, enumeration: e.clone(), enumerated })
    }

    /// Size of the full enumeration, including rectangles never materialized.
    pub fn enumerated(&self) -> u64 {
        self.enumerated
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// Indices into the pool of the members with density at least `delta`.
    pub fn select(&self, delta: f64) -> Result<Vec<usize>> {
        check_delta(delta)?;
        Ok((0..self.rects.len()).filter(|&i| self.densities[i] >= delta).collect())
    }

    pub fn family(&self, delta: f64) -> Result<RectFamily> {
        let idx = self.select(delta)?;
        Ok(RectFamily {
            rects: idx.iter().map(|&i| self.rects[i]).collect(),
            densities: idx.iter().map(|&i| self.densities[i]).collect(),
            delta,
            nu: self.nu,
            provenance: Some(self.enumeration.clone()),
        })
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParam(format!("density threshold must lie in (0, 1], got {delta}")));
    }
    Ok(())
}

/// A finite admissible family: lengths at most `ν`, densities at least `δ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectFamily {
    rects: Vec<Rect>,
    densities: Vec<f64>,
    delta: f64,
    nu: f64,
    provenance: Option<Enumeration>,
}

impl RectFamily {
    /// Checks admissibility of given rectangles; fails on the first one that is
    /// too long, leaves the domain, or falls below the density threshold.
    pub fn from_rects(v: &VectorField, rects: Vec<Rect>, delta: f64, s: &Sampler) -> Result<Self> {
        check_delta(delta)?;
        let mut seen = HashSet::new();
        let mut densities = Vec::with_capacity(rects.len());
        for r in &rects {
            let r = Rect::new(r.id, r.center(), r.dir(), r.len(), r.wid())?;
            if !seen.insert(r.id) {
                return Err(Error::InvalidParam(format!("duplicate rectangle id {}", r.id)));
            }
            let d = crate::vectorfield::vset_density(&r, v, s)?;
            if d < delta {
                return Err(Error::Precondition(format!("rectangle {} has density {d} below {delta}", r.id)));
            }
            densities.push(d);
        }
        Ok(RectFamily { rects, densities, delta, nu: v.length_cap(), provenance: None })
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn provenance(&self) -> Option<&Enumeration> {
        self.provenance.as_ref()
    }

    pub fn len(&self) -> usize {
        self.rects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rects.is_empty()
    }

    pub fn get(&self, id: RectId) -> Option<&Rect> {
        self.rects.iter().find(|r| r.id == id)
    }
}

/// Enumerates rectangles with `δ`-density for `v`.
pub fn build_rect_family(v: &VectorField, delta: f64, e: &Enumeration, s: &Sampler) -> Result<RectFamily> {
    check_delta(delta)?;
    CandidatePool::build(v, e, s)?.family(delta)
}

/// Every enumerated rectangle inside `domain` with `wid/len ≥ eps`, with no field filter.
pub fn enumerate_eccentric(e: &Enumeration, domain: &BBox, eps: f64) -> Result<Vec<Rect>> {
    e.validate()?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParam(format!("eccentricity bound must lie in (0, 1], got {eps}")));
    }
    let top = e.top_len.ok_or(Error::UnboundedLength)?;
    let region = e.region.unwrap_or(*domain);
    let (blocks, _) = Block::plan(&e.shapes(top, eps), e, &region)?;
    let mut out = Vec::new();
    for b in &blocks {
        for cy in 0..b.ncy {
            for cx in 0..b.ncx {
                for k in 0..b.n_orient {
                    let r = b.rect(cx, cy, k);
                    if domain.contains_rect(&r) {
                        out.push(r);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorfield::FieldKind;

    fn unit_domain() -> BBox {
        BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap()
    }

    #[test]
    fn shapes_are_dyadic() {
        let e = Enumeration { j_max: 1, min_wid: 0.25, ..Enumeration::default() };
        assert_eq!(e.shapes(1.0, 0.0), vec![(1.0, 1.0), (1.0, 0.5), (1.0, 0.25), (0.5, 0.5), (0.5, 0.25)]);
        assert_eq!(e.shapes(1.0, 0.5), vec![(1.0, 1.0), (1.0, 0.5), (0.5, 0.5), (0.5, 0.25)]);
    }

    #[test]
    fn zero_threshold_is_rejected() {
        let v = VectorField::new(FieldKind::Constant { angle: 0.0 }, unit_domain()).unwrap().with_length_cap(0.5).unwrap();
        let e = Enumeration { j_max: 0, min_wid: 0.25, ..Enumeration::default() };
        assert!(build_rect_family(&v, 0.0, &e, &Sampler::default()).is_err());
        assert!(build_rect_family(&v, 1.5, &e, &Sampler::default()).is_err());
    }

    #[test]
    fn unbounded_constant_field_needs_a_cap() {
        let v = VectorField::new(FieldKind::Constant { angle: 0.0 }, unit_domain()).unwrap();
        let e = Enumeration { j_max: 0, min_wid: 0.25, ..Enumeration::default() };
        assert!(matches!(build_rect_family(&v, 0.5, &e, &Sampler::default()), Err(Error::UnboundedLength)));
    }

    #[test]
    fn constant_field_family_points_along_the_field() {
        let v = VectorField::new(FieldKind::Constant { angle: 0.3 }, unit_domain()).unwrap().with_length_cap(0.5).unwrap();
        let e = Enumeration { j_max: 1, min_wid: 0.0625, ..Enumeration::default() };
        let fam = build_rect_family(&v, 1.0, &e, &Sampler::default()).unwrap();
        assert!(!fam.is_empty());
        for r in fam.rects() {
            assert!(angle_gap(r.dir().angle(), 0.3) <= 0.5 * r.ex_len());
            assert!(unit_domain().contains_rect(r));
        }
        let brute = enumerate_eccentric(&e.clone_with_top(0.5), &unit_domain(), 1e-9).unwrap();
        let expect: Vec<RectId> = brute
            .iter()
            .filter(|r| angle_gap(r.dir().angle(), 0.3) <= 0.5 * r.ex_len())
            .map(|r| r.id)
            .collect();
        assert_eq!(fam.rects().iter().map(|r| r.id).collect::<Vec<_>>(), expect);
    }

    impl Enumeration {
        fn clone_with_top(&self, top: f64) -> Enumeration {
            Enumeration { top_len: Some(top), ..self.clone() }
        }
    }
}
