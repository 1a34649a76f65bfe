#![allow(non_snake_case)]

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect, RectId, UnitVec};
use crate::sampling::{lattice, Sampler};
use crate::vectorfield::{BBox, VectorField};

use super::family::{enumerate_eccentric, Enumeration, RectFamily};
use super::grid::{GridLayout, MaxField, ScalarField};

/// Mean of `f` over `r`, from a cell-centered lattice of at least 256 points
/// with spacing at most half the grid pitch.
pub fn rect_average(f: &ScalarField, r: &Rect) -> f64 {
    let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for c in r.corners() {
        lo = Point::new(lo.x.min(c.x), lo.y.min(c.y));
        hi = Point::new(hi.x.max(c.x), hi.y.max(c.y));
    }
    // Every sample would be exactly zero.
    if f.vanishes_on(lo, hi) {
        return 0.0;
    }
    let h = f.layout().pitch;
    let mut nu = ((2.0 * r.len() / h).ceil() as usize).max(1);
    let mut nw = ((2.0 * r.wid() / h).ceil() as usize).max(1);
    if nu * nw < 256 {
        let (a, b) = Sampler::lattice_dims(256, r.len() / r.wid());
        nu = nu.max(a);
        nw = nw.max(b);
    }
    let pts = lattice(nu, nw);
    let sum: f64 = pts.iter().map(|&(u, w)| f.sample(r.from_local(u * r.len(), w * r.wid()))).sum();
    sum / pts.len() as f64
}

/// Whether `(val, id)` beats the current entry: larger value, then smaller id.
#[inline]
fn beats(val: f64, id: RectId, cur_val: f64, cur: Option<RectId>) -> bool {
    match cur {
        None => true,
        Some(c) => val > cur_val || (val == cur_val && id < c),
    }
}

/// `x`-range, in node indices, that can hold points of `r` on the row at height `y`.
fn row_span(r: &Rect, y: f64, layout: &GridLayout) -> Option<(usize, usize)> {
    let e = r.dir().as_point();
    let c = r.center();
    let dy = y - c.y;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    // s = (x - cx)·ex + dy·ey,  t = -(x - cx)·ey + dy·ex
    for (coef, off, half) in [(e.x, dy * e.y, 0.5 * r.len()), (-e.y, dy * e.x, 0.5 * r.wid())] {
        if coef.abs() < 1e-9 {
            if off.abs() > half + 1e-9 * (1.0 + half) {
                return None;
            }
            continue;
        }
        let a = (-half - off) / coef;
        let b = (half - off) / coef;
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    if lo > hi {
        return None;
    }
    let h = layout.pitch;
    let i0 = ((c.x + lo - layout.origin.x) / h).floor() - 1.0;
    let i1 = ((c.x + hi - layout.origin.x) / h).ceil() + 1.0;
    if i1 < 0.0 || i0 > (layout.nx - 1) as f64 {
        return None;
    }
    Some((i0.max(0.0) as usize, i1.min((layout.nx - 1) as f64) as usize))
}

const BAND: usize = 16;

/// Pointwise supremum of the given averages over the rectangles containing each
/// node. Ties go to the smaller id; uncovered nodes get 0 and no witness.
pub fn paint(layout: &GridLayout, items: &[(Rect, f64)]) -> MaxField {
    let mut out = MaxField::zeros(*layout);
    let h = layout.pitch;
    let nbands = layout.ny.div_ceil(BAND);
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nbands];
    for (k, (r, _)) in items.iter().enumerate() {
        let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in r.corners() {
            ylo = ylo.min(p.y);
            yhi = yhi.max(p.y);
        }
        let j0 = ((ylo - layout.origin.y) / h).floor() - 1.0;
        let j1 = ((yhi - layout.origin.y) / h).ceil() + 1.0;
        if j1 < 0.0 || j0 > (layout.ny - 1) as f64 {
            continue;
        }
        let (j0, j1) = (j0.max(0.0) as usize, j1.min((layout.ny - 1) as f64) as usize);
        for b in (j0 / BAND)..=(j1 / BAND) {
            buckets[b].push(k);
        }
    }
    let nx = layout.nx;
    out.values
        .par_chunks_mut(nx * BAND)
        .zip(out.witness.par_chunks_mut(nx * BAND))
        .enumerate()
        .for_each(|(b, (vals, wits))| {
            for &k in &buckets[b] {
                let (r, avg) = &items[k];
                for row in 0..vals.len() / nx {
                    let j = b * BAND + row;
                    let y = layout.origin.y + j as f64 * h;
                    let Some((i0, i1)) = row_span(r, y, layout) else { continue };
                    for i in i0..=i1 {
                        let at = row * nx + i;
                        if r.contains_point(layout.point(i, j)) && beats(*avg, r.id, vals[at], wits[at]) {
                            vals[at] = *avg;
                            wits[at] = Some(r.id);
                        }
                    }
                }
            }
        });
    out
}

fn with_averages(f: &ScalarField, rects: &[Rect]) -> Vec<(Rect, f64)> {
    rects.par_iter().map(|r| (*r, rect_average(f, r))).collect()
}

/// `M_{v,δ} f` at the nodes of `layout`: the largest average of `f` over a
/// family member containing the node.
pub fn eval_M_v_delta(f: &ScalarField, fam: &RectFamily, layout: &GridLayout) -> Result<MaxField> {
    if fam.is_empty() {
        return Err(Error::Precondition("rectangle family is empty".into()));
    }
    Ok(paint(layout, &with_averages(f, fam.rects())))
}

/// The Kakeya operator over every enumerated rectangle with `wid/len ≥ eps`.
pub fn eval_M_K_eps(
    f: &ScalarField,
    eps: f64,
    e: &Enumeration,
    domain: &BBox,
    layout: &GridLayout,
) -> Result<MaxField> {
    let rects = enumerate_eccentric(e, domain, eps)?;
    Ok(paint(layout, &with_averages(f, &rects)))
}

/// Average of the zero-extended node values over the closed axis square of
/// side `side` centered at `x`, counting every lattice position it covers.
pub fn square_average(g: &ScalarField, x: Point, side: f64) -> f64 {
    let l = g.layout();
    let ax = (x.x - l.origin.x) / l.pitch;
    let ay = (x.y - l.origin.y) / l.pitch;
    let half = 0.5 * side / l.pitch;
    let i0 = (ax - half - 1e-9).ceil() as isize;
    let i1 = (ax + half + 1e-9).floor() as isize;
    let j0 = (ay - half - 1e-9).ceil() as isize;
    let j1 = (ay + half + 1e-9).floor() as isize;
    let count = ((i1 - i0 + 1).max(0) * (j1 - j0 + 1).max(0)) as f64;
    if count == 0.0 {
        return 0.0;
    }
    g.box_sum(i0, i1 + 1, j0, j1 + 1) / count
}

/// `(2s)⁻¹∫₋ₛˢ g(x + σω) dσ` by the midpoint rule with spacing at most a
/// quarter of the grid pitch.
pub fn segment_average(g: &ScalarField, x: Point, omega: Point, s: f64) -> f64 {
    let n = ((4.0 * s / g.layout().pitch).ceil() as usize).max(16);
    let step = 2.0 * s / n as f64;
    let sum: f64 = (0..n).map(|m| g.sample(x + omega * (-s + (m as f64 + 0.5) * step))).sum();
    sum / n as f64
}

/// The directions `2πk/κ`; antipodal pairs give equal segment averages, so
/// for even `κ` only the first half is kept.
pub fn kappa_directions(kappa: u32) -> Vec<Point> {
    let count = if kappa % 2 == 0 { kappa / 2 } else { kappa };
    (0..count).map(|k| UnitVec::from_angle(TAU * k as f64 / kappa as f64).as_point()).collect()
}

/// `M_κ g`: the largest square or `κ`-directional segment average over dyadic
/// scales from the grid pitch to the grid extent.
pub fn eval_M_kappa(g: &ScalarField, kappa: u32, layout: &GridLayout) -> Result<MaxField> {
    if kappa < 8 {
        return Err(Error::InvalidParam(format!("κ must be at least 8, got {kappa}")));
    }
    let l = g.layout();
    let extent = l.nx.max(l.ny) as f64 * l.pitch;
    let mut scales = Vec::new();
    let mut s = l.pitch;
    while s <= extent * (1.0 + 1e-12) {
        scales.push(s);
        s *= 2.0;
    }
    let dirs = kappa_directions(kappa);
    let mut out = MaxField::zeros(*layout);
    out.values.par_iter_mut().enumerate().for_each(|(k, val)| {
        let x = layout.point_at(k);
        let mut best: f64 = 0.0;
        for &s in &scales {
            best = best.max(square_average(g, x, s));
            for &w in &dirs {
                best = best.max(segment_average(g, x, w, s));
            }
        }
        *val = best;
    });
    Ok(out)
}

/// Zygmund's operator: the largest average of `f` over the segment through
/// `x` in direction `v(x)` with half-length a dyadic `t ∈ (pitch, ν]`.
pub fn eval_M_v(f: &ScalarField, v: &VectorField, layout: &GridLayout) -> Result<MaxField> {
    let cap = v.finite_length_cap()?;
    for p in [layout.origin, layout.max()] {
        if !v.domain().contains(p) {
            return Err(Error::OutsideDomain { x: p.x, y: p.y });
        }
    }
    let h = f.layout().pitch;
    let mut scales = Vec::new();
    let mut t = cap;
    while t > h {
        scales.push(t);
        t *= 0.5;
    }
    let mut out = MaxField::zeros(*layout);
    out.values.par_iter_mut().enumerate().for_each(|(k, val)| {
        let x = layout.point_at(k);
        let w = UnitVec::from_angle(v.angle_at(x)).as_point();
        *val = scales.iter().map(|&t| segment_average(f, x, w, t)).fold(0.0, f64::max);
    });
    Ok(out)
}
