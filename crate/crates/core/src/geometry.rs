//! Planar geometry for oriented rectangles.
//!
//! Everything here is a pure function on small `Copy` values. Rectangles are
//! closed sets; convex clipping uses a fixed collinearity epsilon and reports
//! slivers below [`AREA_FLOOR`] as empty.

use std::cmp::Ordering;
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use arrayvec::ArrayVec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Collinearity tolerance for clipping, in plane units.
pub const CLIP_EPS: f64 = 1e-12;
/// Intersection areas below this are reported as zero.
pub const AREA_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, c: f64) -> Point {
        Point::new(self.x * c, self.y * c)
    }
}

impl Neg for Point {
    type Output = Point;
    #[inline]
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// A direction on the unit circle, stored by its angle in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "f64", try_from = "f64")]
pub struct UnitVec {
    angle: f64,
}

impl UnitVec {
    pub fn from_angle(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        UnitVec { angle: a }
    }

    /// Direction of a nonzero vector.
    pub fn from_vector(x: f64, y: f64) -> Option<Self> {
        if x == 0.0 && y == 0.0 || !x.is_finite() || !y.is_finite() {
            return None;
        }
        Some(Self::from_angle(y.atan2(x)))
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.angle
    }

    #[inline]
    pub fn as_point(self) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(c, s)
    }

    /// The direction rotated by π/2.
    pub fn perp(self) -> UnitVec {
        Self::from_angle(self.angle + FRAC_PI_2)
    }

    pub fn rotated(self, by: f64) -> UnitVec {
        Self::from_angle(self.angle + by)
    }
}

impl From<UnitVec> for f64 {
    fn from(u: UnitVec) -> f64 {
        u.angle
    }
}

impl TryFrom<f64> for UnitVec {
    type Error = String;
    fn try_from(a: f64) -> std::result::Result<Self, String> {
        if a.is_finite() {
            Ok(UnitVec::from_angle(a))
        } else {
            Err(format!("non-finite angle {a}"))
        }
    }
}

/// Geodesic distance on the circle between two raw angles, in `[0, π]`.
#[inline]
pub fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Arc-length distance between two directions, in `[0, π]`.
#[inline]
pub fn angle_dist(a: UnitVec, b: UnitVec) -> f64 {
    angle_gap(a.angle, b.angle)
}

/// A closed arc of the unit circle, symmetric about its center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    center: UnitVec,
    length: f64,
}

impl Arc {
    pub fn new(center: UnitVec, length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParam(format!("arc length must be positive, got {length}")));
        }
        Ok(Arc { center, length: length.min(TAU) })
    }

    pub fn center(&self) -> UnitVec {
        self.center
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn is_full(&self) -> bool {
        self.length >= TAU
    }

    pub fn contains(&self, u: UnitVec) -> bool {
        self.contains_angle(u.angle)
    }

    #[inline]
    pub fn contains_angle(&self, a: f64) -> bool {
        self.is_full() || angle_gap(self.center.angle, a) <= 0.5 * self.length
    }

    /// Same center, length scaled by `c` and capped at 2π.
    pub fn dilate(&self, c: f64) -> Result<Arc> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParam(format!("dilation factor must be positive, got {c}")));
        }
        Arc::new(self.center, self.length * c)
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains_arc(&self, other: &Arc) -> bool {
        if self.is_full() {
            return true;
        }
        if other.is_full() {
            return false;
        }
        angle_dist(self.center, other.center) + 0.5 * other.length <= 0.5 * self.length
    }

    /// Gap between the two arcs; zero when they overlap.
    pub fn distance(&self, other: &Arc) -> f64 {
        (angle_dist(self.center, other.center) - 0.5 * (self.length + other.length)).max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RectId(pub u32);

impl fmt::Display for RectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An oriented rectangle `I × J` in the frame `(dir, dir⊥)`, with `|I| = len ≥ |J| = wid`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub id: RectId,
    center: Point,
    dir: UnitVec,
    len: f64,
    wid: f64,
}

impl Rect {
    pub fn new(id: RectId, center: Point, dir: UnitVec, len: f64, wid: f64) -> Result<Self> {
        if !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::InvalidRect(format!("non-finite center {center:?}")));
        }
        if !(wid > 0.0) || !len.is_finite() || wid > len {
            return Err(Error::InvalidRect(format!("need 0 < wid <= len, got len={len} wid={wid}")));
        }
        Ok(Rect { id, center, dir, len, wid })
    }

    pub fn with_id(mut self, id: RectId) -> Rect {
        self.id = id;
        self
    }

    #[inline]
    pub fn center(&self) -> Point {
        self.center
    }

    #[inline]
    pub fn dir(&self) -> UnitVec {
        self.dir
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.len
    }

    #[inline]
    pub fn wid(&self) -> f64 {
        self.wid
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.len * self.wid
    }

    /// Length of the interval of uncertainty, `wid / len`.
    #[inline]
    pub fn ex_len(&self) -> f64 {
        self.wid / self.len
    }

    pub fn ex_interval(&self) -> Arc {
        Arc { center: self.dir, length: self.ex_len().min(TAU) }
    }

    pub fn dilate(&self, c: f64) -> Result<Rect> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParam(format!("dilation factor must be positive, got {c}")));
        }
        Rect::new(self.id, self.center, self.dir, self.len * c, self.wid * c)
    }

    /// Radius of the circumscribed circle.
    #[inline]
    pub fn radius(&self) -> f64 {
        0.5 * self.len.hypot(self.wid)
    }

    /// Coordinates of `p - center` in the frame `(dir, dir⊥)`.
    #[inline]
    pub fn local(&self, p: Point) -> (f64, f64) {
        let e = self.dir.as_point();
        let d = p - self.center;
        (d.dot(e), e.cross(d))
    }

    /// The point with frame coordinates `(s, t)`.
    #[inline]
    pub fn from_local(&self, s: f64, t: f64) -> Point {
        let e = self.dir.as_point();
        let n = Point::new(-e.y, e.x);
        self.center + e * s + n * t
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let (s, t) = self.local(p);
        let tol = 1e-12 * (self.len + self.center.x.abs().max(self.center.y.abs()));
        s.abs() <= 0.5 * self.len + tol && t.abs() <= 0.5 * self.wid + tol
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        oriented_box(self.center, self.dir, 0.5 * self.len, 0.5 * self.wid)
    }

    fn order_key(&self) -> [f64; 5] {
        [self.center.x, self.center.y, self.dir.angle, self.len, self.wid]
    }
}

/// Corners (counter-clockwise) of the box centered at `center` with half-extents
/// `along` in direction `dir` and `across` in `dir⊥`.
pub fn oriented_box(center: Point, dir: UnitVec, along: f64, across: f64) -> [Point; 4] {
    let e = dir.as_point() * along;
    let n = Point::new(-dir.as_point().y, dir.as_point().x) * across;
    [center - e - n, center + e - n, center + e + n, center - e + n]
}

/// Axis-aligned square of side `side` centered at `center`, counter-clockwise.
pub fn axis_square(center: Point, side: f64) -> [Point; 4] {
    let h = 0.5 * side;
    [
        Point::new(center.x - h, center.y - h),
        Point::new(center.x + h, center.y - h),
        Point::new(center.x + h, center.y + h),
        Point::new(center.x - h, center.y + h),
    ]
}

pub type Poly = ArrayVec<Point, 16>;

/// Sutherland–Hodgman clip of a convex `subject` by a convex counter-clockwise `clip`.
pub fn convex_clip(subject: &[Point], clip: &[Point]) -> Poly {
    let mut out: Poly = subject.iter().copied().collect();
    let mut buf = Poly::new();
    for k in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let a = clip[k];
        let b = clip[(k + 1) % clip.len()];
        let edge = b - a;
        let elen = edge.norm();
        if elen == 0.0 {
            continue;
        }
        let u = edge * (1.0 / elen);
        buf.clear();
        let n = out.len();
        for i in 0..n {
            let p = out[i];
            let q = out[(i + 1) % n];
            let dp = u.cross(p - a);
            let dq = u.cross(q - a);
            let p_in = dp >= -CLIP_EPS;
            let q_in = dq >= -CLIP_EPS;
            if p_in {
                push_point(&mut buf, p);
            }
            if p_in != q_in {
                let t = dp / (dp - dq);
                push_point(&mut buf, p + (q - p) * t);
            }
        }
        std::mem::swap(&mut out, &mut buf);
    }
    if out.len() < 3 {
        out.clear();
    }
    out
}

fn push_point(poly: &mut Poly, p: Point) {
    if poly.len() < poly.capacity() {
        poly.push(p);
    }
}

/// Unsigned shoelace area.
pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        acc += poly[i].cross(poly[(i + 1) % n]);
    }
    0.5 * acc.abs()
}

/// Area of the intersection of two convex quadrilaterals.
pub fn quad_intersection_area(a: &[Point; 4], b: &[Point; 4]) -> f64 {
    let area = polygon_area(&convex_clip(a, b));
    if area < AREA_FLOOR {
        0.0
    } else {
        area.min(polygon_area(a)).min(polygon_area(b))
    }
}

/// Area of `R1 ∩ R2`. Exactly symmetric in its arguments.
pub fn intersection_area(r1: &Rect, r2: &Rect) -> f64 {
    if r1.center.dist(r2.center) > r1.radius() + r2.radius() {
        return 0.0;
    }
    let (a, b) = match r1.order_key().partial_cmp(&r2.order_key()) {
        Some(Ordering::Greater) => (r2, r1),
        _ => (r1, r2),
    };
    let area = polygon_area(&convex_clip(&a.corners(), &b.corners()));
    if area < AREA_FLOOR {
        0.0
    } else {
        area.min(r1.area()).min(r2.area())
    }
}

fn project_span(corners: &[Point; 4], axis: Point) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in corners {
        let v = c.dot(axis);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

/// Whether two closed convex quadrilaterals share a point (separating-axis test).
pub fn quads_intersect(a: &[Point; 4], b: &[Point; 4]) -> bool {
    for poly in [a, b] {
        for k in 0..2 {
            let edge = poly[k + 1] - poly[k];
            let axis = Point::new(-edge.y, edge.x);
            let n = axis.norm();
            if n == 0.0 {
                continue;
            }
            let axis = axis * (1.0 / n);
            let (alo, ahi) = project_span(a, axis);
            let (blo, bhi) = project_span(b, axis);
            if ahi < blo - CLIP_EPS || bhi < alo - CLIP_EPS {
                return false;
            }
        }
    }
    true
}

/// Whether the closed rectangles share a point.
pub fn rects_intersect(r1: &Rect, r2: &Rect) -> bool {
    if r1.center.dist(r2.center) > r1.radius() + r2.radius() + CLIP_EPS {
        return false;
    }
    quads_intersect(&r1.corners(), &r2.corners())
}

/// Parameter range `σ` for which `x + σ·ω` lies in the closed rectangle.
pub fn line_span(x: Point, omega: Point, r: &Rect) -> Option<(f64, f64)> {
    let d = x - r.center;
    if omega.cross(d).abs() > r.radius() + CLIP_EPS {
        return None;
    }
    let e = r.dir.as_point();
    let s0 = d.dot(e);
    let t0 = e.cross(d);
    let ds = omega.dot(e);
    let dt = e.cross(omega);
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (p0, dp, h) in [(s0, ds, 0.5 * r.len), (t0, dt, 0.5 * r.wid)] {
        if dp.abs() < 1e-300 {
            if p0.abs() > h {
                return None;
            }
            continue;
        }
        let a = (-h - p0) / dp;
        let b = (h - p0) / dp;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        lo = lo.max(a);
        hi = hi.min(b);
    }
    if lo <= hi {
        Some((lo, hi))
    } else {
        None
    }
}

/// A closed 1-D interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    #[inline]
    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_empty(&self) -> bool {
        self.hi < self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    /// Dilation by `c` about the midpoint.
    pub fn dilate(&self, c: f64) -> Interval {
        let m = self.mid();
        let h = 0.5 * c * (self.hi - self.lo);
        Interval { lo: m - h, hi: m + h }
    }
}

/// The segment `origin + σ·dir`, `σ ∈ [-halfwidth, halfwidth]`, onto which rectangles
/// are projected orthogonally.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub origin: Point,
    pub dir: UnitVec,
    pub halfwidth: f64,
}

impl Segment {
    pub fn new(origin: Point, dir: UnitVec, halfwidth: f64) -> Result<Self> {
        if !(halfwidth > 0.0) || !halfwidth.is_finite() {
            return Err(Error::InvalidParam(format!("segment half-width must be positive, got {halfwidth}")));
        }
        Ok(Segment { origin, dir, halfwidth })
    }

    /// The segment `2I_ρ × {α}` for a host rectangle `ρ = I_ρ × J`, where `α` is the
    /// lower endpoint of `J`. Its arclength coordinate is centered on `ρ`.
    pub fn for_host(rho: &Rect) -> Segment {
        let origin = rho.from_local(0.0, -0.5 * rho.wid);
        Segment { origin, dir: rho.dir, halfwidth: rho.len }
    }

    #[inline]
    pub fn coord(&self, p: Point) -> f64 {
        (p - self.origin).dot(self.dir.as_point())
    }

    pub fn extent(&self) -> Interval {
        Interval::new(-self.halfwidth, self.halfwidth)
    }

    /// Corners of the box `I × J` standing on the segment, `J = [0, height]` across.
    pub fn slab(&self, i: &Interval, height: f64) -> [Point; 4] {
        let e = self.dir.as_point();
        let n = Point::new(-e.y, e.x);
        let c = self.origin + e * i.mid() + n * (0.5 * height);
        oriented_box(c, self.dir, 0.5 * i.len(), 0.5 * height)
    }
}

/// The orthogonal projection of `r` onto `s`, clipped to the segment.
pub fn project_onto_segment(r: &Rect, s: &Segment) -> Option<Interval> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in r.corners() {
        let v = s.coord(c);
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Interval::new(lo, hi).intersect(&s.extent())
}

/// Tests the eccentricity inclusion: when `r ∩ rp ≠ ∅`, `L(r) ≥ L(rp)`, `W(r) ≥ W(rp)`,
/// `|EX(r)| ≤ |EX(rp)|` and `EX(r) ⊂ 10·EX(rp)`, every corner of `rp` must lie in `κ·r`.
/// Returns true when the hypotheses fail.
pub fn inclusion_holds(r: &Rect, rp: &Rect, kappa: f64) -> bool {
    if !inclusion_hypotheses(r, rp) {
        return true;
    }
    match r.dilate(kappa) {
        Ok(big) => rp.corners().iter().all(|&c| big.contains_point(c)),
        Err(_) => false,
    }
}

pub fn inclusion_hypotheses(r: &Rect, rp: &Rect) -> bool {
    if r.len() < rp.len() || r.wid() < rp.wid() || r.ex_len() > rp.ex_len() {
        return false;
    }
    let ten = Arc { center: rp.dir, length: (10.0 * rp.ex_len()).min(TAU) };
    ten.contains_arc(&r.ex_interval()) && rects_intersect(r, rp)
}

/// Smallest angle between the long axes, ignoring orientation, in `[0, π/2]`.
pub fn axis_angle(a: UnitVec, b: UnitVec) -> f64 {
    let d = angle_dist(a, b);
    d.min(PI - d)
}
