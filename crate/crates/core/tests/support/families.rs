#![allow(dead_code)]

use kakeya_core::geometry::{Point, Rect, RectId, UnitVec};
use kakeya_core::maximal::RectFamily;
use kakeya_core::sampling::Sampler;
use kakeya_core::vectorfield::{vset_density, BBox, FieldKind, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn field() -> VectorField {
    let d = BBox::new(Point::new(0.0, 0.0), Point::new(0.4, 0.4)).unwrap();
    VectorField::new(FieldKind::Sinusoidal { amp: 0.2, freq: 1.0, phase: 0.5, offset: 0.7 }, d).unwrap()
}

/// `n` admissible rectangles clustered around a few hubs, pointing roughly
/// along the field.
pub fn clustered(v: &VectorField, n: usize, delta: f64, seed: u64) -> RectFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = v.nu();
    let d = *v.domain();
    let hubs: Vec<Point> = (0..4)
        .map(|_| Point::new(d.min.x + rng.gen_range(0.3..0.7) * d.width(), d.min.y + rng.gen_range(0.3..0.7) * d.height()))
        .collect();
    let s = Sampler::default();
    let mut rects = Vec::new();
    while rects.len() < n {
        let len = nu * (-(rng.gen_range(0..4) as f64)).exp2();
        let wid = len * (-(rng.gen_range(1..6) as f64)).exp2();
        let hub = hubs[rng.gen_range(0..hubs.len())];
        let c = hub + Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (2.0 * nu);
        let jitter = rng.gen_range(-1.0..1.0) * wid / len;
        let dir = UnitVec::from_angle(v.angle_at(c) + jitter);
        let Ok(r) = Rect::new(RectId(rects.len() as u32), c, dir, len, wid) else { continue };
        if matches!(vset_density(&r, v, &s), Ok(dd) if dd >= delta) {
            rects.push(r);
        }
    }
    RectFamily::from_rects(v, rects, delta, &s).unwrap()
}

/// `n` admissible rectangles much smaller than the domain, in many small
/// clusters, so that the selection keeps several of them.
pub fn scattered(v: &VectorField, n: usize, delta: f64, seed: u64) -> RectFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nu = v.nu();
    let d = *v.domain();
    let hubs: Vec<Point> = (0..24)
        .map(|_| Point::new(d.min.x + rng.gen_range(0.05..0.95) * d.width(), d.min.y + rng.gen_range(0.05..0.95) * d.height()))
        .collect();
    let s = Sampler::default();
    let mut rects = Vec::new();
    while rects.len() < n {
        let len = nu * (-(rng.gen_range(7..10) as f64)).exp2();
        let wid = len * (-(rng.gen_range(1..6) as f64)).exp2();
        let hub = hubs[rng.gen_range(0..hubs.len())];
        let c = hub + Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (4.0 * len);
        let jitter = rng.gen_range(-1.0..1.0) * wid / len;
        let dir = UnitVec::from_angle(v.angle_at(c) + jitter);
        let Ok(r) = Rect::new(RectId(rects.len() as u32), c, dir, len, wid) else { continue };
        if matches!(vset_density(&r, v, &s), Ok(dd) if dd >= delta) {
            rects.push(r);
        }
    }
    RectFamily::from_rects(v, rects, delta, &s).unwrap()
}
