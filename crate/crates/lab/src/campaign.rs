//! Randomized covering campaigns.

use std::collections::BTreeMap;

use kakeya_core::covering::{analyze, containment_points, select_covering, EstimateReport, KappaOperator};
use kakeya_core::geometry::{Point, Rect, RectId, UnitVec};
use kakeya_core::maximal::RectFamily;
use kakeya_core::sampling::Sampler;
use kakeya_core::vectorfield::{vset_density, BBox, FieldKind, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// Estimates whose ratio is an empirical constant, checked for stability.
pub const EMPIRICAL: [&str; 5] = ["uni1", "uni2", "uni3", "2<1", "bigcup"];

/// A family together with the field it is admissible for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    pub field: FieldKind,
    pub domain: BBox,
    pub cap: Option<f64>,
    pub delta: f64,
    pub rects: Vec<Rect>,
}

impl FamilyFile {
    /// Rebuilds the field and the family, recomputing every density.
    pub fn open(&self, s: &Sampler) -> kakeya_core::Result<(VectorField, RectFamily)> {
        let v = VectorField::new(self.field.clone(), self.domain)?;
        let v = match self.cap {
            Some(c) => v.with_length_cap(c)?,
            None => v,
        };
        let fam = RectFamily::from_rects(&v, self.rects.clone(), self.delta, s)?;
        Ok((v, fam))
    }
}

/// A random admissible family: a sinusoidal field on the unit square and
/// about `n` rectangles, `n/2 ≤ size ≤ n`, each with density at least
/// `delta`. Most sit in small clusters pointing along the field; the clusters
/// are far apart compared to the rectangles so the selection keeps several.
/// The rest are probe pairs placed on the edge of the region the `κ`-dilates
/// absorb, see [`probe_pairs`].
pub fn random_family(
    rng: &mut ChaCha8Rng,
    n: usize,
    delta: f64,
    kappa: u32,
    s: &Sampler,
) -> kakeya_core::Result<FamilyFile> {
    let amp = rng.gen_range(0.1..0.3);
    let freq = rng.gen_range(30.0..100.0);
    let field = FieldKind::Sinusoidal { amp, freq, phase: rng.gen_range(0.0..6.3), offset: rng.gen_range(0.0..6.3) };
    let domain = BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0))?;
    let v = VectorField::new(field.clone(), domain)?;
    let nu = v.finite_length_cap()?;
    let target = rng.gen_range(n.div_ceil(2)..=n);
    let pairs = (target / 8).min(12);
    let hub_target = target - 2 * pairs;
    let hubs: Vec<Point> = (0..32).map(|_| Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9))).collect();
    let mut rects = Vec::with_capacity(target);
    let mut attempts = 0;
    while rects.len() < hub_target && attempts < 50 * hub_target {
        attempts += 1;
        let len = nu * (-(rng.gen_range(2..6) as f64)).exp2();
        let wid = len * (-(rng.gen_range(3..7) as f64)).exp2();
        let hub = hubs[rng.gen_range(0..hubs.len())];
        let c = hub + Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (4.0 * len);
        let dir = UnitVec::from_angle(v.angle_at(c) + rng.gen_range(-1.0..1.0) * wid / len);
        let Ok(r) = Rect::new(RectId(rects.len() as u32), c, dir, len, wid) else { continue };
        if !domain.contains_rect(&r) {
            continue;
        }
        if vset_density(&r, &v, s)? >= delta {
            rects.push(r);
        }
    }
    if !rects.is_empty() {
        probe_pairs(rng, &v, &mut rects, pairs, delta, kappa, s)?;
    }
    Ok(FamilyFile { field, domain, cap: None, delta, rects })
}

/// Appends up to `count` pairs `(h, R)`: `h` fat (aspect 2 or 4), `R` thin
/// (aspect 32 or 64) and up to four times shorter, overlapping the end of `h`
/// and pointing along the field. Each pair straddles the boundary of `{M_κ Σ 𝟏_{κR'} ≥ κ⁻¹}` for
/// the rectangles `R'` the cluster part selects, so that `h` tends to be
/// discarded while `R` is kept. Since `EX(h) ⊄ 10·EX(R)` such a pair feeds
/// the host decompositions, which clusters alone almost never do at large `κ`.
///
/// Every `R` has width `ν·2⁻¹²`, below any cluster width, so the scales of
/// `M_κ` on the final family equal those used here to locate the boundary.
fn probe_pairs(
    rng: &mut ChaCha8Rng,
    v: &VectorField,
    rects: &mut Vec<Rect>,
    count: usize,
    delta: f64,
    kappa: u32,
    s: &Sampler,
) -> kakeya_core::Result<()> {
    let domain = *v.domain();
    let nu = v.finite_length_cap()?;
    let w0 = nu * (-12f64).exp2();
    let mut shape = rects.clone();
    shape.push(Rect::new(RectId(u32::MAX), rects[0].center(), rects[0].dir(), 32.0 * w0, w0)?);
    let op = KappaOperator::for_family(&shape, kappa)?;
    let fam = RectFamily::from_rects(v, rects.clone(), delta, s)?;
    let cr = select_covering(&fam, kappa)?;
    let bigs: Vec<Rect> = fam
        .rects()
        .iter()
        .filter(|r| cr.selected.contains(&r.id))
        .map(|r| r.dilate(kappa as f64))
        .collect::<kakeya_core::Result<_>>()?;
    let absorbed = |x: Point| op.reaches(x, &bigs);
    let mut placed = 0;
    let mut attempts = 0;
    while placed < count && attempts < 20 * count {
        attempts += 1;
        // Shapes with `EX(h) ⊄ 10·EX(R)`, i.e. aspect(R) > 10·aspect(h).
        let (aspect_r, aspect_h) = loop {
            let ar = [32.0, 64.0][rng.gen_range(0..2)];
            let ah = [2.0, 4.0][rng.gen_range(0..2)];
            if ar > 10.0 * ah {
                break (ar, ah);
            }
        };
        let len_r = aspect_r * w0;
        let len_h = len_r * (rng.gen_range(0..3) as f64).exp2();
        let inside = rng.gen_range(0.1..0.9);
        // Off either end of a selected rectangle, where the boundary runs
        // across the field.
        let anchor = bigs[rng.gen_range(0..bigs.len())];
        let c = anchor.center();
        let flip = if rng.gen() { std::f64::consts::PI } else { 0.0 };
        let u = anchor.dir().rotated(flip + rng.gen_range(-0.3..0.3)).as_point();
        // Bracket the boundary along the ray, then bisect.
        let (mut lo, mut hi) = (0.0, len_h);
        while absorbed(c + u * hi) {
            lo = hi;
            hi *= 2.0;
            if !domain.contains(c + u * hi) {
                break;
            }
        }
        if absorbed(c + u * hi) {
            continue;
        }
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if absorbed(c + u * mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let edge = c + u * lo;
        let mut e = UnitVec::from_angle(v.angle_at(edge)).as_point();
        if e.dot(u) < 0.0 {
            e = e * -1.0;
        }
        // Slide the pair inward until `h` is absorbed, giving up once `R` is too.
        let id = rects.len() as u32;
        let outward = |q: &Rect| {
            // Farthest points first: they decide either test soonest.
            let mut pts = containment_points(q);
            pts.sort_by(|a, b| b.dist(c).total_cmp(&a.dist(c)));
            pts
        };
        let mut found = None;
        for k in 0..24 {
            let end = edge - e * (k as f64 * len_r / 12.0);
            let hc = end - e * (0.5 * len_h);
            let rc = end + e * ((0.5 - inside) * len_r);
            let (Ok(h), Ok(r)) = (
                Rect::new(RectId(id), hc, UnitVec::from_angle(v.angle_at(hc)), len_h, len_h / aspect_h),
                Rect::new(RectId(id + 1), rc, UnitVec::from_angle(v.angle_at(rc)), len_r, w0),
            ) else {
                break;
            };
            if !(domain.contains_rect(&h) && domain.contains_rect(&r)) {
                continue;
            }
            if outward(&r).into_iter().all(absorbed) {
                break;
            }
            if outward(&h).into_iter().all(absorbed) {
                found = Some((h, r));
                break;
            }
        }
        let Some((h, r)) = found else { continue };
        if vset_density(&h, v, s)? >= delta && vset_density(&r, v, s)? >= delta {
            rects.push(h);
            rects.push(r);
            placed += 1;
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceResult {
    pub seed_index: usize,
    pub instance: usize,
    pub rects: usize,
    pub selected: usize,
    pub discarded: usize,
    pub pairs: usize,
    pub hosts: usize,
    pub groups: usize,
    pub intervals: usize,
    pub reports: Vec<EstimateReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateSummary {
    pub name: String,
    pub bound: String,
    pub explicit: bool,
    pub max_ratio: f64,
    pub max_measured: f64,
    pub max_slack: f64,
    pub instances: usize,
    pub violations: usize,
    /// Largest ratio per seed.
    pub per_seed_max: Vec<f64>,
    /// Max over median of `per_seed_max`; 1 when every value is 0, absent
    /// when the median is 0 but the max is not.
    pub max_over_median: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bundle {
    pub seed: u64,
    pub seeds: usize,
    pub instances_per_seed: usize,
    pub max_rects: usize,
    pub delta: f64,
    pub kappa: u32,
    pub instances: Vec<InstanceResult>,
    pub summary: Vec<EstimateSummary>,
    pub failed_instances: usize,
}

impl Bundle {
    pub fn estimate(&self, name: &str) -> Option<&EstimateSummary> {
        self.summary.iter().find(|s| s.name == name)
    }

    /// Violations of estimates with explicit constants, over all instances.
    pub fn explicit_violations(&self) -> usize {
        self.summary.iter().filter(|s| s.explicit).map(|s| s.violations).sum()
    }

    pub fn summary_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["estimate", "bound", "explicit", "max_ratio", "max_slack", "instances", "violations", "max_over_median"])
            .unwrap();
        for s in &self.summary {
            w.write_record([
                s.name.clone(),
                s.bound.clone(),
                s.explicit.to_string(),
                s.max_ratio.to_string(),
                s.max_slack.to_string(),
                s.instances.to_string(),
                s.violations.to_string(),
                s.max_over_median.map(|x| x.to_string()).unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn stability(per_seed: &[f64]) -> Option<f64> {
    let max = per_seed.iter().copied().fold(0.0, f64::max);
    let med = median(per_seed);
    match (max == 0.0, med == 0.0) {
        (true, _) => Some(1.0),
        (false, true) => None,
        (false, false) => Some(max / med),
    }
}

fn run_instance(cfg: &ExperimentConfig, seed_index: usize, instance: usize) -> InstanceResult {
    let mut out = InstanceResult {
        seed_index,
        instance,
        rects: 0,
        selected: 0,
        discarded: 0,
        pairs: 0,
        hosts: 0,
        groups: 0,
        intervals: 0,
        reports: Vec::new(),
        error: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream((seed_index * cfg.instances + instance) as u64);
    let result = random_family(&mut rng, cfg.max_rects, cfg.campaign_delta, cfg.kappa, &cfg.sampler)
        .and_then(|ff| ff.open(&cfg.sampler))
        .and_then(|(v, fam)| {
            out.rects = fam.len();
            analyze(&fam, &v, cfg.kappa, &cfg.sampler)
        });
    match result {
        Ok(a) => {
            out.selected = a.covering.selected.len();
            out.discarded = a.covering.discarded.len();
            out.pairs = a.covering.pairs.len();
            out.hosts = a.decompositions.len();
            out.groups = a.decompositions.iter().map(|d| d.groups.len()).sum();
            out.intervals = a.decompositions.iter().flat_map(|d| &d.groups).map(|g| g.intervals.len()).sum();
            out.reports = a.reports;
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

/// `cfg.seeds × cfg.instances` instances; instance `(s, i)` draws from
/// stream `s·instances + i` of the generator seeded with `cfg.seed`.
pub fn run_campaign(cfg: &ExperimentConfig) -> Bundle {
    let jobs: Vec<(usize, usize)> = (0..cfg.seeds).flat_map(|s| (0..cfg.instances).map(move |i| (s, i))).collect();
    let instances: Vec<InstanceResult> = jobs.par_iter().map(|&(s, i)| run_instance(cfg, s, i)).collect();

    let mut merged: BTreeMap<String, (EstimateReport, Vec<f64>)> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for inst in &instances {
        for r in &inst.reports {
            let entry = merged.entry(r.name.clone()).or_insert_with(|| {
                order.push(r.name.clone());
                let mut empty = r.clone();
                empty.measured = 0.0;
                empty.ratio = 0.0;
                empty.instances = 0;
                empty.violations = 0;
                empty.slack = 0.0;
                (empty, vec![0.0; cfg.seeds])
            });
            entry.0.merge(r);
            let m = &mut entry.1[inst.seed_index];
            *m = m.max(r.ratio);
        }
    }
    let summary = order
        .iter()
        .map(|name| {
            let (r, per_seed) = &merged[name];
            EstimateSummary {
                name: name.clone(),
                bound: r.bound.clone(),
                explicit: r.explicit,
                max_ratio: r.ratio,
                max_measured: r.measured,
                max_slack: r.slack,
                instances: r.instances,
                violations: r.violations,
                max_over_median: stability(per_seed),
                per_seed_max: per_seed.clone(),
            }
        })
        .collect();
    Bundle {
        seed: cfg.seed,
        seeds: cfg.seeds,
        instances_per_seed: cfg.instances,
        max_rects: cfg.max_rects,
        delta: cfg.campaign_delta,
        kappa: cfg.kappa,
        failed_instances: instances.iter().filter(|i| i.error.is_some()).count(),
        instances,
        summary,
    }
}
