use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{angle_dist, intersection_area, Interval, Point, Rect, RectId};
use crate::maximal::RectFamily;

use super::pairs::index;
use super::select::{containment_points, CoveringResult};
use super::udecomp::{dyadic, finest_level, UDecomposition};

/// Largest observed value of one estimate over a set of instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    /// Largest left-hand side observed.
    pub measured: f64,
    /// The right-hand side the ratio is taken against.
    pub bound: String,
    /// Largest `measured / reference` observed.
    pub ratio: f64,
    pub instances: usize,
    /// Instances whose ratio exceeds `1 + slack`.
    pub violations: usize,
    /// Largest slack allowed for any instance.
    pub slack: f64,
    /// Whether the bound carries an explicit constant. Otherwise the ratio is
    /// an empirical constant and nothing counts as a violation.
    pub explicit: bool,
}

impl EstimateReport {
    pub fn new(name: &str, bound: &str) -> Self {
        EstimateReport {
            name: name.into(),
            measured: 0.0,
            bound: bound.into(),
            ratio: 0.0,
            instances: 0,
            violations: 0,
            slack: 0.0,
            explicit: true,
        }
    }

    /// A report for a `≲` estimate, tracking only the empirical constant.
    pub fn empirical(name: &str, bound: &str) -> Self {
        EstimateReport { explicit: false, ..Self::new(name, bound) }
    }

    /// Records one instance `measured ≤ reference·(1 + slack)`.
    pub fn record(&mut self, measured: f64, reference: f64, slack: f64) {
        let ratio = if measured == 0.0 { 0.0 } else { measured / reference };
        self.instances += 1;
        self.measured = self.measured.max(measured);
        self.ratio = self.ratio.max(ratio);
        self.slack = self.slack.max(slack);
        if self.explicit && ratio > 1.0 + slack {
            self.violations += 1;
        }
    }

    /// Records one instance of a count that must be zero.
    pub fn record_count(&mut self, count: usize) {
        self.instances += 1;
        self.measured = self.measured.max(count as f64);
        self.ratio = self.ratio.max(count as f64);
        self.violations += count;
    }

    /// Combines reports of the same estimate.
    pub fn merge(&mut self, other: &EstimateReport) {
        self.measured = self.measured.max(other.measured);
        self.ratio = self.ratio.max(other.ratio);
        self.instances += other.instances;
        self.violations += other.violations;
        self.slack = self.slack.max(other.slack);
    }
}

/// For each `R′ ∈ 𝒰(R)`: `angle(e_R′, e_R) ≤ ½·angle(e_ρ, e_R) + 2·pitch/L(ρ)`.
pub fn check_lemma_samedirection(ud: &UDecomposition) -> EstimateReport {
    let mut rep = EstimateReport::new("samedirection", "angle(R', R) <= angle(rho, R) / 2");
    let slack = 2.0 * ud.pitch() / ud.rho.len();
    for g in &ud.groups {
        let r = ud.rect(g.rep);
        let half = 0.5 * angle_dist(ud.rho.dir(), r.dir());
        for &id in &g.members {
            let d = angle_dist(ud.rect(id).dir(), r.dir());
            rep.instances += 1;
            rep.measured = rep.measured.max(d);
            rep.slack = rep.slack.max(slack);
            let ratio = if d == 0.0 { 0.0 } else { d / (half + slack) };
            rep.ratio = rep.ratio.max(ratio);
            if d > half + slack {
                rep.violations += 1;
            }
        }
    }
    rep
}

fn members<'a>(ud: &'a UDecomposition, rep: RectId) -> Vec<&'a Rect> {
    ud.groups
        .iter()
        .find(|g| g.rep == rep)
        .map(|g| g.members.iter().map(|&id| ud.rect(id)).collect())
        .unwrap_or_default()
}

/// For dyadic `I ⊂ I_ρ` with `Σ_{R′ ∈ 𝒰(R), L(R′) ≥ 8|I|} |R′ ∩ I×J| ≥ |I×J|`,
/// counts the `R″ ∈ 𝒰(R)` with `L(R″) < |I|` meeting `4I×J`.
pub fn check_lemma_geo(ud: &UDecomposition, rep: RectId) -> EstimateReport {
    let mut out = EstimateReport::new("geo", "no short member meets 4I x J");
    let mem = members(ud, rep);
    let host = ud.host_interval();
    let kmax = finest_level(&host, ud.pitch());
    let wr = ud.rho.wid();
    for k in 0..=kmax {
        let w = host.len() / (1u64 << k) as f64;
        if !mem.iter().any(|r| r.len() >= 8.0 * w) || !mem.iter().any(|r| r.len() < w) {
            continue;
        }
        for i in dyadic(&host, k) {
            let long: Vec<&Rect> = mem.iter().copied().filter(|r| r.len() >= 8.0 * w).collect();
            let sum: f64 = long.iter().filter(|r| ud.shadow(r).overlaps(&i)).map(|r| ud.slab_area(r, &i)).sum();
            if sum < i.len() * wr {
                continue;
            }
            let wide = i.dilate(4.0);
            let bad = mem.iter().filter(|r| r.len() < w && ud.shadow(r).overlaps(&wide) && ud.slab_meets(r, &wide));
            out.record_count(bad.count());
        }
    }
    out
}

/// For dyadic `I ⊂ I_R`: `Σ_{R′ ∈ 𝒰(R), L(R′) ≤ |I| ≤ √κ·L(R′)} |R′ ∩ I×J| ≤ 5·|I|·W(ρ)`,
/// with slack `2·pitch/|I|`.
pub fn check_lemma_stromberg(ud: &UDecomposition, rep: RectId, kappa: u32) -> EstimateReport {
    let mut out = EstimateReport::new("stromberg", "5 |I| W(rho)");
    let mem = members(ud, rep);
    let Some(base) = ud.projections[ud.position(rep).unwrap()] else { return out };
    let sk = (kappa as f64).sqrt();
    let kmax = finest_level(&base, ud.pitch());
    for k in 0..=kmax {
        let w = base.len() / (1u64 << k) as f64;
        let window: Vec<&Rect> = mem.iter().copied().filter(|r| r.len() <= w && w <= sk * r.len()).collect();
        if window.is_empty() {
            continue;
        }
        for i in dyadic(&base, k) {
            let sum: f64 = window.iter().filter(|r| ud.shadow(r).overlaps(&i)).map(|r| ud.slab_area(r, &i)).sum();
            out.record(sum, 5.0 * i.len() * ud.rho.wid(), 2.0 * ud.pitch() / i.len());
        }
    }
    out
}

/// Triples of intervals in `ℐ` with a common point, intervals taken half-open.
pub fn triple_overlaps(intervals: &[Interval]) -> usize {
    let n = intervals.len();
    let mut count = 0;
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let lo = intervals[a].lo.max(intervals[b].lo).max(intervals[c].lo);
                let hi = intervals[a].hi.min(intervals[b].hi).min(intervals[c].hi);
                if lo < hi {
                    count += 1;
                }
            }
        }
    }
    count
}

/// Pairs in `ℐ` whose doubles meet but whose lengths are within a factor `√κ`.
pub fn gap_violations(intervals: &[Interval], kappa: u32) -> usize {
    let sk = (kappa as f64).sqrt();
    let mut count = 0;
    for a in 0..intervals.len() {
        for b in a + 1..intervals.len() {
            let (i, j) = (&intervals[a], &intervals[b]);
            if !i.dilate(2.0).overlaps(&j.dilate(2.0)) {
                continue;
            }
            let (short, long) = if i.len() <= j.len() { (i, j) } else { (j, i) };
            if sk * short.len() >= long.len() {
                count += 1;
            }
        }
    }
    count
}

/// `|∪ rects|`, as `Σ_R |R|·mean_{x ∈ lattice(R)} 1/N(x)` with `N(x)` the
/// number of rectangles containing `x`.
pub fn union_area(rects: &[Rect]) -> f64 {
    if rects.is_empty() {
        return 0.0;
    }
    let mut diams: Vec<f64> = rects.iter().map(|r| 2.0 * r.radius()).collect();
    diams.sort_by(f64::total_cmp);
    let cell = diams[diams.len() / 2];
    let key = |p: Point| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (k, r) in rects.iter().enumerate() {
        let c = r.center();
        let rad = r.radius();
        let (x0, y0) = key(Point::new(c.x - rad, c.y - rad));
        let (x1, y1) = key(Point::new(c.x + rad, c.y + rad));
        for bx in x0..=x1 {
            for by in y0..=y1 {
                buckets.entry((bx, by)).or_default().push(k);
            }
        }
    }
    rects
        .iter()
        .map(|r| {
            let pts = containment_points(r);
            let inv: f64 = pts
                .iter()
                .map(|&x| {
                    let n = buckets[&key(x)].iter().filter(|&&k| rects[k].contains_point(x)).count().max(1);
                    1.0 / n as f64
                })
                .sum();
            r.area() * inv / pts.len() as f64
        })
        .sum()
}

/// Runs every estimate and lemma check over one covering and its host
/// decompositions. Hosts need not be selected rectangles.
pub fn verify_estimates(
    cr: &CoveringResult,
    uds: &[UDecomposition],
    fam: &RectFamily,
) -> Result<Vec<EstimateReport>> {
    let delta = fam.delta();
    let sel = index(fam, &cr.selected)?;
    let dis = index(fam, &cr.discarded)?;
    let by_id: HashMap<RectId, &Rect> = fam.rects().iter().map(|r| (r.id, r)).collect();

    let mut uni1 = EstimateReport::empirical("uni1", "|R|");
    for r in &sel {
        let sum: f64 = cr.s_r.get(&r.id).map_or(0.0, |rhos| rhos.iter().map(|id| intersection_area(r, by_id[id])).sum());
        uni1.record(sum, r.area(), 0.0);
    }

    let mut uni2 = EstimateReport::empirical("uni2", "|rho| / delta");
    let mut uni3 = EstimateReport::empirical("uni3", "L(R) W(rho)");
    let mut u = EstimateReport::empirical("U", "L(rho) / delta");
    let mut v = EstimateReport::new("V", "20 |I| W(rho)");
    let mut b_upper = EstimateReport::empirical("B-upper", "2 L(R)");
    let mut b_lower = EstimateReport::empirical("B-lower", "|I_R|");
    let mut b_density = EstimateReport::empirical("B-density", "|V_R|");
    let mut same = EstimateReport::new("samedirection", "angle(R', R) <= angle(rho, R) / 2");
    let mut geo = EstimateReport::new("geo", "no short member meets 4I x J");
    let mut strom = EstimateReport::new("stromberg", "5 |I| W(rho)");
    let mut triple = EstimateReport::new("interval-triples", "0");
    let mut gap = EstimateReport::new("interval-gap", "0");
    let mut singletons = EstimateReport::new("empty-vset-groups", "0");
    for ud in uds {
        let rho = &ud.rho;
        let area = |id: &RectId| intersection_area(ud.rect(*id), rho);
        uni2.record(ud.rects.iter().map(|r| intersection_area(r, rho)).sum(), rho.area() / delta, 0.0);
        let reps_len: f64 = ud.groups.iter().map(|g| ud.rect(g.rep).len()).sum();
        u.record(reps_len, rho.len() / delta, 0.0);
        for (k, r) in ud.rects.iter().enumerate() {
            let ir = ud.projections[k].map_or(0.0, |i| i.len());
            b_upper.record(ir, 2.0 * r.len(), 0.0);
            b_lower.record(r.len(), ir, 0.0);
            let vs = ud.vsets[k].total_len();
            if vs > 0.0 {
                b_density.record(ud.densities[k] * r.len(), vs, 0.0);
            }
        }
        for g in &ud.groups {
            let r = ud.rect(g.rep);
            uni3.record(g.members.iter().map(area).sum(), r.len() * rho.wid(), 0.0);
            for (i, mem) in g.intervals.iter().zip(&g.interval_members) {
                v.record(mem.iter().map(area).sum(), 20.0 * i.len() * rho.wid(), 0.0);
            }
            geo.merge(&check_lemma_geo(ud, g.rep));
            strom.merge(&check_lemma_stromberg(ud, g.rep, cr.kappa));
            triple.record_count(triple_overlaps(&g.intervals));
            gap.record_count(gap_violations(&g.intervals, cr.kappa));
            singletons.record_count(usize::from(g.empty_vset));
        }
        same.merge(&check_lemma_samedirection(ud));
    }

    let l1: f64 = sel.iter().map(|r| r.area()).sum();
    let mut l2 = l1;
    for (b, r) in sel.iter().enumerate() {
        for rho in &sel[..b] {
            l2 += 2.0 * intersection_area(rho, r);
        }
    }
    let mut two_lt_one = EstimateReport::empirical("2<1", "||sum 1_R'||_1 / delta");
    two_lt_one.record(l2, l1 / delta, 0.0);
    let mut bigcup = EstimateReport::empirical("bigcup", "||sum 1_R'||_1");
    let dis_rects: Vec<Rect> = dis.iter().map(|r| **r).collect();
    bigcup.record(union_area(&dis_rects), l1, 0.0);

    Ok(vec![
        uni1, uni2, uni3, u, v, b_upper, b_lower, b_density, two_lt_one, bigcup, same, geo, strom, triple, gap,
        singletons,
    ])
}
