mod support;

use kakeya_core::covering::{
    analyze, build_I_intervals, build_U, build_all_intervals, check_lemma_geo, check_lemma_samedirection,
    check_lemma_stromberg, classify_pairs, dyadic, finest_level, gap_violations, principal_holds,
    replay_selection_log, select_covering, triple_overlaps, union_area, verify_estimates, CoveringResult, Group,
    SelectionEvent, SelectionLog, UDecomposition,
};
use kakeya_core::geometry::{Interval, Point, Rect, RectId, Segment, UnitVec};
use kakeya_core::maximal::RectFamily;
use kakeya_core::sampling::Sampler;
use kakeya_core::vectorfield::{BBox, CellSet, FieldKind, VectorField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{families, reference};

fn rect(id: u32, cx: f64, cy: f64, ang: f64, len: f64, wid: f64) -> Rect {
    Rect::new(RectId(id), Point::new(cx, cy), UnitVec::from_angle(ang), len, wid).unwrap()
}

fn constant_field(angle: f64, extent: f64) -> VectorField {
    let d = BBox::new(Point::new(-extent, -extent), Point::new(extent, extent)).unwrap();
    VectorField::new(FieldKind::Constant { angle }, d).unwrap().with_length_cap(1.0).unwrap()
}

#[test]
fn far_separated_rectangles_are_all_selected() {
    let v = constant_field(0.0, 1e6);
    let rects: Vec<Rect> = (0..6).map(|k| rect(k, 1e5 * k as f64, -1e5 * (k % 2) as f64, 0.0, 1.0, 0.25)).collect();
    let fam = RectFamily::from_rects(&v, rects, 1.0, &Sampler::default()).unwrap();
    let cr = select_covering(&fam, 100).unwrap();
    assert_eq!(cr.selected.len(), 6);
    assert!(cr.discarded.is_empty());
}

#[test]
fn identical_copies_collapse_to_one() {
    let v = constant_field(0.3, 10.0);
    let rects: Vec<Rect> = (0..100).map(|k| rect(99 - k, 1.0, 2.0, 0.3, 1.0, 0.1)).collect();
    let fam = RectFamily::from_rects(&v, rects, 1.0, &Sampler::default()).unwrap();
    let cr = select_covering(&fam, 100).unwrap();
    assert_eq!(cr.selected, vec![RectId(0)]);
    assert_eq!(cr.discarded.len(), 99);
}

#[test]
fn selection_order_and_partition() {
    let v = families::field();
    let fam = families::clustered(&v, 200, 0.25, 3);
    let cr = select_covering(&fam, 100).unwrap();
    let mut all: Vec<RectId> = cr.selected.iter().chain(&cr.discarded).copied().collect();
    all.sort();
    let mut ids: Vec<RectId> = fam.rects().iter().map(|r| r.id).collect();
    ids.sort();
    assert_eq!(all, ids);
    let lens: Vec<f64> = cr.selected.iter().map(|id| fam.get(*id).unwrap().len()).collect();
    assert!(lens.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn fast_selection_matches_slow_reference() {
    let v = families::field();
    for seed in 0..4 {
        let fam = families::clustered(&v, 60, 0.25, 100 + seed);
        let fast = select_covering(&fam, 100).unwrap();
        let slow = reference::slow_select(&fam, 100);
        assert_eq!(fast.log, slow, "seed {seed}");
        let rep = replay_selection_log(&fast.log, &fam).unwrap();
        assert!(rep.is_consistent(), "{:?}", rep.failures);
        assert_eq!(rep.selections + rep.discards, fam.len());
    }
}

#[test]
fn fast_selection_matches_slow_reference_on_500_rects() {
    let v = families::field();
    let fam = families::scattered(&v, 500, 0.25, 1);
    let fast = select_covering(&fam, 100).unwrap();
    assert!(fast.selected.len() > 1);
    assert_eq!(fast.log, reference::slow_select(&fam, 100));
}

#[test]
fn fast_selection_matches_slow_reference_with_small_kappa() {
    let v = families::field();
    let fam = families::clustered(&v, 80, 0.25, 7);
    for kappa in [8, 9, 16] {
        let fast = select_covering(&fam, kappa).unwrap();
        assert_eq!(fast.log, reference::slow_select(&fam, kappa), "kappa {kappa}");
    }
}

#[test]
fn replay_detects_tampering() {
    let v = families::field();
    let fam = families::clustered(&v, 40, 0.25, 9);
    let cr = select_covering(&fam, 100).unwrap();
    let mut log = cr.log.clone();
    let text = log.to_text();
    assert_eq!(SelectionLog::parse(&text).unwrap(), log);
    assert!(SelectionLog::parse("select 1\n").is_err());
    assert!(SelectionLog::parse("kappa 100\nselect x\n").is_err());
    // Turning the last selection into a discard must be caught.
    let pos = log.events.iter().rposition(|e| matches!(e, SelectionEvent::Select { .. })).unwrap();
    if let SelectionEvent::Select { id } = log.events[pos] {
        let after = log.events[..pos]
            .iter()
            .rev()
            .find_map(|e| if let SelectionEvent::Select { id } = e { Some(*id) } else { None });
        if let Some(after) = after {
            log.events[pos] = SelectionEvent::Discard { id, after };
            let rep = replay_selection_log(&log, &fam).unwrap();
            assert!(!rep.is_consistent());
        }
    }
}

fn covering(selected: &[Rect], kappa: u32) -> CoveringResult {
    CoveringResult {
        kappa,
        selected: selected.iter().map(|r| r.id).collect(),
        discarded: Vec::new(),
        pairs: Vec::new(),
        s_r: Default::default(),
        t_rho: Default::default(),
        diagnostics: Default::default(),
        log: SelectionLog { kappa, events: Vec::new() },
    }
}

#[test]
fn pair_classification_examples() {
    let v = constant_field(0.0, 10.0);
    let rho = rect(0, 0.0, 0.0, 0.0, 1.0, 0.1);
    let same = rect(1, 0.2, 0.0, 0.0, 0.5, 0.05);
    let cross = rect(2, 0.0, 0.0, 1.2, 0.5, 0.05);
    let fam = RectFamily::from_rects(&v, vec![rho, same], 1.0, &Sampler::default()).unwrap();
    let cr = classify_pairs(covering(&[rho, same], 100), &fam, 0.0).unwrap();
    assert_eq!(cr.pairs, vec![(RectId(0), RectId(1))]);
    assert_eq!(cr.s_r[&RectId(1)], vec![RectId(0)]);
    assert!(cr.t_rho.is_empty());

    let w = VectorField::new(FieldKind::Constant { angle: 0.0 }, *v.domain()).unwrap().with_length_cap(1.0).unwrap();
    let all = vec![rho, same, cross];
    let fam = fam_unchecked(&w, all.clone());
    let cr = classify_pairs(covering(&all, 100), &fam, 0.0).unwrap();
    assert_eq!(cr.t_rho[&RectId(0)], vec![RectId(2)]);
    assert_eq!(cr.t_rho[&RectId(1)], vec![RectId(2)]);
}

/// A family skipping the density filter, for geometric tests only.
fn fam_unchecked(v: &VectorField, rects: Vec<Rect>) -> RectFamily {
    let json = serde_json::json!({
        "rects": rects,
        "densities": vec![1.0; rects.len()],
        "delta": 0.5,
        "nu": v.length_cap(),
        "provenance": null,
    });
    serde_json::from_value(json).unwrap()
}

#[test]
fn pair_audit_on_random_coverings() {
    let v = families::field();
    for seed in 0..3 {
        let fam = families::clustered(&v, 150, 0.25, 20 + seed);
        let cr = classify_pairs(select_covering(&fam, 12).unwrap(), &fam, v.lip()).unwrap();
        let pos = |id: RectId| cr.selected.iter().position(|x| *x == id).unwrap();
        let s: usize = cr.s_r.values().map(Vec::len).sum();
        let t: usize = cr.t_rho.values().map(Vec::len).sum();
        assert_eq!(s + t, cr.pairs.len());
        for &(rho, r) in &cr.pairs {
            assert!(pos(rho) < pos(r));
            let in_s = cr.s_r.get(&r).is_some_and(|v| v.contains(&rho));
            let in_t = cr.t_rho.get(&rho).is_some_and(|v| v.contains(&r));
            assert!(in_s != in_t);
        }
    }
}

/// Rectangles crossing a long horizontal host, directed by a gently turning field.
fn crossing(n: usize, seed: u64) -> (VectorField, Rect, Vec<Rect>) {
    let d = BBox::new(Point::new(-2.0, -2.0), Point::new(2.0, 2.0)).unwrap();
    let v = VectorField::new(FieldKind::LinearAngle { rate: 0.01, offset: 0.3 }, d).unwrap();
    let rho = rect(1000, 0.0, 0.0, 0.0, 1.0, 0.02);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < n {
        let len = rng.gen_range(0.05..0.6);
        let wid = len * rng.gen_range(0.01..0.05);
        let c = Point::new(rng.gen_range(-0.45..0.45), rng.gen_range(-0.01..0.01));
        let r = rect(out.len() as u32, c.x, c.y, v.angle_at(c) + rng.gen_range(-0.3..0.3) * wid / len, len, wid);
        out.push(r);
    }
    (v, rho, out)
}

#[test]
fn grouping_matches_quadratic_reference() {
    for seed in 0..3 {
        let (v, rho, t) = crossing(100, seed);
        let ud = build_U(&rho, &t, &v, &Sampler::default()).unwrap();
        let groups: Vec<(RectId, Vec<RectId>)> = ud.groups.iter().map(|g| (g.rep, g.members.clone())).collect();
        assert_eq!(groups, reference::quadratic_groups(&ud));
        let mut all: Vec<RectId> = groups.iter().flat_map(|g| g.1.clone()).collect();
        all.sort();
        assert_eq!(all, (0..100).map(RectId).collect::<Vec<_>>());
        // Representatives' projected density sets are pairwise disjoint.
        for (a, ga) in ud.groups.iter().enumerate() {
            for gb in &ud.groups[a + 1..] {
                let (pa, pb) = (ud.position(ga.rep).unwrap(), ud.position(gb.rep).unwrap());
                assert!(!ud.vsets[pa].intersects(&ud.vsets[pb]));
            }
        }
    }
}

#[test]
fn grouping_examples() {
    let d = BBox::new(Point::new(-2.0, -2.0), Point::new(2.0, 2.0)).unwrap();
    let v = VectorField::new(FieldKind::Constant { angle: 0.3 }, d).unwrap().with_length_cap(1.0).unwrap();
    let rho = rect(9, 0.0, 0.0, 0.0, 1.0, 0.02);
    let apart: Vec<Rect> = (0..4).map(|k| rect(k, -0.3 + 0.2 * k as f64, 0.0, 0.3, 0.1, 0.005)).collect();
    let ud = build_U(&rho, &apart, &v, &Sampler::default()).unwrap();
    assert_eq!(ud.groups.len(), 4);
    let stacked: Vec<Rect> = (0..4).map(|k| rect(k, 0.0, 0.0, 0.3, 0.1 + 0.01 * k as f64, 0.005)).collect();
    let ud = build_U(&rho, &stacked, &v, &Sampler::default()).unwrap();
    assert_eq!(ud.groups.len(), 1);
    assert_eq!(ud.groups[0].rep, RectId(3));
    assert!(build_U(&rho, &[rect(0, 1.9, 1.9, 0.3, 0.1, 0.005)], &v, &Sampler::default()).is_err());
}

/// A decomposition with a single group holding `members`, for the interval
/// loop and lemma checks; `rep` must be among `members`.
fn single_group(rho: Rect, members: Vec<Rect>, rep: RectId) -> UDecomposition {
    let segment = Segment::for_host(&rho);
    let projections = members.iter().map(|r| kakeya_core::geometry::project_onto_segment(r, &segment)).collect();
    let vsets = members.iter().map(|_| CellSet::grid_for(&segment)).collect();
    let theta = kakeya_core::geometry::angle_dist(rho.dir(), members.iter().find(|r| r.id == rep).unwrap().dir());
    let ids = members.iter().map(|r| r.id).collect();
    UDecomposition {
        rho,
        segment,
        densities: vec![1.0; members.len()],
        rects: members,
        projections,
        vsets,
        groups: vec![Group {
            rep,
            theta,
            members: ids,
            intervals: Vec::new(),
            interval_members: Vec::new(),
            residual: Vec::new(),
            empty_vset: false,
        }],
    }
}

#[test]
fn interval_loop_examples() {
    let rho = rect(100, 0.0, 0.0, 0.0, 8.0, 0.05);
    // A single crossing rectangle can never reach ten times the slab.
    let lone = rect(0, 0.0, 0.0, 0.4, 4.0, 0.04);
    let mut ud = single_group(rho, vec![lone], RectId(0));
    build_I_intervals(&mut ud, RectId(0)).unwrap();
    assert!(ud.groups[0].intervals.is_empty());
    assert_eq!(ud.groups[0].residual, vec![RectId(0)]);

    // Twelve long rectangles stacked over one short stretch of the host.
    let mut stack: Vec<Rect> = (0..12).map(|k| rect(k, 0.0, 0.025, 0.5, 4.0 - 0.01 * k as f64, 0.2)).collect();
    stack.push(rect(50, 2.0, 0.0, 0.5, 0.5, 0.01));
    let mut ud = single_group(rho, stack.clone(), RectId(0));
    build_I_intervals(&mut ud, RectId(0)).unwrap();
    let g = &ud.groups[0];
    assert!(!g.intervals.is_empty());
    let first = g.intervals[0];
    let stock: Vec<&Rect> = stack.iter().collect();
    let direct: f64 = stack.iter().filter(|r| r.len() >= 8.0 * first.len()).map(|r| ud.slab_area(r, &first)).sum();
    assert!(direct >= 10.0 * first.len() * rho.wid());
    assert!(principal_holds(&ud, &stock, &first));
    assert!(g.interval_members[0].len() >= 10);
    // No dyadic interval of the representative's projection qualifies afterwards.
    let residual: Vec<&Rect> = g.residual.iter().map(|id| ud.rect(*id)).collect();
    let base = ud.projections[ud.position(RectId(0)).unwrap()].unwrap();
    for k in 0..=finest_level(&base, ud.pitch()) {
        for i in dyadic(&base, k) {
            assert!(!principal_holds(&ud, &residual, &i));
        }
    }
}

#[test]
fn interval_loop_postcondition_on_random_groups() {
    for seed in 0..3 {
        let (v, rho, t) = crossing(120, 40 + seed);
        let mut ud = build_U(&rho, &t, &v, &Sampler::default()).unwrap();
        build_all_intervals(&mut ud).unwrap();
        for g in &ud.groups {
            let mut parts: Vec<RectId> = g.residual.clone();
            parts.extend(g.interval_members.iter().flatten());
            parts.sort();
            let mut mem = g.members.clone();
            mem.sort();
            assert_eq!(parts, mem);
            let residual: Vec<&Rect> = g.residual.iter().map(|id| ud.rect(*id)).collect();
            if let Some(base) = ud.projections[ud.position(g.rep).unwrap()] {
                for k in 0..=finest_level(&base, ud.pitch()) {
                    for i in dyadic(&base, k) {
                        assert!(!principal_holds(&ud, &residual, &i));
                    }
                }
            }
        }
    }
}

#[test]
fn samedirection_check() {
    let rho = rect(100, 0.0, 0.0, 0.0, 8.0, 0.05);
    let r = rect(0, 0.0, 0.0, 0.4, 4.0, 0.04);
    let ud = single_group(rho, vec![r], RectId(0));
    let rep = check_lemma_samedirection(&ud);
    assert_eq!(rep.violations, 0);
    assert_eq!(rep.measured, 0.0);
    let bent = rect(1, 0.5, 0.0, 0.0, 2.0, 0.04);
    let ud = single_group(rho, vec![r, bent], RectId(0));
    assert_eq!(check_lemma_samedirection(&ud).violations, 1);
}

#[test]
fn geo_check_passes_and_detects_injected_violation() {
    let rho = rect(100, 0.0, 0.0, 0.0, 8.0, 0.05);
    let stack: Vec<Rect> = (0..3).map(|k| rect(k, -2.0, 0.025, 0.05, 4.0, 0.2)).collect();
    let far = rect(10, 3.5, 0.025, 0.05, 0.05, 0.01);
    let ud = single_group(rho, [stack.clone(), vec![far]].concat(), RectId(0));
    let rep = check_lemma_geo(&ud, RectId(0));
    assert!(rep.instances > 0, "hypothesis should hold somewhere");
    assert_eq!(rep.violations, 0);
    let near = rect(11, -2.0, 0.025, 0.05, 0.05, 0.01);
    let ud = single_group(rho, [stack, vec![near]].concat(), RectId(0));
    assert!(check_lemma_geo(&ud, RectId(0)).violations > 0);
    let lone = single_group(rho, vec![far], RectId(10));
    assert_eq!(check_lemma_geo(&lone, RectId(10)).instances, 0);
}

#[test]
fn stromberg_check_examples() {
    let rho = rect(100, 0.0, 0.0, 0.0, 8.0, 0.05);
    // Aligned with the host, so its shadow has exactly its length.
    let r = rect(0, 0.0, 0.0, 0.0, 2.0, 0.01);
    let short = rect(1, 0.3, 0.0, 0.2, 0.5, 0.01);
    let ud = single_group(rho, vec![r, short], RectId(0));
    let rep = check_lemma_stromberg(&ud, RectId(0), 100);
    assert!(rep.instances > 0);
    assert_eq!(rep.violations, 0);
    let base = ud.projections[0].unwrap();
    let mut best: f64 = 0.0;
    for k in 0..=finest_level(&base, ud.pitch()) {
        let w = base.len() / (1u64 << k) as f64;
        for i in dyadic(&base, k) {
            let sum: f64 = [r, short]
                .iter()
                .filter(|m| m.len() <= w && w <= 10.0 * m.len())
                .map(|m| ud.slab_area(m, &i))
                .sum();
            best = best.max(sum / (5.0 * i.len() * rho.wid()));
        }
    }
    assert!((rep.ratio - best).abs() <= 1e-12 * best.max(1.0), "{} vs {best}", rep.ratio);
    assert!(best > 0.0);
}

#[test]
fn interval_combinatorics() {
    let a = Interval::new(0.0, 1.0);
    let b = Interval::new(0.0, 0.5);
    let c = Interval::new(0.25, 0.5);
    let d = Interval::new(1.0, 2.0);
    assert_eq!(triple_overlaps(&[a, b, c]), 1);
    assert_eq!(triple_overlaps(&[a, b, d]), 0);
    assert_eq!(gap_violations(&[a, d], 100), 1);
    assert_eq!(gap_violations(&[a, Interval::new(0.5, 0.75)], 100), 1);
    assert_eq!(gap_violations(&[a, Interval::new(0.5, 0.505)], 100), 0);
    assert_eq!(gap_violations(&[a, Interval::new(10.0, 11.0)], 100), 0);
}

#[test]
fn union_area_of_known_configurations() {
    let a = rect(0, 0.0, 0.0, 0.0, 1.0, 1.0);
    let b = rect(1, 0.5, 0.0, 0.0, 1.0, 1.0);
    assert!((union_area(&[a]) - 1.0).abs() < 1e-12);
    assert!((union_area(&[a, a.with_id(RectId(5))]) - 1.0).abs() < 1e-12);
    assert!((union_area(&[a, b]) - 1.5).abs() < 0.02);
    assert_eq!(union_area(&[]), 0.0);
}

#[test]
fn singleton_family_has_trivial_reports() {
    let v = constant_field(0.0, 10.0);
    let fam = RectFamily::from_rects(&v, vec![rect(0, 0.0, 0.0, 0.0, 1.0, 0.1)], 1.0, &Sampler::default()).unwrap();
    let a = analyze(&fam, &v, 100, &Sampler::default()).unwrap();
    assert!(a.decompositions.is_empty());
    for r in &a.reports {
        assert!(r.ratio.is_finite() && r.ratio <= 1.0, "{r:?}");
        assert_eq!(r.violations, 0, "{r:?}");
    }
    let again = verify_estimates(&a.covering, &a.decompositions, &fam).unwrap();
    assert_eq!(again, a.reports);
}

#[test]
fn analysis_is_deterministic() {
    let v = families::field();
    let fam = families::clustered(&v, 120, 0.25, 77);
    let a = analyze(&fam, &v, 100, &Sampler::default()).unwrap();
    let b = analyze(&fam, &v, 100, &Sampler::default()).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    for r in &a.reports {
        assert!(r.ratio.is_finite() && r.ratio >= 0.0, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn selection_partitions_and_orders(seed in 0u64..10_000, n in 2usize..40) {
        let v = families::field();
        let fam = families::clustered(&v, n, 0.25, seed);
        let cr = select_covering(&fam, 100).unwrap();
        prop_assert_eq!(cr.selected.len() + cr.discarded.len(), n);
        let lens: Vec<f64> = cr.selected.iter().map(|id| fam.get(*id).unwrap().len()).collect();
        prop_assert!(lens.windows(2).all(|w| w[0] >= w[1]));
        let rep = replay_selection_log(&cr.log, &fam).unwrap();
        prop_assert!(rep.is_consistent(), "{:?}", rep.failures);
    }
}
