//! Weak-type δ-sweep: `sup_λ λ²·|{M_{v,δ} f > λ}| / ‖f‖₂²` against `1/δ`.

use std::time::Instant;

use kakeya_core::geometry::{Point, Rect};
use kakeya_core::maximal::{paint, rect_average, CandidatePool, Enumeration, GridLayout, MaxField, ScalarField};
use kakeya_core::vectorfield::{BBox, VectorField};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ExperimentConfig, FieldSpec};

/// λ grid: `base·2^{k/2}` for `|k| ≤ 20`.
pub const LAMBDA_STEPS: i32 = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    /// Probe disc radius in grid cells.
    pub radius: f64,
    pub quantity: f64,
    pub witness_lambda: f64,
    pub family_size: usize,
    /// Empty family; the row is left out of the fit.
    pub flagged: bool,
    /// Wall time of the cell in milliseconds. Not written to CSV.
    #[serde(skip)]
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeSlope {
    pub radius: f64,
    /// Least-squares slope of `log q` against `log(1/δ)`, when at least two
    /// rows with positive quantity are available.
    pub slope: Option<f64>,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub slopes: Vec<ProbeSlope>,
    /// Candidates materialized by the enumeration.
    pub pool_size: usize,
}

impl SweepResult {
    pub fn max_slope(&self) -> Option<f64> {
        self.slopes.iter().filter_map(|s| s.slope).reduce(f64::max)
    }

    /// Rows ordered by δ descending, per probe, have nondecreasing quantity.
    pub fn monotone_in_delta(&self) -> bool {
        let mut radii: Vec<f64> = self.rows.iter().map(|r| r.radius).collect();
        radii.dedup();
        radii.iter().all(|&rad| {
            let mut rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.radius == rad).collect();
            rows.sort_by(|a, b| b.delta.total_cmp(&a.delta));
            rows.windows(2).all(|w| w[0].quantity <= w[1].quantity)
        })
    }

    pub fn rows_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["delta", "radius_cells", "quantity", "witness_lambda", "family_size", "flagged"]).unwrap();
        for r in &self.rows {
            w.write_record([
                r.delta.to_string(),
                r.radius.to_string(),
                r.quantity.to_string(),
                r.witness_lambda.to_string(),
                r.family_size.to_string(),
                r.flagged.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn slopes_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["radius_cells", "slope", "points"]).unwrap();
        for s in &self.slopes {
            w.write_record([s.radius.to_string(), s.slope.map(|x| x.to_string()).unwrap_or_default(), s.points.to_string()])
                .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Indicator of the closed disc of `radius` cells about `center`, scaled to
/// unit L² norm on the grid. Zero when the disc holds no node.
pub fn disc_probe(layout: &GridLayout, center: Point, radius: f64) -> ScalarField {
    let r = radius * layout.pitch;
    let inside = |p: Point| (p.x - center.x).hypot(p.y - center.y) <= r * (1.0 + 1e-12);
    let count = (0..layout.len()).filter(|&k| inside(layout.point_at(k))).count();
    if count == 0 {
        return ScalarField::zeros(*layout);
    }
    let c = 1.0 / (count as f64 * layout.cell_area()).sqrt();
    ScalarField::from_fn(*layout, |p| if inside(p) { c } else { 0.0 }).expect("probe values are finite")
}

/// `sup_λ λ²·|{m > λ}| / ‖f‖₂²` over the λ grid, with the maximizing λ.
/// Zero, at `λ = 0`, for the zero function.
pub fn weak_type_quantity(m: &MaxField, f: &ScalarField) -> (f64, f64) {
    let norm_sq = f.l2_norm_sq();
    let supp = f.support_area();
    if norm_sq == 0.0 || supp == 0.0 {
        return (0.0, 0.0);
    }
    let base = norm_sq.sqrt() / supp.sqrt();
    let mut best = (0.0, 0.0);
    for k in -LAMBDA_STEPS..=LAMBDA_STEPS {
        let lambda = base * (0.5 * k as f64).exp2();
        let q = lambda * lambda * m.superlevel_measure(lambda) / norm_sq;
        if q > best.0 {
            best = (q, lambda);
        }
    }
    best
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// The grid, the field on it and an enumeration covering every rectangle
/// that can meet a probe of radius up to `reach` cells.
pub struct Setup {
    pub layout: GridLayout,
    pub field: VectorField,
    pub enumeration: Enumeration,
}

impl Setup {
    pub fn new(cfg: &ExperimentConfig, field: &FieldSpec, reach: f64) -> kakeya_core::Result<Setup> {
        let g = cfg.grid;
        let layout = GridLayout::centered(g.center, g.pitch, g.n)?;
        let cap = field.length_cap().map_err(|e| kakeya_core::Error::InvalidParam(e.to_string()))?;
        let grid_box = BBox::new(layout.origin, layout.max())?;
        let v = field.build(grid_box.expand(cap))?;
        let r = reach * g.pitch + cap * std::f64::consts::FRAC_1_SQRT_2 + g.pitch;
        let region = BBox::new(g.center - Point::new(r, r), g.center + Point::new(r, r))?;
        let enumeration = Enumeration {
            top_len: Some(cap),
            j_max: cfg.j_max,
            min_wid: cfg.min_wid_cells * g.pitch,
            orient_factor: cfg.orient_factor,
            center_factor: cfg.center_factor,
            region: Some(region),
        };
        Ok(Setup { layout, field: v, enumeration })
    }

    pub fn probes(&self, center: Point, radii: &[f64]) -> Vec<ScalarField> {
        radii.iter().map(|&r| disc_probe(&self.layout, center, r)).collect()
    }
}

/// Rows for every `(δ, probe)` pair from one candidate pool. Averages are
/// computed once per candidate and probe; each threshold paints its subset.
pub fn sweep_pool(
    pool: &CandidatePool,
    layout: &GridLayout,
    probes: &[(f64, ScalarField)],
    deltas: &[f64],
) -> kakeya_core::Result<Vec<SweepRow>> {
    let averages: Vec<Vec<f64>> = probes
        .iter()
        .map(|(_, f)| pool.rects().par_iter().map(|r| rect_average(f, r)).collect())
        .collect();
    let mut rows = Vec::new();
    for &delta in deltas {
        let idx = pool.select(delta)?;
        for ((radius, f), avg) in probes.iter().zip(&averages) {
            let t = Instant::now();
            let items: Vec<(Rect, f64)> = idx.iter().map(|&i| (pool.rects()[i], avg[i])).collect();
            let (quantity, witness_lambda) = if items.is_empty() {
                (0.0, 0.0)
            } else {
                weak_type_quantity(&paint(layout, &items), f)
            };
            rows.push(SweepRow {
                delta,
                radius: *radius,
                quantity,
                witness_lambda,
                family_size: items.len(),
                flagged: items.is_empty(),
                runtime_ms: t.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    Ok(rows)
}

pub fn slopes(rows: &[SweepRow], radii: &[f64]) -> Vec<ProbeSlope> {
    radii
        .iter()
        .map(|&radius| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.radius == radius && !r.flagged && r.quantity > 0.0)
                .map(|r| ((1.0 / r.delta).ln(), r.quantity.ln()))
                .collect();
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
            ProbeSlope { radius, slope: fit_slope(&xs, &ys), points: pts.len() }
        })
        .collect()
}

pub fn weak_type_sweep(cfg: &ExperimentConfig) -> kakeya_core::Result<SweepResult> {
    let reach = cfg.radii.iter().copied().fold(0.0, f64::max);
    let setup = Setup::new(cfg, &cfg.field, reach)?;
    let pool = CandidatePool::build(&setup.field, &setup.enumeration, &cfg.sampler)?;
    let probes: Vec<(f64, ScalarField)> =
        cfg.radii.iter().copied().zip(setup.probes(cfg.grid.center, &cfg.radii)).collect();
    let rows = sweep_pool(&pool, &setup.layout, &probes, &cfg.deltas)?;
    let slopes = slopes(&rows, &cfg.radii);
    Ok(SweepResult { rows, slopes, pool_size: pool.rects().len() })
}
