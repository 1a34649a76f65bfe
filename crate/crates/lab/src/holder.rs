//! Hölder sharpness probe: the weak-type quantity at fixed δ as a lacunary
//! sawtooth field is truncated at finer and finer scales.

use kakeya_core::maximal::{CandidatePool, ScalarField};
use kakeya_core::vectorfield::FieldKind;
use serde::Serialize;

use crate::config::{ExperimentConfig, FieldSpec};
use crate::sweep::{sweep_pool, Setup};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderRow {
    /// `holder`, `control` or `baseline`.
    pub series: String,
    /// Finest sawtooth wavelength is `period·2^{-level}`.
    pub level: u32,
    pub quantity: f64,
    pub witness_lambda: f64,
    pub family_size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderProbe {
    pub rows: Vec<HolderRow>,
    /// The `holder` series never decreases from coarse to fine.
    pub nondecreasing: bool,
    /// Finest over coarsest quantity of the `control` series.
    pub control_ratio: f64,
}

impl HolderProbe {
    pub fn series(&self, name: &str) -> Vec<&HolderRow> {
        self.rows.iter().filter(|r| r.series == name).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["series", "level", "quantity", "witness_lambda", "family_size"]).unwrap();
        for r in &self.rows {
            w.write_record([
                r.series.clone(),
                r.level.to_string(),
                r.quantity.to_string(),
                r.witness_lambda.to_string(),
                r.family_size.to_string(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

fn measure(cfg: &ExperimentConfig, field: &FieldSpec, series: &str, level: u32) -> kakeya_core::Result<HolderRow> {
    let cfg = &ExperimentConfig { min_wid_cells: cfg.holder_min_wid_cells, ..cfg.clone() };
    let setup = Setup::new(cfg, field, cfg.holder_radius)?;
    let pool = CandidatePool::build(&setup.field, &setup.enumeration, &cfg.sampler)?;
    let probe: Vec<(f64, ScalarField)> =
        vec![(cfg.holder_radius, setup.probes(cfg.grid.center, &[cfg.holder_radius]).remove(0))];
    let row = sweep_pool(&pool, &setup.layout, &probe, &[cfg.holder_delta])?.remove(0);
    Ok(HolderRow {
        series: series.into(),
        level,
        quantity: row.quantity,
        witness_lambda: row.witness_lambda,
        family_size: row.family_size,
    })
}

/// Runs the three series over `cfg.holder_levels`:
///
/// - `holder`: `Σ_{k ≤ level} amp·2^{-kα}·tri(2^k x/P)` with `P` the grid width;
/// - `control`: the one-term field (`α = 1`), with the largest amplitude the
///   shared length cap admits, the same at every level;
/// - `baseline`: a constant field, a single row at the coarsest level.
///
/// All series share the length cap of `cfg.field`, the grid, and an
/// enumeration whose widths stop at `holder_min_wid_cells`: rough fields keep
/// most orientations, so the thinnest shapes would dominate the cost.
pub fn holder_probe(cfg: &ExperimentConfig) -> kakeya_core::Result<HolderProbe> {
    let cap = cfg.field.length_cap().map_err(|e| kakeya_core::Error::InvalidParam(e.to_string()))?;
    let period = (cfg.grid.n - 1) as f64 * cfg.grid.pitch;
    let mut rows = Vec::new();
    for &level in &cfg.holder_levels {
        let kind = FieldKind::Holder { alpha: cfg.holder_alpha, amp: cfg.holder_amp, period, terms: level + 1 };
        rows.push(measure(cfg, &FieldSpec { kind, cap: Some(cap) }, "holder", level)?);
    }
    // One term has Lipschitz constant 2·amp/P, and the cap must not exceed
    // 1/(100·Lip).
    let control_amp = cfg.holder_amp.min(period / (200.0 * cap));
    let control = FieldSpec { kind: FieldKind::Holder { alpha: 1.0, amp: control_amp, period, terms: 1 }, cap: Some(cap) };
    let coarsest = *cfg.holder_levels.iter().min().unwrap();
    let row = measure(cfg, &control, "control", coarsest)?;
    for &level in &cfg.holder_levels {
        rows.push(HolderRow { level, ..row.clone() });
    }
    let constant = FieldSpec { kind: FieldKind::Constant { angle: 0.0 }, cap: Some(cap) };
    rows.push(measure(cfg, &constant, "baseline", coarsest)?);

    let mut holder: Vec<&HolderRow> = rows.iter().filter(|r| r.series == "holder").collect();
    holder.sort_by_key(|r| r.level);
    let nondecreasing = holder.windows(2).all(|w| w[0].quantity <= w[1].quantity);
    let mut control: Vec<&HolderRow> = rows.iter().filter(|r| r.series == "control").collect();
    control.sort_by_key(|r| r.level);
    let (first, last) = (control.first().unwrap().quantity, control.last().unwrap().quantity);
    let control_ratio = if first == last { 1.0 } else { last / first };
    Ok(HolderProbe { rows, nondecreasing, control_ratio })
}
