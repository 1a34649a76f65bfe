//! Subcommand drivers: read the configuration, run, write files under `out`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use kakeya_core::covering::{analyze, replay_selection_log, SelectionLog};
use kakeya_core::geometry::{Point, RectId};
use kakeya_core::maximal::gridio::{load_grid, parse_csv, save_grid};
use kakeya_core::maximal::{
    eval_M_K_eps, eval_M_kappa, eval_M_v, eval_M_v_delta, CandidatePool, GridLayout, MaxField, ScalarField,
};
use kakeya_core::vectorfield::BBox;
use serde::Serialize;
use thiserror::Error;

use crate::campaign::{run_campaign, FamilyFile};
use crate::config::{ConfigError, ExperimentConfig};
use crate::holder::holder_probe;
use crate::sweep::{disc_probe, weak_type_sweep, Setup};

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] kakeya_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        1
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

/// What a finished subcommand reports back.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    /// An invariant failed; the process exits with status 2.
    pub violation: bool,
}

fn write(out: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    let path = out.join(name);
    fs::write(&path, contents).map_err(|source| LabError::Io { path, source })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("results serialize");
    s.push('\n');
    s
}

pub fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|source| LabError::Io { path: out.to_path_buf(), source })
}

pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let t = Instant::now();
    let res = weak_type_sweep(cfg)?;
    for r in &res.rows {
        eprintln!("delta {} radius {}: {:.1} ms", r.delta, r.radius, r.runtime_ms);
    }
    eprintln!("sweep: {:.2} s", t.elapsed().as_secs_f64());
    write(out, "sweep.csv", res.rows_csv())?;
    write(out, "slopes.csv", res.slopes_csv())?;
    let mut lines = vec![format!("candidates: {}", res.pool_size)];
    for s in &res.slopes {
        let slope = s.slope.map_or("n/a".to_string(), |x| format!("{x:.4}"));
        lines.push(format!("radius {}: slope {slope} over {} points", s.radius, s.points));
    }
    let monotone = res.monotone_in_delta();
    let finite = res.rows.iter().all(|r| r.quantity.is_finite() && r.witness_lambda.is_finite());
    if !monotone {
        lines.push("quantity increases with delta for some probe".into());
    }
    if !finite {
        lines.push("non-finite quantity".into());
    }
    Ok(Outcome { lines, violation: !(monotone && finite) })
}

pub fn probe_holder(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let t = Instant::now();
    let res = holder_probe(cfg)?;
    eprintln!("probe-holder: {:.2} s", t.elapsed().as_secs_f64());
    write(out, "holder.csv", res.to_csv())?;
    let verdict = format!(
        "nondecreasing,control_ratio\n{},{}\n",
        res.nondecreasing, res.control_ratio
    );
    write(out, "holder_verdict.csv", verdict)?;
    let lines = vec![
        format!("holder series nondecreasing: {}", res.nondecreasing),
        format!("control finest/coarsest: {}", res.control_ratio),
    ];
    // Monotonicity is exploratory; only a broken control counts as a failure.
    Ok(Outcome { lines, violation: !(res.control_ratio <= 1.5) })
}

pub fn campaign(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let t = Instant::now();
    let bundle = run_campaign(cfg);
    eprintln!("campaign: {:.2} s", t.elapsed().as_secs_f64());
    write(out, "bundle.json", to_json(&bundle))?;
    write(out, "summary.csv", bundle.summary_csv())?;
    let mut lines: Vec<String> = bundle
        .summary
        .iter()
        .map(|s| format!("{:<18} max ratio {:<12.6} instances {:<7} violations {}", s.name, s.max_ratio, s.instances, s.violations))
        .collect();
    lines.push(format!("failed instances: {}", bundle.failed_instances));
    let violation = bundle.explicit_violations() > 0 || bundle.failed_instances > 0;
    Ok(Outcome { lines, violation })
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    kappa: u32,
    rects: usize,
    selected: &'a [RectId],
    discarded: &'a [RectId],
    pairs: &'a [(RectId, RectId)],
    hosts: usize,
    reports: &'a [kakeya_core::covering::EstimateReport],
    replay_failures: &'a [String],
}

pub fn verify(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let path = cfg.verify_family.clone().ok_or_else(|| ConfigError::Value {
        key: "verify.family".into(),
        msg: "required by verify".into(),
    })?;
    let text = fs::read_to_string(&path).map_err(|source| LabError::Io { path: path.clone(), source })?;
    let ff: FamilyFile = serde_json::from_str(&text).map_err(|source| LabError::Json { path: path.clone(), source })?;
    let (v, fam) = ff.open(&cfg.sampler)?;
    let a = analyze(&fam, &v, cfg.kappa, &cfg.sampler)?;
    let log = match &cfg.verify_log {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| LabError::Io { path: p.clone(), source })?;
            SelectionLog::parse(&text)?
        }
        None => a.covering.log.clone(),
    };
    let replay = replay_selection_log(&log, &fam)?;
    write(out, "selection.log", a.covering.log.to_text())?;
    let report = VerifyReport {
        kappa: cfg.kappa,
        rects: fam.len(),
        selected: &a.covering.selected,
        discarded: &a.covering.discarded,
        pairs: &a.covering.pairs,
        hosts: a.decompositions.len(),
        reports: &a.reports,
        replay_failures: &replay.failures,
    };
    write(out, "verify.json", to_json(&report))?;
    let violations: usize = a.reports.iter().map(|r| r.violations).sum();
    let lines = vec![
        format!("selected {} of {}, {} pairs", a.covering.selected.len(), fam.len(), a.covering.pairs.len()),
        format!("violations {violations}, replay failures {}", replay.failures.len()),
    ];
    Ok(Outcome { lines, violation: violations > 0 || !replay.is_consistent() })
}

/// The input function of `eval`: `disc:<radius cells>`, `grid:<path>` or
/// `csv:<path>`, the last placed on the configured grid origin and pitch.
fn eval_input(cfg: &ExperimentConfig) -> Result<(ScalarField, f64)> {
    let spec = cfg.eval_input.as_str();
    let bad = |msg: String| LabError::Config(ConfigError::Value { key: "eval.input".into(), msg });
    let (kind, arg) = spec.split_once(':').ok_or_else(|| bad(format!("expected `kind:arg`, got `{spec}`")))?;
    let layout = GridLayout::centered(cfg.grid.center, cfg.grid.pitch, cfg.grid.n)?;
    match kind {
        "disc" => {
            let r: f64 = arg.parse().map_err(|e| bad(format!("radius `{arg}`: {e}")))?;
            if !(r > 0.0) {
                return Err(bad(format!("radius must be positive, got {r}")));
            }
            Ok((disc_probe(&layout, cfg.grid.center, r), r))
        }
        "grid" => {
            let f = load_grid(arg)?;
            let reach = f.layout().nx.max(f.layout().ny) as f64;
            Ok((f, reach))
        }
        "csv" => {
            let text = fs::read_to_string(arg).map_err(|source| LabError::Io { path: arg.into(), source })?;
            let f = parse_csv(&text, layout.origin, cfg.grid.pitch)?;
            let reach = f.layout().nx.max(f.layout().ny) as f64;
            Ok((f, reach))
        }
        other => Err(bad(format!("unknown input kind `{other}`"))),
    }
}

#[derive(Serialize)]
struct EvalSummary<'a> {
    operator: &'a str,
    input: &'a str,
    nx: usize,
    ny: usize,
    pitch: f64,
    max: f64,
    covered: usize,
}

pub fn eval(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let (f, reach) = eval_input(cfg)?;
    let layout = *f.layout();
    let mut local = cfg.clone();
    local.grid.n = layout.nx.max(layout.ny);
    let centre = Point::new(
        layout.origin.x + 0.5 * (layout.nx - 1) as f64 * layout.pitch,
        layout.origin.y + 0.5 * (layout.ny - 1) as f64 * layout.pitch,
    );
    local.grid.center = centre;
    local.grid.pitch = layout.pitch;
    let m: MaxField = match cfg.eval_operator.as_str() {
        "m-v-delta" => {
            let setup = Setup::new(&local, &cfg.field, reach)?;
            let pool = CandidatePool::build(&setup.field, &setup.enumeration, &cfg.sampler)?;
            eval_M_v_delta(&f, &pool.family(cfg.eval_delta)?, &layout)?
        }
        "m-v" => {
            let setup = Setup::new(&local, &cfg.field, reach)?;
            eval_M_v(&f, &setup.field, &layout)?
        }
        "m-kappa" => eval_M_kappa(&f, cfg.kappa, &layout)?,
        "m-k-eps" => {
            let setup = Setup::new(&local, &cfg.field, reach)?;
            let region = setup.enumeration.region.unwrap();
            let domain = BBox::new(layout.origin, layout.max())?.expand(setup.enumeration.top_len.unwrap());
            let e = kakeya_core::maximal::Enumeration { region: Some(region), ..setup.enumeration };
            eval_M_K_eps(&f, cfg.eval_eps, &e, &domain, &layout)?
        }
        other => {
            return Err(LabError::Config(ConfigError::Value {
                key: "eval.operator".into(),
                msg: format!("unknown operator `{other}`"),
            }))
        }
    };
    let values = ScalarField::new(layout, m.values.clone())?;
    save_grid(&values, out.join("maxfield.grid"))?;
    let mut wit = String::with_capacity(8 * m.witness.len());
    for w in &m.witness {
        match w {
            Some(id) => wit.push_str(&id.0.to_string()),
            None => wit.push('-'),
        }
        wit.push('\n');
    }
    write(out, "witness.txt", wit)?;
    let summary = EvalSummary {
        operator: &cfg.eval_operator,
        input: &cfg.eval_input,
        nx: layout.nx,
        ny: layout.ny,
        pitch: layout.pitch,
        max: m.max_value(),
        covered: m.witness.iter().filter(|w| w.is_some()).count(),
    };
    write(out, "eval.json", to_json(&summary))?;
    let finite = m.values.iter().all(|v| v.is_finite());
    Ok(Outcome { lines: vec![format!("{}: max {}", cfg.eval_operator, summary.max)], violation: !finite })
}
