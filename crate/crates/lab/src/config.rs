//! Flat `key = value` experiment configuration.
//!
//! One entry per line, dotted keys (`field.kind`, `sweep.deltas`), lists as
//! comma-separated values, `#` starts a comment. Unknown keys are rejected so
//! a typo never silently falls back to a default.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use kakeya_core::geometry::Point;
use kakeya_core::sampling::{Sampler, Strategy};
use kakeya_core::vectorfield::{BBox, FieldKind, VectorField};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, ConfigError>;

const KEYS: &[&str] = &[
    "field.kind",
    "field.angle",
    "field.rate",
    "field.offset",
    "field.amp",
    "field.freq",
    "field.phase",
    "field.alpha",
    "field.period",
    "field.terms",
    "field.cap",
    "grid.n",
    "grid.pitch",
    "grid.center",
    "enum.j_max",
    "enum.min_wid_cells",
    "enum.orient_factor",
    "enum.center_factor",
    "sampler.strategy",
    "sampler.refine",
    "sampler.seed",
    "sweep.deltas",
    "sweep.radii",
    "holder.alpha",
    "holder.levels",
    "holder.delta",
    "holder.radius",
    "holder.amp",
    "holder.min_wid_cells",
    "campaign.instances",
    "campaign.seeds",
    "campaign.max_rects",
    "campaign.delta",
    "kappa",
    "seed",
    "verify.family",
    "verify.log",
    "eval.operator",
    "eval.input",
    "eval.delta",
    "eval.eps",
];

/// Raw key/value pairs, in key order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: k + 1, msg: format!("expected `key = value`, got `{line}`") });
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey(key.to_string()));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(ConfigError::Syntax { line: k + 1, msg: format!("duplicate key `{key}`") });
            }
        }
        Ok(RawConfig { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey(key.to_string()));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn parse_one<T: std::str::FromStr>(key: &str, s: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        s.trim().parse().map_err(|e: T::Err| ConfigError::Value { key: key.into(), msg: format!("`{s}`: {e}") })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get_str(key).map(|s| Self::parse_one(key, s)).transpose()
    }

    pub fn get_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn get_list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(s) = self.get_str(key) else { return Ok(None) };
        s.split(',').map(|t| Self::parse_one(key, t)).collect::<Result<Vec<T>>>().map(Some)
    }
}

fn bad(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.into(), msg: msg.into() }
}

fn positive(key: &str, x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(bad(key, format!("must be positive, got {x}")))
    }
}

/// Field parameters; the domain is supplied by the experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub cap: Option<f64>,
}

impl FieldSpec {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let f = |k: &str, d: f64| raw.get_or(k, d);
        let kind = match raw.get_str("field.kind").unwrap_or("sinusoidal") {
            "constant" => FieldKind::Constant { angle: f("field.angle", 0.0)? },
            "linear-angle" => FieldKind::LinearAngle { rate: f("field.rate", 1.0)?, offset: f("field.offset", 0.0)? },
            "sinusoidal" => FieldKind::Sinusoidal {
                amp: f("field.amp", 0.02)?,
                freq: f("field.freq", 50.0)?,
                phase: f("field.phase", 0.0)?,
                offset: f("field.offset", 0.0)?,
            },
            "holder" => FieldKind::Holder {
                alpha: f("field.alpha", 0.5)?,
                amp: f("field.amp", 0.5)?,
                period: f("field.period", 1.0)?,
                terms: raw.get_or("field.terms", 8)?,
            },
            other => return Err(bad("field.kind", format!("unknown kind `{other}`"))),
        };
        let cap = raw.get("field.cap")?.map(|c| positive("field.cap", c)).transpose()?;
        Ok(FieldSpec { kind, cap })
    }

    pub fn build(&self, domain: BBox) -> kakeya_core::Result<VectorField> {
        let v = VectorField::new(self.kind.clone(), domain)?;
        match self.cap {
            Some(c) => v.with_length_cap(c),
            None => Ok(v),
        }
    }

    /// The length cap the field will carry, before a domain is chosen.
    pub fn length_cap(&self) -> Result<f64> {
        let probe = BBox::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0)).unwrap();
        let v = self.build(probe).map_err(|e| bad("field.kind", e.to_string()))?;
        v.finite_length_cap().map_err(|_| bad("field.cap", "required for fields without a finite Lipschitz constant"))
    }
}

/// Grid placement. The pitch defaults to `cap / 64`, so the longest rectangle
/// spans 64 cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub pitch: f64,
    pub center: Point,
}

/// Everything an experiment needs, with defaults filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub field: FieldSpec,
    pub grid: GridSpec,
    pub j_max: u32,
    pub min_wid_cells: f64,
    pub orient_factor: f64,
    pub center_factor: f64,
    pub sampler: Sampler,
    pub deltas: Vec<f64>,
    pub radii: Vec<f64>,
    pub holder_alpha: f64,
    pub holder_levels: Vec<u32>,
    pub holder_delta: f64,
    pub holder_radius: f64,
    pub holder_amp: f64,
    pub holder_min_wid_cells: f64,
    pub instances: usize,
    pub seeds: usize,
    pub max_rects: usize,
    pub campaign_delta: f64,
    pub kappa: u32,
    pub seed: u64,
    pub verify_family: Option<PathBuf>,
    /// Archived selection log to replay instead of the fresh one.
    pub verify_log: Option<PathBuf>,
    pub eval_operator: String,
    pub eval_input: String,
    pub eval_delta: f64,
    pub eval_eps: f64,
}

fn delta_in_range(key: &str, d: f64) -> Result<f64> {
    if d > 0.0 && d <= 1.0 {
        Ok(d)
    } else {
        Err(bad(key, format!("density thresholds lie in (0, 1], got {d}")))
    }
}

impl ExperimentConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let field = FieldSpec::from_raw(raw)?;
        let cap = field.length_cap()?;
        let n: usize = raw.get_or("grid.n", 512)?;
        if n < 2 {
            return Err(bad("grid.n", "need at least 2 nodes per side"));
        }
        let pitch = positive("grid.pitch", raw.get_or("grid.pitch", cap / 64.0)?)?;
        let center = match raw.get_list::<f64>("grid.center")? {
            None => Point::new(0.0, 0.0),
            Some(c) if c.len() == 2 => Point::new(c[0], c[1]),
            Some(_) => return Err(bad("grid.center", "expected `x, y`")),
        };
        let strategy = match raw.get_str("sampler.strategy").unwrap_or("quasi-random") {
            "grid" => Strategy::Grid,
            "quasi-random" => Strategy::QuasiRandom,
            other => return Err(bad("sampler.strategy", format!("unknown strategy `{other}`"))),
        };
        let seed: u64 = raw.get_or("seed", 0)?;
        let sampler = Sampler::new(strategy, raw.get_or("sampler.seed", seed)?)
            .with_refinement(raw.get_or("sampler.refine", 1.0)?)
            .map_err(|e| bad("sampler.refine", e.to_string()))?;
        let deltas = raw.get_list("sweep.deltas")?.unwrap_or_else(|| vec![0.5, 0.25, 0.125, 0.0625, 0.03125]);
        for &d in &deltas {
            delta_in_range("sweep.deltas", d)?;
        }
        let radii: Vec<f64> = raw.get_list("sweep.radii")?.unwrap_or_else(|| vec![4.0, 8.0, 16.0]);
        for &r in &radii {
            positive("sweep.radii", r)?;
        }
        let holder_alpha = raw.get_or("holder.alpha", 0.5)?;
        if !(holder_alpha > 0.0 && holder_alpha <= 1.0) {
            return Err(bad("holder.alpha", format!("must lie in (0, 1], got {holder_alpha}")));
        }
        let holder_levels: Vec<u32> = raw.get_list("holder.levels")?.unwrap_or_else(|| vec![6, 7, 8, 9, 10]);
        if holder_levels.is_empty() || holder_levels.iter().any(|&l| l == 0 || l > 30) {
            return Err(bad("holder.levels", "levels lie in 1..=30"));
        }
        let kappa: u32 = raw.get_or("kappa", 100)?;
        if kappa < 8 {
            return Err(bad("kappa", format!("must be at least 8, got {kappa}")));
        }
        let positive_count = |key: &str, d: usize| -> Result<usize> {
            let x: usize = raw.get_or(key, d)?;
            if x == 0 {
                Err(bad(key, "must be positive"))
            } else {
                Ok(x)
            }
        };
        Ok(ExperimentConfig {
            field,
            grid: GridSpec { n, pitch, center },
            j_max: raw.get_or("enum.j_max", 3)?,
            min_wid_cells: positive("enum.min_wid_cells", raw.get_or("enum.min_wid_cells", 1.0)?)?,
            orient_factor: positive("enum.orient_factor", raw.get_or("enum.orient_factor", 0.5)?)?,
            center_factor: positive("enum.center_factor", raw.get_or("enum.center_factor", 0.5)?)?,
            sampler,
            deltas,
            radii,
            holder_alpha,
            holder_levels,
            holder_delta: delta_in_range("holder.delta", raw.get_or("holder.delta", 0.25)?)?,
            holder_radius: positive("holder.radius", raw.get_or("holder.radius", 8.0)?)?,
            holder_amp: positive("holder.amp", raw.get_or("holder.amp", 0.5)?)?,
            holder_min_wid_cells: positive("holder.min_wid_cells", raw.get_or("holder.min_wid_cells", 4.0)?)?,
            instances: positive_count("campaign.instances", 40)?,
            seeds: positive_count("campaign.seeds", 5)?,
            max_rects: positive_count("campaign.max_rects", 500)?,
            campaign_delta: delta_in_range("campaign.delta", raw.get_or("campaign.delta", 0.25)?)?,
            kappa,
            seed,
            verify_family: raw.get_str("verify.family").map(PathBuf::from),
            verify_log: raw.get_str("verify.log").map(PathBuf::from),
            eval_operator: raw.get_str("eval.operator").unwrap_or("m-v-delta").to_string(),
            eval_input: raw.get_str("eval.input").unwrap_or("disc:8").to_string(),
            eval_delta: delta_in_range("eval.delta", raw.get_or("eval.delta", 0.5)?)?,
            eval_eps: positive("eval.eps", raw.get_or("eval.eps", 0.125)?)?,
        })
    }

    /// Default configuration.
    pub fn defaults() -> Self {
        Self::from_raw(&RawConfig::default()).expect("defaults are valid")
    }
}
