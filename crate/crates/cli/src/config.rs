//! JSON experiment configuration and its validation.

use std::path::{Path, PathBuf};

use corrmimo_core::channel::{CanonicalModel, ChannelModel, SeparableModel};
use corrmimo_core::link::Constellation;
use corrmimo_core::matcore::RMatrix;
use corrmimo_core::metrics::Scheme;
use corrmimo_core::precoding::Objective;
use corrmimo_core::rng::{random_unitary, stream};
use corrmimo_core::CMatrix;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_experiment")]
    pub experiment: String,
    /// One channel, or several named ones via `models`.
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub models: Vec<NamedModel>,
    pub m: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub constellation: ConstellationSpec,
    pub schemes: Vec<SchemeSpec>,
    /// When set, relative losses of every other scheme against it are added.
    #[serde(default)]
    pub benchmark: Option<SchemeSpec>,
    pub output: PathBuf,
    /// Treat optimizer non-convergence as a failure.
    #[serde(default)]
    pub strict: bool,
}

fn default_experiment() -> String {
    "run".into()
}

#[derive(Debug, Clone, Deserialize)]
pub struct NamedModel {
    pub name: String,
    #[serde(flatten)]
    pub model: ModelSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Separable {
        lambda_t: Vec<f64>,
        lambda_r: Vec<f64>,
        #[serde(default)]
        unitary: UnitarySpec,
    },
    Canonical {
        /// Row-major, one inner array per receive index.
        variance_profile: Vec<Vec<f64>>,
        #[serde(default)]
        unitary: UnitarySpec,
    },
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitarySpec {
    #[default]
    Identity,
    /// Haar bases drawn from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(untagged)]
pub enum ConstellationSpec {
    #[default]
    #[serde(skip)]
    Default,
    Preset(Preset),
    Custom { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Bpsk,
    Qpsk,
}

impl ConstellationSpec {
    pub fn resolve(&self) -> Result<Constellation, CliError> {
        match *self {
            ConstellationSpec::Default | ConstellationSpec::Preset(Preset::Qpsk) => Ok(Constellation::qpsk()),
            ConstellationSpec::Preset(Preset::Bpsk) => Ok(Constellation::bpsk()),
            ConstellationSpec::Custom { alpha, beta } => {
                Constellation::new(alpha, beta).map_err(|e| CliError::Config(format!("field `constellation`: {e}")))
            }
        }
    }
}

/// Scheme names as strings, or a one-key object for parameterized schemes.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SchemeSpec {
    Name(String),
    StatFixed { stat_fixed: AlphaParam },
    PerfFixed { perf_fixed: PerfFixedParam },
    StatOpt { stat_opt: StatOptParam },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaParam {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_alpha() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfFixedParam {
    pub lambda: Vec<f64>,
    #[serde(default)]
    pub convex: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatOptParam {
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_batch() -> usize {
    2000
}

fn default_max_iters() -> usize {
    10_000
}

/// A scheme ready to evaluate. `StatOpt` is resolved per SNR point.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedScheme {
    Fixed(Scheme),
    StatOpt { batch: usize, max_iters: usize },
}

impl ResolvedScheme {
    pub fn label(&self) -> &'static str {
        match self {
            ResolvedScheme::Fixed(s) => s.name(),
            ResolvedScheme::StatOpt { .. } => "stat_opt",
        }
    }
}

impl SchemeSpec {
    pub fn resolve(&self, field: &str) -> Result<ResolvedScheme, CliError> {
        let bad = |msg: String| CliError::Config(format!("field `{field}`: {msg}"));
        let fixed = ResolvedScheme::Fixed;
        Ok(match self {
            SchemeSpec::Name(n) => match n.as_str() {
                "perf_unconst" => fixed(Scheme::PerfUnconst),
                "perf_semi" => fixed(Scheme::PerfSemi),
                "perf_equalized" => fixed(Scheme::PerfEqualized),
                "stat_semi" => fixed(Scheme::StatSemi),
                "stat_fixed" => fixed(Scheme::StatFixed { alpha: default_alpha() }),
                "stat_opt" => ResolvedScheme::StatOpt { batch: default_batch(), max_iters: default_max_iters() },
                other => return Err(bad(format!("unknown scheme `{other}`"))),
            },
            SchemeSpec::StatFixed { stat_fixed } => {
                if !(stat_fixed.alpha > 1.0) {
                    return Err(bad(format!("stat_fixed.alpha must exceed 1, got {}", stat_fixed.alpha)));
                }
                fixed(Scheme::StatFixed { alpha: stat_fixed.alpha })
            }
            SchemeSpec::PerfFixed { perf_fixed } => {
                if perf_fixed.lambda.iter().any(|x| !(*x >= 0.0)) {
                    return Err(bad("perf_fixed.lambda must be non-negative".into()));
                }
                let objective = if perf_fixed.convex { Objective::SchurConvex } else { Objective::SchurConcave };
                fixed(Scheme::PerfFixed { lambda: perf_fixed.lambda.clone(), objective })
            }
            SchemeSpec::StatOpt { stat_opt } => {
                if stat_opt.batch < 100 || stat_opt.max_iters == 0 {
                    return Err(bad("stat_opt needs batch >= 100 and max_iters >= 1".into()));
                }
                ResolvedScheme::StatOpt { batch: stat_opt.batch, max_iters: stat_opt.max_iters }
            }
        })
    }
}

impl ModelSpec {
    pub fn build(&self, field: &str) -> Result<ChannelModel, CliError> {
        let bad = |e: corrmimo_core::Error| CliError::Config(format!("field `{field}`: {e}"));
        match self {
            ModelSpec::Separable { lambda_t, lambda_r, unitary } => {
                let (ut, ur) = bases(lambda_t.len(), lambda_r.len(), *unitary);
                Ok(SeparableModel::new(ut, ur, lambda_t.clone(), lambda_r.clone()).map_err(bad)?.into())
            }
            ModelSpec::Canonical { variance_profile, unitary } => {
                let v = RMatrix::from_rows(variance_profile).map_err(bad)?;
                let (ut, ur) = bases(v.cols(), v.rows(), *unitary);
                Ok(CanonicalModel::new(ut, ur, v).map_err(bad)?.into())
            }
        }
    }
}

fn bases(n_t: usize, n_r: usize, u: UnitarySpec) -> (CMatrix, CMatrix) {
    match u {
        UnitarySpec::Identity => (CMatrix::identity(n_t), CMatrix::identity(n_r)),
        UnitarySpec::Random(seed) => (random_unitary(n_t, &mut stream(seed, 0)), random_unitary(n_r, &mut stream(seed, 1))),
    }
}

/// Fully checked experiment.
#[derive(Debug)]
pub struct ValidatedConfig {
    pub experiment: String,
    pub models: Vec<(Option<String>, ChannelModel)>,
    pub m: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub constellation: Constellation,
    pub schemes: Vec<ResolvedScheme>,
    pub benchmark: Option<ResolvedScheme>,
    pub output: PathBuf,
    pub strict: bool,
}

pub fn load(path: &Path) -> Result<ValidatedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, path.parent())
}

/// Parses and validates; relative output paths resolve against `base`.
pub fn parse(text: &str, base: Option<&Path>) -> Result<ValidatedConfig, CliError> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    validate(cfg, base)
}

pub fn validate(cfg: ExperimentConfig, base: Option<&Path>) -> Result<ValidatedConfig, CliError> {
    let bad = |field: &str, msg: &str| Err(CliError::Config(format!("field `{field}`: {msg}")));
    if cfg.experiment.is_empty() || cfg.experiment.contains([',', '\n', '\r']) {
        return bad("experiment", "must be non-empty without commas or newlines");
    }
    if cfg.trials == 0 {
        return bad("trials", "must be at least 1");
    }
    if cfg.m == 0 {
        return bad("m", "must be at least 1");
    }
    if cfg.snr_grid_db.is_empty() {
        return bad("snr_grid_db", "must not be empty");
    }
    if cfg.snr_grid_db.iter().any(|x| !x.is_finite()) || cfg.snr_grid_db.windows(2).any(|w| !(w[1] > w[0])) {
        return bad("snr_grid_db", "must be finite and strictly increasing");
    }
    if cfg.schemes.is_empty() {
        return bad("schemes", "must list at least one scheme");
    }
    let mut models = Vec::new();
    match (&cfg.model, cfg.models.is_empty()) {
        (Some(_), false) => return bad("model", "give either `model` or `models`, not both"),
        (None, true) => return bad("model", "missing channel model"),
        (Some(m), true) => models.push((None, m.build("model")?)),
        (None, false) => {
            for (i, nm) in cfg.models.iter().enumerate() {
                if nm.name.is_empty() || nm.name.contains([',', '\n', '\r']) {
                    return bad(&format!("models[{i}].name"), "must be non-empty without commas or newlines");
                }
                if models.iter().any(|(n, _)| n.as_deref() == Some(nm.name.as_str())) {
                    return bad(&format!("models[{i}].name"), "duplicate name");
                }
                models.push((Some(nm.name.clone()), nm.model.build(&format!("models[{i}]"))?));
            }
        }
    }
    for (i, (_, model)) in models.iter().enumerate() {
        if cfg.m > model.n_t().min(model.n_r()) {
            return bad("m", &format!("{} streams exceed the dimensions of model {}", cfg.m, i));
        }
    }
    let schemes = cfg
        .schemes
        .iter()
        .enumerate()
        .map(|(i, s)| s.resolve(&format!("schemes[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, s) in schemes.iter().enumerate() {
        if let ResolvedScheme::Fixed(Scheme::PerfFixed { lambda, .. }) = s {
            if lambda.len() != cfg.m {
                return bad(&format!("schemes[{i}]"), "perf_fixed.lambda length must equal m");
            }
        }
    }
    let benchmark = cfg.benchmark.as_ref().map(|b| b.resolve("benchmark")).transpose()?;
    let output = match base {
        Some(b) if cfg.output.is_relative() => b.join(&cfg.output),
        _ => cfg.output.clone(),
    };
    if output.as_os_str().is_empty() {
        return bad("output", "must be a file path");
    }
    Ok(ValidatedConfig {
        experiment: cfg.experiment,
        models,
        m: cfg.m,
        snr_grid_db: cfg.snr_grid_db,
        trials: cfg.trials,
        seed: cfg.seed,
        constellation: cfg.constellation.resolve()?,
        schemes,
        benchmark,
        output,
        strict: cfg.strict,
    })
}
