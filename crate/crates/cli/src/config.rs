//! Experiment configuration: one JSON document per run. Unknown keys are
//! rejected so a typo fails loudly instead of silently using a default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use weylcert::{CoefficientModel, PerturbSeq, WindowKind};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Coefficient(#[from] weylcert::CoefficientError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Spectrum,
    Classify,
    Shnol,
    Scan,
    Perturb,
    Wimp,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Solve => "solve",
            CommandKind::Spectrum => "spectrum",
            CommandKind::Classify => "classify",
            CommandKind::Shnol => "shnol",
            CommandKind::Scan => "scan",
            CommandKind::Perturb => "perturb",
            CommandKind::Wimp => "wimp",
        }
    }
}

/// Either a named closed-form family with parameters or explicit tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Builtin {
        family: String,
        #[serde(default)]
        params: Vec<f64>,
    },
    Tabulated {
        a: Vec<f64>,
        b: Vec<f64>,
        #[serde(default)]
        start: i64,
        #[serde(default)]
        edge: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<CoefficientModel, ConfigError> {
        match self {
            ModelSpec::Builtin { family, params } => {
                Ok(CoefficientModel::builtin(family, params)?)
            }
            ModelSpec::Tabulated { a, b, start, edge } => {
                Ok(CoefficientModel::tabulated(a.clone(), b.clone(), *start, *edge)?)
            }
        }
    }
}

/// A λ grid: explicit list or an inclusive arithmetic range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    List(Vec<f64>),
    Range { lo: f64, hi: f64, step: f64 },
}

impl LambdaGrid {
    pub fn values(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            LambdaGrid::List(v) => {
                if v.is_empty() {
                    return Err(ConfigError::Invalid("lambda_grid list is empty".into()));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(ConfigError::Invalid("lambda_grid entries must be finite".into()));
                }
                Ok(v.clone())
            }
            LambdaGrid::Range { lo, hi, step } => {
                if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
                    return Err(ConfigError::Invalid("lambda_grid bounds must be finite".into()));
                }
                if !(*step > 0.0) || hi < lo {
                    return Err(ConfigError::Invalid(format!(
                        "lambda_grid range needs step > 0 and hi >= lo, got lo = {lo}, hi = {hi}, step = {step}"
                    )));
                }
                let mut out = Vec::new();
                let mut k = 0u64;
                // Half-step slack absorbs accumulated rounding at the top end.
                loop {
                    let x = lo + step * k as f64;
                    if x > hi + 0.5 * step {
                        break;
                    }
                    out.push(x.min(*hi));
                    k += 1;
                }
                Ok(out)
            }
        }
    }
}

/// Perturbation sequences for the `perturb` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PerturbSpec {
    Zero,
    Constant { value: f64 },
    InverseLinear { scale: f64 },
    Tabulated { first_index: i64, values: Vec<f64> },
}

impl PerturbSpec {
    pub fn build(&self) -> PerturbSeq {
        match self {
            PerturbSpec::Zero => PerturbSeq::Zero,
            PerturbSpec::Constant { value } => PerturbSeq::Constant(*value),
            PerturbSpec::InverseLinear { scale } => PerturbSeq::InverseLinear { scale: *scale },
            PerturbSpec::Tabulated { first_index, values } => PerturbSeq::Tabulated {
                first_index: *first_index,
                values: values.clone(),
            },
        }
    }
}

/// Cutoff window kinds, serialized under the same labels the CSV uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindSpec {
    Sharp,
    Linear,
    Cosine,
}

impl KindSpec {
    pub fn build(&self) -> WindowKind {
        match self {
            KindSpec::Sharp => WindowKind::Sharp,
            KindSpec::Linear => WindowKind::LinearTaper,
            KindSpec::Cosine => WindowKind::CosineTaper,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<LambdaGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n0: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kinds: Option<Vec<KindSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_cut: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_rms: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<PerturbSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PerturbSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rescale_period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn require_model(&self) -> Result<CoefficientModel, ConfigError> {
        self.model
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("missing key `model`".into()))?
            .build()
    }

    pub fn require_n(&self) -> Result<usize, ConfigError> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(n) => Err(ConfigError::Invalid(format!("`n` must be >= 1, got {n}"))),
            None => Err(ConfigError::Invalid("missing key `n`".into())),
        }
    }

    pub fn require_lambda_grid(&self) -> Result<Vec<f64>, ConfigError> {
        match (&self.lambda, &self.lambda_grid) {
            (Some(_), Some(_)) => {
                Err(ConfigError::Invalid("give `lambda` or `lambda_grid`, not both".into()))
            }
            (Some(l), None) if l.is_finite() => Ok(vec![*l]),
            (Some(l), None) => Err(ConfigError::Invalid(format!("`lambda` = {l} is not finite"))),
            (None, Some(grid)) => grid.values(),
            (None, None) => {
                Err(ConfigError::Invalid("missing key `lambda` or `lambda_grid`".into()))
            }
        }
    }
}
