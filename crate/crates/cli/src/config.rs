//! JSON experiment and problem files.

use std::env;
use std::fs;
use std::path::{Path, PathBuf};

use fixiter::{ContractionMap, ControlSequences, DdeProblem, Point, Scalar, SchemeId, StopRule};
use serde::{Deserialize, Deserializer};

use crate::error::CliError;
use crate::expr::Expr;

pub const MAX_ITERS_ENV: &str = "FIXITER_MAX_ITERS";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub map: MapSpec,
    pub x0: f64,
    #[serde(default)]
    pub controls: ControlsSpec,
    #[serde(deserialize_with = "scheme_list")]
    pub schemes: Vec<SchemeId>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    #[serde(default)]
    pub output: Option<OutputSpec>,
    /// Tail length for rate comparison.
    #[serde(default)]
    pub tail_window: Option<usize>,
}

fn scheme_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SchemeId>, D::Error> {
    Vec::<String>::deserialize(d)?
        .iter()
        .map(|s| s.parse().map_err(serde::de::Error::custom))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MapSpec {
    /// `T x = (a x + c)^(1/3)`.
    Sahu {
        #[serde(default = "default_a")]
        a: f64,
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default)]
        delta: Option<f64>,
    },
    /// Scalar map given by an expression in `x`.
    Expr {
        expr: String,
        delta: f64,
        #[serde(default)]
        fixed_point: Option<f64>,
    },
}

fn default_a() -> f64 {
    3.0
}

fn default_c() -> f64 {
    18.0
}

impl MapSpec {
    pub fn build<S: Scalar>(&self) -> Result<ContractionMap<S>, CliError> {
        match self {
            MapSpec::Sahu { a, c, delta } => {
                let base = if *a == 3.0 && *c == 18.0 {
                    ContractionMap::sahu()
                } else {
                    ContractionMap::cube_root_affine(S::lit(*a), S::lit(*c))?
                };
                match delta {
                    None => Ok(base),
                    Some(d) => {
                        let (a, c) = (S::lit(*a), S::lit(*c));
                        let map = ContractionMap::scalar(S::lit(*d), move |x| (a * x + c).cbrt())?;
                        Ok(match base.fixed_point() {
                            Some(p) => map.with_fixed_point(p.clone()),
                            None => map,
                        })
                    }
                }
            }
            MapSpec::Expr { expr, delta, fixed_point } => {
                let e = Expr::parse(expr, &["x"])?;
                let map = ContractionMap::scalar(S::lit(*delta), move |x| e.eval(&[x]))?;
                Ok(match fixed_point {
                    Some(p) => map.with_fixed_point(Point::Scalar(S::lit(*p))),
                    None => map,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlsSpec {
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
}

impl Default for ControlsSpec {
    fn default() -> Self {
        Self { eta0: 0.5, eta1: 0.5, eta2: 0.5 }
    }
}

impl ControlsSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("eta0", self.eta0), ("eta1", self.eta1), ("eta2", self.eta2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CliError::Config(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn build<S: Scalar>(&self) -> ControlSequences<S> {
        ControlSequences::constant(S::lit(self.eta0), S::lit(self.eta1), S::lit(self.eta2))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub max_iters: Option<usize>,
    pub abs_tol: Option<f64>,
    pub target_tol: Option<f64>,
}

/// Iteration cap used when a file gives none: `FIXITER_MAX_ITERS` or 100.
pub fn default_max_iters() -> Result<usize, CliError> {
    match env::var(MAX_ITERS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| CliError::Config(format!("{MAX_ITERS_ENV} = {v:?} is not a positive integer"))),
        Err(_) => Ok(StopRule::default().max_iters),
    }
}

impl StopSpec {
    pub fn build(&self) -> Result<StopRule, CliError> {
        let defaults = StopRule::default();
        let rule = StopRule {
            max_iters: match self.max_iters {
                Some(n) => n,
                None => default_max_iters()?,
            },
            abs_tol: self.abs_tol.unwrap_or(defaults.abs_tol),
            target_tol: self.target_tol,
        };
        rule.validate()?;
        Ok(rule)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    #[default]
    F64,
    /// Ten significant decimal digits, rounded after every operation.
    Decimal10,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: Format,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let config: Self = read_json(path)?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schemes.is_empty() {
            return Err(CliError::Config("schemes must not be empty".into()));
        }
        if !self.x0.is_finite() {
            return Err(CliError::Config("x0 must be finite".into()));
        }
        if self.tail_window == Some(0) {
            return Err(CliError::Config("tail_window must be at least 1".into()));
        }
        self.controls.validate()
    }
}

/// A delay problem file; `rhs` is an expression in `t, u, v` and `history`
/// an expression in `t`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DdeProblemFile {
    pub t0: f64,
    pub b: f64,
    pub tau: f64,
    pub lipschitz: f64,
    pub rhs: String,
    pub history: String,
    #[serde(default)]
    pub controls: ControlsSpec,
    #[serde(default)]
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl DdeProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let file: Self = read_json(path)?;
        file.controls.validate()?;
        Ok(file)
    }

    pub fn build(&self) -> Result<DdeProblem<f64>, CliError> {
        let rhs = Expr::parse(&self.rhs, &["t", "u", "v"])?;
        let history = Expr::parse(&self.history, &["t"])?;
        Ok(DdeProblem::new(
            self.t0,
            self.b,
            self.tau,
            self.lipschitz,
            move |t, u, v| rhs.eval(&[t, u, v]),
            move |t| history.eval(&[t]),
        )?)
    }
}
