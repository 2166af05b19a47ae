//! Plain-text sweep configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Lists are comma
//! separated. Recognised keys:
//!
//! | key                 | value                                   | default          |
//! |---------------------|-----------------------------------------|------------------|
//! | `lambda`            | list of couplings in `[0, 1)`           | required         |
//! | `j_min`, `j_max`    | spin range, multiples of 1/2            | required         |
//! | `j_step`            | positive multiple of 1/2                | `0.5`            |
//! | `blocks`            | subset of `pp, pm, mp, mm`              | all four         |
//! | `window`            | `standard` or a fixed window size       | `standard`       |
//! | `dense_threshold`   | block dimension switching to Lanczos    | `512`            |
//! | `lanczos_tol`       | Ritz convergence tolerance              | `1e-11`          |
//! | `emax`, `points`    | statistics grid                         | `3`, `301`       |
//! | `out`               | output directory                        | none             |

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::eigen::SolverConfig;
use crate::model::BlockLabel;
use crate::spinops::TwoJ;
use crate::stats::WindowPolicy;

/// Sweeps reaching beyond this spin are flagged as long-running.
pub const LONG_RUNNING_J: f64 = 150.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub j_min: f64,
    pub j_max: f64,
    pub j_step: f64,
    pub blocks: Vec<BlockLabel>,
    pub window: WindowPolicy,
    pub dense_threshold: usize,
    pub lanczos_tol: f64,
    pub emax: f64,
    pub points: usize,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            lambdas: Vec::new(),
            j_min: 0.0,
            j_max: 0.0,
            j_step: 0.5,
            blocks: BlockLabel::ALL.to_vec(),
            window: WindowPolicy::Standard,
            dense_threshold: solver.dense_threshold,
            lanczos_tol: solver.lanczos.tol,
            emax: 3.0,
            points: 301,
            out: None,
        }
    }
}

impl SweepConfig {
    pub fn long_running(&self) -> bool {
        self.j_max > LONG_RUNNING_J
    }

    /// Spins from `j_min` to `j_max` in steps of `j_step`.
    pub fn spins(&self) -> Vec<TwoJ> {
        let (lo, hi, step) = (half_units(self.j_min), half_units(self.j_max), half_units(self.j_step).max(1));
        (lo..=hi).step_by(step as usize).map(TwoJ::new).collect()
    }

    pub fn solver(&self) -> SolverConfig {
        let mut cfg = SolverConfig { dense_threshold: self.dense_threshold, ..SolverConfig::default() };
        cfg.lanczos.tol = self.lanczos_tol;
        cfg
    }
}

fn half_units(j: f64) -> u32 {
    (2.0 * j).round() as u32
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {key} {message}")]
    Range { line: usize, key: String, message: String },
    #[error("missing required key '{0}'")]
    Missing(&'static str),
    #[error("{0}")]
    Inconsistent(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Every problem found in one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepErrors(pub Vec<SweepError>);

impl fmt::Display for SweepErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for SweepErrors {}

pub fn load_sweep(path: &Path) -> Result<SweepConfig, SweepErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SweepErrors(vec![SweepError::Io { path: path.display().to_string(), message: e.to_string() }]))?;
    parse_sweep(&text)
}

pub fn parse_sweep(text: &str) -> Result<SweepConfig, SweepErrors> {
    let mut cfg = SweepConfig::default();
    let mut errors = Vec::new();
    let mut seen = BTreeSet::new();
    let mut lambda_line = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            errors.push(SweepError::Parse { line, message: format!("expected 'key = value', found '{content}'") });
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            errors.push(SweepError::Parse { line, message: format!("duplicate key '{key}'") });
            continue;
        }
        let parse_err = |message: String| SweepError::Parse { line, message };
        let range_err = |message: &str| SweepError::Range { line, key: key.to_string(), message: message.to_string() };
        let number = |v: &str| v.parse::<f64>().map_err(|_| parse_err(format!("'{v}' is not a number")));
        let result: Result<(), SweepError> = (|| {
            match key {
                "lambda" => {
                    lambda_line = Some(line);
                    for item in value.split(',') {
                        let l = number(item.trim())?;
                        if !(0.0..=1.0).contains(&l) {
                            return Err(range_err(&format!("= {l} lies outside [0, 1]")));
                        }
                        cfg.lambdas.push(l);
                    }
                }
                "j_min" | "j_max" | "j_step" => {
                    let j = number(value)?;
                    if j < 0.0 || (2.0 * j).fract() != 0.0 {
                        return Err(range_err("must be a non-negative multiple of 1/2"));
                    }
                    match key {
                        "j_min" => cfg.j_min = j,
                        "j_max" => cfg.j_max = j,
                        _ if j == 0.0 => return Err(range_err("must be positive")),
                        _ => cfg.j_step = j,
                    }
                }
                "blocks" => {
                    cfg.blocks = value
                        .split(',')
                        .map(|b| b.trim().parse::<BlockLabel>().map_err(parse_err))
                        .collect::<Result<_, _>>()?;
                }
                "window" => {
                    cfg.window = if value == "standard" {
                        WindowPolicy::Standard
                    } else {
                        let m: usize = value
                            .parse()
                            .map_err(|_| parse_err(format!("window '{value}' is neither 'standard' nor an integer")))?;
                        if m < 2 {
                            return Err(range_err("must hold at least two eigenvalues"));
                        }
                        WindowPolicy::Fixed(m)
                    };
                }
                "dense_threshold" => {
                    cfg.dense_threshold =
                        value.parse().map_err(|_| parse_err(format!("'{value}' is not an integer")))?;
                }
                "lanczos_tol" => {
                    let t = number(value)?;
                    if !(t > 0.0 && t < 1e-3) {
                        return Err(range_err("must lie in (0, 1e-3)"));
                    }
                    cfg.lanczos_tol = t;
                }
                "emax" => {
                    let e = number(value)?;
                    if !(e > 0.0 && e.is_finite()) {
                        return Err(range_err("must be positive"));
                    }
                    cfg.emax = e;
                }
                "points" => {
                    let p: usize = value.parse().map_err(|_| parse_err(format!("'{value}' is not an integer")))?;
                    if p < 2 {
                        return Err(range_err("must be at least 2"));
                    }
                    cfg.points = p;
                }
                "out" => cfg.out = Some(PathBuf::from(value)),
                other => return Err(parse_err(format!("unknown key '{other}'"))),
            }
            Ok(())
        })();
        if let Err(e) = result {
            errors.push(e);
        }
    }
    for key in ["lambda", "j_min", "j_max"] {
        if !seen.contains(key) {
            errors.push(SweepError::Missing(key));
        }
    }
    if let Some(line) = lambda_line {
        if cfg.lambdas.contains(&1.0) {
            errors.push(SweepError::Range {
                line,
                key: "lambda".into(),
                message: "= 1 is excluded: the spectrum there is highly degenerate and carries no generic statistics"
                    .into(),
            });
        }
    }
    if seen.contains("j_min") && seen.contains("j_max") && cfg.j_min > cfg.j_max {
        errors.push(SweepError::Inconsistent(format!("j_min = {} exceeds j_max = {}", cfg.j_min, cfg.j_max)));
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(SweepErrors(errors))
    }
}
