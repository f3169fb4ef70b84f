//! Flat `key = value` experiment configuration.
//!
//! ```text
//! # comments start with '#'
//! scenario = out_out
//! atten_grid_db = 0, 10, 20
//! n = 200000
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// CR ergodic capacity vs PR ergodic capacity.
    ErEr,
    /// CR ergodic capacity vs PR outage capacity.
    ErOut,
    /// CR outage capacity vs PR ergodic capacity.
    OutEr,
    /// CR outage capacity vs PR outage capacity.
    OutOut,
    Theorems,
}

impl Scenario {
    pub fn cr_outage(self) -> bool {
        matches!(self, Scenario::OutEr | Scenario::OutOut)
    }

    pub fn pr_outage(self) -> bool {
        matches!(self, Scenario::ErOut | Scenario::OutOut)
    }

    pub fn is_sweep(self) -> bool {
        self != Scenario::Theorems
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "er_er" => Ok(Scenario::ErEr),
            "er_out" => Ok(Scenario::ErOut),
            "out_er" => Ok(Scenario::OutEr),
            "out_out" => Ok(Scenario::OutOut),
            "theorems" => Ok(Scenario::Theorems),
            other => Err(format!(
                "unknown scenario '{other}' (expected er_er, er_out, out_er, out_out or theorems)"
            )),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::ErEr => "er_er",
            Scenario::ErOut => "er_out",
            Scenario::OutEr => "out_er",
            Scenario::OutOut => "out_out",
            Scenario::Theorems => "theorems",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Interference threshold, shared by the average and peak constraints.
    pub gamma: f64,
    /// PR average transmit power.
    pub q: f64,
    pub mean_h: f64,
    pub mean_f: f64,
    /// Mean of `g` before attenuation.
    pub mean_g: f64,
    pub atten_grid_db: Vec<f64>,
    pub eps0_pr: f64,
    pub eps0_cr: f64,
    pub n: usize,
    pub seed: u64,
    pub scenario: Scenario,
}

pub const MIN_SAMPLES: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_090_601;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            q: 10.0,
            mean_h: 1.0,
            mean_f: 1.0,
            mean_g: 10.0,
            atten_grid_db: (0..=10).map(|k| 2.0 * k as f64).collect(),
            eps0_pr: 0.2,
            eps0_cr: 0.1,
            n: 1_000_000,
            seed: DEFAULT_SEED,
            scenario: Scenario::ErEr,
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| Error::Config {
        line,
        message: format!("bad value for '{key}': {e}"),
    })
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.as_ref().display()),
        })?;
        Self::parse(&text)
    }

    /// Parses config text on top of the defaults. Unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
                line,
                message: format!("expected 'key = value', got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "gamma" => cfg.gamma = parse(line, key, value)?,
                "Q" => cfg.q = parse(line, key, value)?,
                "mean_h" => cfg.mean_h = parse(line, key, value)?,
                "mean_f" => cfg.mean_f = parse(line, key, value)?,
                "mean_g" => cfg.mean_g = parse(line, key, value)?,
                "atten_grid_db" => {
                    cfg.atten_grid_db = value
                        .split(',')
                        .map(|v| parse(line, key, v.trim()))
                        .collect::<Result<_>>()?
                }
                "eps0_pr" => cfg.eps0_pr = parse(line, key, value)?,
                "eps0_cr" => cfg.eps0_cr = parse(line, key, value)?,
                "n" => cfg.n = parse(line, key, value)?,
                "seed" => cfg.seed = parse(line, key, value)?,
                "scenario" => cfg.scenario = parse(line, key, value)?,
                other => {
                    return Err(Error::Config {
                        line,
                        message: format!("unknown key '{other}'"),
                    })
                }
            }
            cfg.check()
                .map_err(|message| Error::Config { line, message })?;
        }
        Ok(cfg)
    }

    /// Re-checks invariants, e.g. after command-line overrides.
    pub fn validate(&self) -> Result<()> {
        self.check()
            .map_err(|message| Error::Config { line: 0, message })
    }

    fn check(&self) -> std::result::Result<(), String> {
        let positive = [
            ("gamma", self.gamma),
            ("Q", self.q),
            ("mean_h", self.mean_h),
            ("mean_f", self.mean_f),
            ("mean_g", self.mean_g),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be a positive finite number, got {v}"));
            }
        }
        for (name, v) in [("eps0_pr", self.eps0_pr), ("eps0_cr", self.eps0_cr)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.atten_grid_db.is_empty() || self.atten_grid_db.iter().any(|a| !a.is_finite()) {
            return Err("atten_grid_db must be a non-empty list of finite values".into());
        }
        if self.n < MIN_SAMPLES {
            return Err(format!("n must be at least {MIN_SAMPLES}, got {}", self.n));
        }
        Ok(())
    }
}
