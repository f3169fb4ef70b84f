//! Attenuation sweeps, the theorem-verification suite, and CSV output.
//!
//! Every grid point reuses the configured seed, so the `h` and `f` draws are
//! shared across the sweep and the `g` draws at attenuation `a` are exactly
//! `10^(-a/10)` times the baseline draws. The peak-interference PR columns
//! are then identical on every row.

mod config;
mod csv;
mod sweep;
mod theorems;

pub use config::{ExperimentConfig, Scenario, DEFAULT_SEED, MIN_SAMPLES};
pub use csv::{emit_csv, write_csv, COLUMNS};
pub use sweep::{run_sweep, SweepRow};
pub use theorems::{verify_theorems, Check, TheoremReport, Verdict};

use crate::cr_policy::{calibrate_er_aip, calibrate_out_aip, interference_series, CrPolicy};
use crate::error::{Error, Result};
use crate::fading::{sample_joint, FadingBatch, GainDistribution};
use crate::pr_policy::{effective_states, EffectiveState};

/// Which CR rule generates the average-constraint interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrObjective {
    Ergodic,
    Outage,
}

impl CrObjective {
    pub fn label(self) -> &'static str {
        match self {
            CrObjective::Ergodic => "cr=ergodic",
            CrObjective::Outage => "cr=outage",
        }
    }
}

/// One attenuation point: the batch, the CR rule pair, and the PR states
/// under each interference series.
#[derive(Debug, Clone)]
pub struct GridPoint {
    pub atten_db: f64,
    pub batch: FadingBatch,
    pub cr_aip: CrPolicy,
    pub cr_pip: CrPolicy,
    pub states_aip: Vec<EffectiveState>,
    pub states_pip: Vec<EffectiveState>,
}

impl GridPoint {
    /// Builds a point with the config's exponential `f`.
    pub fn build(cfg: &ExperimentConfig, atten_db: f64, objective: CrObjective) -> Result<Self> {
        let df = GainDistribution::exponential(cfg.mean_f)?;
        Self::build_with(cfg, atten_db, objective, &df, cfg.n)
    }

    /// Builds a point with a custom PR-link law and sample count.
    pub fn build_with(
        cfg: &ExperimentConfig,
        atten_db: f64,
        objective: CrObjective,
        df: &GainDistribution,
        n: usize,
    ) -> Result<Self> {
        Self::build_inner(cfg, atten_db, objective, df, n).map_err(|e| Error::AtGridPoint {
            atten_db,
            source: Box::new(e),
        })
    }

    fn build_inner(
        cfg: &ExperimentConfig,
        atten_db: f64,
        objective: CrObjective,
        df: &GainDistribution,
        n: usize,
    ) -> Result<Self> {
        let dh = GainDistribution::exponential(cfg.mean_h)?;
        let dg = GainDistribution::exponential(cfg.mean_g)?.apply_attenuation(atten_db);
        let batch = sample_joint(&dh, &dg, df, n, cfg.seed)?;
        let cr_aip = match objective {
            CrObjective::Ergodic => calibrate_er_aip(&batch, cfg.gamma)?,
            CrObjective::Outage => calibrate_out_aip(&batch, cfg.gamma, cfg.eps0_cr)?,
        };
        let cr_pip = CrPolicy::Pip { gamma_p: cfg.gamma };
        let states_aip = effective_states(&batch.f, &interference_series(&batch, &cr_aip))?;
        let states_pip = effective_states(&batch.f, &interference_series(&batch, &cr_pip))?;
        Ok(Self {
            atten_db,
            batch,
            cr_aip,
            cr_pip,
            states_aip,
            states_pip,
        })
    }

    pub fn interference_aip(&self) -> Vec<f64> {
        self.states_aip.iter().map(|s| s.interference).collect()
    }

    pub fn interference_pip(&self) -> Vec<f64> {
        self.states_pip.iter().map(|s| s.interference).collect()
    }
}

pub(crate) fn at_point<T>(atten_db: f64, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::AtGridPoint { .. } => e,
        e => Error::AtGridPoint {
            atten_db,
            source: Box::new(e),
        },
    })
}
