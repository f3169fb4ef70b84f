use log::info;

use super::{at_point, CrObjective, ExperimentConfig, GridPoint};
use crate::capacity::{ergodic_capacity, outage_capacity, CapacityEstimate, OutageFamily};
use crate::cr_policy::{cr_ergodic_capacity, cr_outage_capacity};
use crate::error::{Error, Result};
use crate::pr_policy::{calibrate_wf, PrPolicy};

/// One attenuation point of a sweep. `pr_adapt_*` is water-filling when the
/// PR targets ergodic capacity and truncated inversion when it targets
/// outage capacity.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub atten_db: f64,
    pub cr_capacity_aip: CapacityEstimate,
    pub cr_capacity_pip: CapacityEstimate,
    pub pr_cp_aip: CapacityEstimate,
    pub pr_cp_pip: CapacityEstimate,
    pub pr_adapt_aip: CapacityEstimate,
    pub pr_adapt_pip: CapacityEstimate,
}

impl SweepRow {
    /// Capacity cells in column order.
    pub fn cells(&self) -> [&CapacityEstimate; 6] {
        [
            &self.cr_capacity_aip,
            &self.cr_capacity_pip,
            &self.pr_cp_aip,
            &self.pr_cp_pip,
            &self.pr_adapt_aip,
            &self.pr_adapt_pip,
        ]
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if !cfg.scenario.is_sweep() {
        return Err(Error::Config {
            line: 0,
            message: format!("scenario '{}' is not a sweep", cfg.scenario),
        });
    }
    cfg.atten_grid_db
        .iter()
        .map(|&atten_db| {
            info!("{}: attenuation {atten_db} dB", cfg.scenario);
            at_point(atten_db, sweep_point(cfg, atten_db))
        })
        .collect()
}

fn sweep_point(cfg: &ExperimentConfig, atten_db: f64) -> Result<SweepRow> {
    let scenario = cfg.scenario;
    let objective = if scenario.cr_outage() {
        CrObjective::Outage
    } else {
        CrObjective::Ergodic
    };
    let p = GridPoint::build(cfg, atten_db, objective)?;

    let (cr_capacity_aip, cr_capacity_pip) = if scenario.cr_outage() {
        (
            cr_outage_capacity(&p.cr_aip, &p.batch, cfg.eps0_cr)?,
            cr_outage_capacity(&p.cr_pip, &p.batch, cfg.eps0_cr)?,
        )
    } else {
        (
            cr_ergodic_capacity(&p.batch, &p.cr_aip)?,
            cr_ergodic_capacity(&p.batch, &p.cr_pip)?,
        )
    };

    let cp = PrPolicy::Cp { q: cfg.q };
    let (pr_cp_aip, pr_cp_pip, pr_adapt_aip, pr_adapt_pip) = if scenario.pr_outage() {
        let out = |states, family| outage_capacity(states, family, cfg.q, cfg.eps0_pr);
        (
            out(&p.states_aip, OutageFamily::Cp)?,
            out(&p.states_pip, OutageFamily::Cp)?,
            out(&p.states_aip, OutageFamily::Tci)?,
            out(&p.states_pip, OutageFamily::Tci)?,
        )
    } else {
        let wf_aip = calibrate_wf(&p.states_aip, cfg.q)?;
        let wf_pip = calibrate_wf(&p.states_pip, cfg.q)?;
        (
            ergodic_capacity(&p.states_aip, &cp)?,
            ergodic_capacity(&p.states_pip, &cp)?,
            ergodic_capacity(&p.states_aip, &wf_aip)?,
            ergodic_capacity(&p.states_pip, &wf_pip)?,
        )
    };

    Ok(SweepRow {
        atten_db,
        cr_capacity_aip,
        cr_capacity_pip,
        pr_cp_aip,
        pr_cp_pip,
        pr_adapt_aip,
        pr_adapt_pip,
    })
}
