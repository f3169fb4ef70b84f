//! Cognitive-radio power control under an interference-power constraint at
//! the primary receiver.
//!
//! Three optimal rules are covered:
//!
//! * ergodic capacity under an average constraint: water-filling whose level
//!   `1/(nu*g)` depends on the interference gain,
//! * outage capacity under an average constraint: truncated inversion on the
//!   ratio `h/g`, which yields a constant receiver SNR `zeta_a`,
//! * either capacity under a peak constraint: the largest admissible power
//!   `gamma_p / g` in every state.
//!
//! Average-constraint multipliers are calibrated on a frozen batch
//! (sample-average approximation).

use log::debug;

use crate::capacity::{CapacityEstimate, CapacityKind};
use crate::error::{Error, Result};
use crate::fading::{empirical_quantile, BatchView};
use crate::numerics::{self, bisect_monotone, mean_by, RootProblem};

/// Sections used for batch-means standard errors of quantile-type estimates.
pub(crate) const SECTIONS: usize = 32;

/// Calibrated CR power rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrPolicy {
    /// `p = (1/(nu*g) - 1/h)^+`, with `nu` set by `E[g p] = gamma_a`.
    ErgodicAip { nu: f64, gamma_a: f64 },
    /// `p = zeta_a/h` when `h/g >= lambda`, else 0.
    OutageAip {
        lambda: f64,
        zeta_a: f64,
        gamma_a: f64,
        eps0: f64,
    },
    /// `p = gamma_p/g` in every state.
    Pip { gamma_p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Aip,
    Pip,
}

/// Which interference constraint the CR honors, and for the average case
/// whether it targets ergodic capacity (`outage_target = None`) or outage
/// capacity at a given outage probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrConstraintSpec {
    pub kind: ConstraintKind,
    pub threshold: f64,
    pub outage_target: Option<f64>,
}

impl CrConstraintSpec {
    pub fn new(kind: ConstraintKind, threshold: f64, outage_target: Option<f64>) -> Result<Self> {
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(Error::invalid(format!(
                "interference threshold must be > 0, got {threshold}"
            )));
        }
        if let Some(e) = outage_target {
            check_eps0(e)?;
        }
        Ok(Self {
            kind,
            threshold,
            outage_target,
        })
    }

    pub fn calibrate<'a>(&self, batch: impl Into<BatchView<'a>>) -> Result<CrPolicy> {
        match (self.kind, self.outage_target) {
            (ConstraintKind::Pip, _) => Ok(CrPolicy::Pip {
                gamma_p: self.threshold,
            }),
            (ConstraintKind::Aip, None) => calibrate_er_aip(batch, self.threshold),
            (ConstraintKind::Aip, Some(eps0)) => calibrate_out_aip(batch, self.threshold, eps0),
        }
    }
}

fn check_eps0(eps0: f64) -> Result<()> {
    if (0.0..1.0).contains(&eps0) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "outage target must lie in [0, 1), got {eps0}"
        )))
    }
}

fn check_gains(h: f64, g: f64) -> Result<()> {
    if h > 0.0 && g > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "channel gains must be > 0, got h={h}, g={g}"
        )))
    }
}

#[inline]
fn er_aip(h: f64, g: f64, nu: f64) -> f64 {
    (1.0 / (nu * g) - 1.0 / h).max(0.0)
}

#[inline]
fn out_aip(h: f64, g: f64, lambda: f64, zeta_a: f64) -> f64 {
    if h / g >= lambda {
        zeta_a / h
    } else {
        0.0
    }
}

pub fn power_er_aip(h: f64, g: f64, nu: f64) -> Result<f64> {
    check_gains(h, g)?;
    if !(nu > 0.0) {
        return Err(Error::invalid(format!("nu must be > 0, got {nu}")));
    }
    Ok(er_aip(h, g, nu))
}

pub fn power_out_aip(h: f64, g: f64, lambda: f64, zeta_a: f64) -> Result<f64> {
    check_gains(h, g)?;
    Ok(out_aip(h, g, lambda, zeta_a))
}

pub fn power_pip(g: f64, gamma_p: f64) -> Result<f64> {
    if !(g > 0.0) {
        return Err(Error::invalid(format!("g must be > 0, got {g}")));
    }
    Ok(gamma_p / g)
}

impl CrPolicy {
    /// Transmit power in state `(h, g)`.
    #[inline]
    pub fn power(&self, h: f64, g: f64) -> f64 {
        match *self {
            CrPolicy::ErgodicAip { nu, .. } => er_aip(h, g, nu),
            CrPolicy::OutageAip { lambda, zeta_a, .. } => out_aip(h, g, lambda, zeta_a),
            CrPolicy::Pip { gamma_p } => gamma_p / g,
        }
    }

    pub fn is_peak(&self) -> bool {
        matches!(self, CrPolicy::Pip { .. })
    }
}

/// Mean interference `E[g p]` of the ergodic rule at multiplier `nu`.
pub fn er_aip_interference<'a>(batch: impl Into<BatchView<'a>>, nu: f64) -> f64 {
    let b = batch.into();
    mean_by(b.len(), |i| b.g[i] * er_aip(b.h[i], b.g[i], nu))
}

/// Solves `E[g p] = gamma_a` for the water-level multiplier.
///
/// The mean interference is `E[(1/nu - g/h)^+] <= 1/nu`, so `nu = 1/gamma_a`
/// is an upper end of the bracket.
pub fn calibrate_er_aip<'a>(batch: impl Into<BatchView<'a>>, gamma_a: f64) -> Result<CrPolicy> {
    let b = batch.into();
    if b.is_empty() {
        return Err(Error::invalid("calibration batch is empty"));
    }
    if !(gamma_a > 0.0 && gamma_a.is_finite()) {
        return Err(Error::invalid(format!(
            "gamma_a must be > 0, got {gamma_a}"
        )));
    }
    let hi = 1.0 / gamma_a;
    let nu = bisect_monotone(&RootProblem::new(
        |nu| er_aip_interference(b, nu),
        gamma_a,
        0.5 * hi,
        hi,
    ))?;
    debug!("ergodic-AIP calibration: nu = {nu}");
    Ok(CrPolicy::ErgodicAip { nu, gamma_a })
}

/// Threshold `lambda` from `Pr{h/g < lambda} = eps0` and constant SNR
/// `zeta_a` from `E[g p] = gamma_a`. With `eps0 = 0` the threshold is zero
/// and the rule is plain channel inversion.
pub fn calibrate_out_aip<'a>(
    batch: impl Into<BatchView<'a>>,
    gamma_a: f64,
    eps0: f64,
) -> Result<CrPolicy> {
    let b = batch.into();
    if b.is_empty() {
        return Err(Error::invalid("calibration batch is empty"));
    }
    if !(gamma_a > 0.0 && gamma_a.is_finite()) {
        return Err(Error::invalid(format!(
            "gamma_a must be > 0, got {gamma_a}"
        )));
    }
    check_eps0(eps0)?;
    let lambda = if eps0 == 0.0 {
        0.0
    } else {
        let ratios: Vec<f64> = b.h.iter().zip(b.g).map(|(h, g)| h / g).collect();
        empirical_quantile(&ratios, eps0)?
    };
    let inv_snr_cost = mean_by(b.len(), |i| {
        if b.h[i] / b.g[i] >= lambda {
            b.g[i] / b.h[i]
        } else {
            0.0
        }
    });
    let zeta_a = gamma_a / inv_snr_cost;
    debug!("outage-AIP calibration: lambda = {lambda}, zeta_a = {zeta_a}");
    Ok(CrPolicy::OutageAip {
        lambda,
        zeta_a,
        gamma_a,
        eps0,
    })
}

/// Per-state interference `I = g p` seen by the primary receiver. Under the
/// peak rule every entry is exactly `gamma_p`.
pub fn interference_series<'a>(batch: impl Into<BatchView<'a>>, policy: &CrPolicy) -> Vec<f64> {
    let b = batch.into();
    match *policy {
        CrPolicy::Pip { gamma_p } => vec![gamma_p; b.len()],
        _ => {
            b.g.iter()
                .zip(b.h)
                .map(|(&g, &h)| g * policy.power(h, g))
                .collect()
        }
    }
}

/// Per-state CR rate `log2(1 + h p)`.
pub fn cr_rate_series<'a>(batch: impl Into<BatchView<'a>>, policy: &CrPolicy) -> Vec<f64> {
    let b = batch.into();
    b.h.iter()
        .zip(b.g)
        .map(|(&h, &g)| (h * policy.power(h, g)).ln_1p() / std::f64::consts::LN_2)
        .collect()
}

pub fn cr_ergodic_capacity<'a>(
    batch: impl Into<BatchView<'a>>,
    policy: &CrPolicy,
) -> Result<CapacityEstimate> {
    let rates = cr_rate_series(batch, policy);
    let est = numerics::mc_mean(&rates)?;
    Ok(CapacityEstimate::from_mean(est, CapacityKind::Ergodic))
}

/// Constant receiver SNR sustained outside an `eps0` outage fraction.
fn outage_snr(b: BatchView<'_>, policy: &CrPolicy, eps0: f64) -> Result<f64> {
    match *policy {
        CrPolicy::OutageAip { gamma_a, .. } => match calibrate_out_aip(b, gamma_a, eps0)? {
            CrPolicy::OutageAip { zeta_a, .. } => Ok(zeta_a),
            _ => unreachable!(),
        },
        CrPolicy::Pip { gamma_p } => {
            if eps0 == 0.0 {
                return Ok(0.0);
            }
            let snr: Vec<f64> = b.h.iter().zip(b.g).map(|(h, g)| h * gamma_p / g).collect();
            empirical_quantile(&snr, eps0)
        }
        CrPolicy::ErgodicAip { .. } => Err(Error::invalid(
            "outage capacity is defined for the outage-AIP and PIP rules only",
        )),
    }
}

/// `log2(1 + zeta)` for the outage rule's stored SNR, or for the peak rule
/// the `eps0`-quantile of `h gamma_p / g`. `eps0 = 0` gives the
/// delay-limited capacity, which is zero under the peak rule.
///
/// The standard error comes from batch means over contiguous sections.
pub fn cr_outage_capacity<'a>(
    policy: &CrPolicy,
    batch: impl Into<BatchView<'a>>,
    eps0: f64,
) -> Result<CapacityEstimate> {
    let b = batch.into();
    check_eps0(eps0)?;
    let zeta = match *policy {
        CrPolicy::OutageAip {
            zeta_a, eps0: e, ..
        } => {
            if e != eps0 {
                return Err(Error::invalid(format!(
                    "policy was calibrated for eps0 = {e}, asked for {eps0}"
                )));
            }
            zeta_a
        }
        _ => outage_snr(b, policy, eps0)?,
    };
    let bits = zeta.ln_1p() / std::f64::consts::LN_2;
    let stderr = section_stderr(b.len(), |r| {
        Ok(outage_snr(b.section(r), policy, eps0)?.ln_1p() / std::f64::consts::LN_2)
    })?;
    let kind = if eps0 == 0.0 {
        CapacityKind::DelayLimited
    } else {
        CapacityKind::Outage { eps0 }
    };
    Ok(CapacityEstimate {
        bits,
        stderr,
        n: b.len(),
        kind,
    })
}

/// Batch-means standard error, or zero when the batch is too small to split.
pub(crate) fn section_stderr<F>(n: usize, estimator: F) -> Result<f64>
where
    F: Fn(std::ops::Range<usize>) -> Result<f64> + Sync,
{
    if n < 4 * SECTIONS {
        return Ok(0.0);
    }
    Ok(numerics::batch_means(n, SECTIONS, estimator)?.stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::{make_exponential, sample_joint, FadingBatch};

    fn single(h: f64, g: f64) -> FadingBatch {
        FadingBatch {
            h: vec![h],
            g: vec![g],
            f: vec![1.0],
            seed: 0,
        }
    }

    fn rayleigh(n: usize, seed: u64) -> FadingBatch {
        let one = make_exponential(1.0).unwrap();
        let ten = make_exponential(10.0).unwrap();
        sample_joint(&one, &ten, &one, n, seed).unwrap()
    }

    #[test]
    fn ergodic_power_formula() {
        assert_eq!(power_er_aip(1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(power_er_aip(2.0, 0.5, 1.0).unwrap(), 1.5);
        assert_eq!(power_er_aip(0.1, 1.0, 1.0).unwrap(), 0.0);
        assert!(power_er_aip(0.0, 1.0, 1.0).is_err());
        assert!(power_er_aip(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn outage_power_formula() {
        assert_eq!(power_out_aip(1.0, 1.0, 0.5, 2.0).unwrap(), 2.0);
        assert_eq!(power_out_aip(0.4, 1.0, 0.5, 2.0).unwrap(), 0.0);
        // boundary transmits
        assert_eq!(power_out_aip(0.5, 1.0, 0.5, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn peak_power_formula() {
        assert_eq!(power_pip(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(power_pip(0.5, 1.0).unwrap(), 2.0);
        assert!(power_pip(0.0, 1.0).is_err());
    }

    #[test]
    fn single_state_ergodic_calibration() {
        // 1/nu - 1 = 1
        match calibrate_er_aip(&single(1.0, 1.0), 1.0).unwrap() {
            CrPolicy::ErgodicAip { nu, .. } => assert!((nu - 0.5).abs() < 1e-6),
            p => panic!("{p:?}"),
        }
        assert!(calibrate_er_aip(&single(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn single_state_delay_limited_is_inversion() {
        match calibrate_out_aip(&single(1.0, 1.0), 1.0, 0.0).unwrap() {
            CrPolicy::OutageAip { lambda, zeta_a, .. } => {
                assert_eq!(lambda, 0.0);
                assert_eq!(zeta_a, 1.0);
            }
            p => panic!("{p:?}"),
        }
        assert!(calibrate_out_aip(&single(1.0, 1.0), 1.0, 1.0).is_err());
    }

    #[test]
    fn ergodic_interference_strictly_decreasing_in_nu() {
        let b = rayleigh(20_000, 4);
        let values: Vec<f64> = (1..=10)
            .map(|k| er_aip_interference(&b, 0.05 * k as f64))
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    }

    #[test]
    fn outage_rule_snr_is_constant() {
        let b = rayleigh(50_000, 8);
        let p = calibrate_out_aip(&b, 1.0, 0.1).unwrap();
        let CrPolicy::OutageAip { zeta_a, .. } = p else {
            unreachable!()
        };
        for (&h, &g) in b.h.iter().zip(&b.g) {
            let snr = h * p.power(h, g);
            assert!(snr == 0.0 || (snr - zeta_a).abs() <= 1e-12 * zeta_a);
        }
    }

    #[test]
    fn peak_interference_is_constant() {
        let b = rayleigh(1000, 1);
        let p = CrPolicy::Pip { gamma_p: 1.0 };
        assert!(interference_series(&b, &p).iter().all(|&i| i == 1.0));
        for &g in &b.g {
            assert!((g * p.power(1.0, g) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn truncated_states_cause_no_interference() {
        let b = rayleigh(10_000, 2);
        let p = calibrate_out_aip(&b, 1.0, 0.1).unwrap();
        let CrPolicy::OutageAip { lambda, .. } = p else {
            unreachable!()
        };
        let i = interference_series(&b, &p);
        for k in 0..b.len() {
            if b.h[k] / b.g[k] < lambda {
                assert_eq!(i[k], 0.0);
            }
        }
    }

    #[test]
    fn one_bit_at_unit_snr() {
        let b = single(1.0, 1.0);
        let c = cr_ergodic_capacity(&b, &CrPolicy::Pip { gamma_p: 1.0 }).unwrap();
        assert_eq!(c.bits, 1.0);
    }

    #[test]
    fn peak_delay_limited_is_zero() {
        let b = rayleigh(10_000, 3);
        let c = cr_outage_capacity(&CrPolicy::Pip { gamma_p: 1.0 }, &b, 0.0).unwrap();
        assert_eq!(c.bits, 0.0);
        assert_eq!(c.kind, CapacityKind::DelayLimited);
    }

    #[test]
    fn outage_capacity_rejects_mismatched_target() {
        let b = rayleigh(1000, 3);
        let p = calibrate_out_aip(&b, 1.0, 0.1).unwrap();
        assert!(cr_outage_capacity(&p, &b, 0.2).is_err());
        assert!(cr_outage_capacity(&p, &b, 1.0).is_err());
        let e = calibrate_er_aip(&b, 1.0).unwrap();
        assert!(cr_outage_capacity(&e, &b, 0.1).is_err());
    }

    #[test]
    fn constraint_spec_dispatch() {
        let b = rayleigh(1000, 5);
        let aip = CrConstraintSpec::new(ConstraintKind::Aip, 1.0, None).unwrap();
        assert!(matches!(
            aip.calibrate(&b).unwrap(),
            CrPolicy::ErgodicAip { .. }
        ));
        let out = CrConstraintSpec::new(ConstraintKind::Aip, 1.0, Some(0.1)).unwrap();
        assert!(matches!(
            out.calibrate(&b).unwrap(),
            CrPolicy::OutageAip { .. }
        ));
        let pip = CrConstraintSpec::new(ConstraintKind::Pip, 1.0, None).unwrap();
        assert_eq!(pip.calibrate(&b).unwrap(), CrPolicy::Pip { gamma_p: 1.0 });
        assert!(CrConstraintSpec::new(ConstraintKind::Aip, 0.0, None).is_err());
    }
}
