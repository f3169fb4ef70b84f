//! Monte Carlo capacity estimators for the primary link.
//!
//! Ergodic capacity is a per-state average. Outage and delay-limited
//! capacities come from quantiles and ratios, so their standard errors are
//! batch means over contiguous sections. For comparisons between the average
//! and peak interference cases, both sides are evaluated on the same states
//! and the standard error is taken from the per-state difference.

use std::f64::consts::LN_2;

use crate::cr_policy::section_stderr;
use crate::error::{Error, Result};
use crate::fading::{empirical_quantile, BatchView};
use crate::numerics::{mc_mean, mean_by, sum_by, MeanEstimate};
use crate::pr_policy::{calibrate_tci, ci_snr, effective_states, EffectiveState, PrPolicy};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CapacityKind {
    Ergodic,
    Outage { eps0: f64 },
    DelayLimited,
}

/// Capacity in bits per complex dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityEstimate {
    pub bits: f64,
    pub stderr: f64,
    pub n: usize,
    pub kind: CapacityKind,
}

impl CapacityEstimate {
    pub fn from_mean(est: MeanEstimate, kind: CapacityKind) -> Self {
        Self {
            bits: est.mean,
            stderr: est.stderr,
            n: est.n,
            kind,
        }
    }
}

/// Fraction of states whose SNR falls short of `gamma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub epsilon: f64,
    pub stderr: f64,
    pub gamma0: f64,
    /// Rate `log2(1 + gamma0)` delivered outside outage.
    pub bits: f64,
}

/// Outage-capacity policy families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutageFamily {
    Cp,
    Tci,
}

/// Delay-limited capacity with the inverse-moment diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayLimited {
    /// `log2(1 + gamma)` on this batch.
    pub estimate: CapacityEstimate,
    /// `E[(1+I)/f]` appears infinite, so the true capacity is zero and
    /// `estimate` only shrinks with `n`.
    pub divergent: bool,
}

impl DelayLimited {
    /// Population value implied by the estimate: zero when divergent.
    pub fn limit_bits(&self) -> f64 {
        if self.divergent {
            0.0
        } else {
            self.estimate.bits
        }
    }
}

#[inline]
fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

fn states_for(batch: BatchView<'_>, interference: &[f64]) -> Result<Vec<EffectiveState>> {
    effective_states(batch.f, interference)
}

/// Per-state PR rate `log2(1 + f q/(1+I))`.
pub fn pr_rate_series(states: &[EffectiveState], policy: &PrPolicy) -> Vec<f64> {
    states.iter().map(|s| log2_1p(policy.snr(s))).collect()
}

pub fn pr_ergodic_capacity<'a>(
    batch: impl Into<BatchView<'a>>,
    interference: &[f64],
    policy: &PrPolicy,
) -> Result<CapacityEstimate> {
    let states = states_for(batch.into(), interference)?;
    Ok(ergodic_capacity(&states, policy)?)
}

pub fn ergodic_capacity(states: &[EffectiveState], policy: &PrPolicy) -> Result<CapacityEstimate> {
    let est = mc_mean(&pr_rate_series(states, policy))?;
    Ok(CapacityEstimate::from_mean(est, CapacityKind::Ergodic))
}

pub fn outage_probability<'a>(
    batch: impl Into<BatchView<'a>>,
    interference: &[f64],
    policy: &PrPolicy,
    gamma0: f64,
) -> Result<OutageResult> {
    let states = states_for(batch.into(), interference)?;
    outage_of(&states, policy, gamma0)
}

/// Outage probability of `policy` at SNR `gamma0` on prepared states.
pub fn outage_of(
    states: &[EffectiveState],
    policy: &PrPolicy,
    gamma0: f64,
) -> Result<OutageResult> {
    if states.is_empty() {
        return Err(Error::invalid("outage probability of an empty batch"));
    }
    if !(gamma0 >= 0.0) {
        return Err(Error::invalid(format!(
            "target SNR must be >= 0, got {gamma0}"
        )));
    }
    let n = states.len() as f64;
    let epsilon = sum_by(states.len(), |i| {
        outage_indicator(&states[i], policy, gamma0)
    }) / n;
    Ok(OutageResult {
        epsilon,
        stderr: (epsilon * (1.0 - epsilon) / n).sqrt(),
        gamma0,
        bits: log2_1p(gamma0),
    })
}

#[inline]
fn outage_indicator(s: &EffectiveState, policy: &PrPolicy, gamma0: f64) -> f64 {
    if policy.snr(s) < gamma0 {
        1.0
    } else {
        0.0
    }
}

/// Largest constant SNR reachable outside an `eps0` outage fraction.
fn outage_snr(states: &[EffectiveState], family: OutageFamily, q: f64, eps0: f64) -> Result<f64> {
    match family {
        OutageFamily::Cp => {
            let snr: Vec<f64> = states.iter().map(|s| s.gain() * q).collect();
            empirical_quantile(&snr, eps0)
        }
        OutageFamily::Tci => match calibrate_tci(states, q, eps0)? {
            PrPolicy::Tci { gamma, .. } => Ok(gamma),
            other => unreachable!("calibrate_tci returned {other:?}"),
        },
    }
}

pub fn pr_outage_capacity<'a>(
    batch: impl Into<BatchView<'a>>,
    interference: &[f64],
    family: OutageFamily,
    q: f64,
    eps0: f64,
) -> Result<CapacityEstimate> {
    let states = states_for(batch.into(), interference)?;
    outage_capacity(&states, family, q, eps0)
}

/// Outage capacity on prepared states; `eps0` must lie in `(0, 1)`.
pub fn outage_capacity(
    states: &[EffectiveState],
    family: OutageFamily,
    q: f64,
    eps0: f64,
) -> Result<CapacityEstimate> {
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::invalid(format!(
            "outage target must lie in (0, 1), got {eps0}"
        )));
    }
    if states.is_empty() {
        return Err(Error::invalid("outage capacity of an empty batch"));
    }
    let bits = log2_1p(outage_snr(states, family, q, eps0)?);
    let stderr = section_stderr(states.len(), |r| {
        Ok(log2_1p(outage_snr(&states[r], family, q, eps0)?))
    })?;
    Ok(CapacityEstimate {
        bits,
        stderr,
        n: states.len(),
        kind: CapacityKind::Outage { eps0 },
    })
}

pub fn pr_delay_limited_capacity<'a>(
    batch: impl Into<BatchView<'a>>,
    interference: &[f64],
    q: f64,
) -> Result<DelayLimited> {
    let states = states_for(batch.into(), interference)?;
    delay_limited_capacity(&states, q)
}

/// `log2(1 + gamma)` under channel inversion. The standard error is the
/// delta-method propagation of the inverse-moment sample mean.
pub fn delay_limited_capacity(states: &[EffectiveState], q: f64) -> Result<DelayLimited> {
    let PrPolicy::Ci { gamma, divergent } = ci_snr(states, q)? else {
        unreachable!()
    };
    let cost = inverse_cost_series(states);
    let m = mc_mean(&cost)?;
    // d/dm log2(1 + q/m) = -q / (m^2 (1 + q/m) ln 2)
    let slope = q / (m.mean * m.mean * (1.0 + gamma) * LN_2);
    Ok(DelayLimited {
        estimate: CapacityEstimate {
            bits: log2_1p(gamma),
            stderr: slope * m.stderr,
            n: states.len(),
            kind: CapacityKind::DelayLimited,
        },
        divergent,
    })
}

fn inverse_cost_series(states: &[EffectiveState]) -> Vec<f64> {
    states
        .iter()
        .map(|s| if s.f > 0.0 { s.inverse_gain() } else { 0.0 })
        .collect()
}

/// Mean and standard error of `a[i] - b[i]`.
pub fn paired_difference(a: &[f64], b: &[f64]) -> Result<MeanEstimate> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "paired streams differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    mc_mean(&d)
}

/// Paired ergodic-capacity gap `C(a) - C(b)` over common states.
pub fn paired_ergodic_gap(
    states_a: &[EffectiveState],
    policy_a: &PrPolicy,
    states_b: &[EffectiveState],
    policy_b: &PrPolicy,
) -> Result<MeanEstimate> {
    paired_difference(
        &pr_rate_series(states_a, policy_a),
        &pr_rate_series(states_b, policy_b),
    )
}

/// Paired outage-probability gap `eps(a) - eps(b)` at a common `gamma0`.
pub fn paired_outage_gap(
    states_a: &[EffectiveState],
    policy_a: &PrPolicy,
    states_b: &[EffectiveState],
    policy_b: &PrPolicy,
    gamma0: f64,
) -> Result<MeanEstimate> {
    let ind = |states: &[EffectiveState], p: &PrPolicy| -> Vec<f64> {
        states
            .iter()
            .map(|s| outage_indicator(s, p, gamma0))
            .collect()
    };
    paired_difference(&ind(states_a, policy_a), &ind(states_b, policy_b))
}

/// Paired gap `gamma_a - gamma_b` between channel-inversion SNRs, with a
/// delta-method standard error from the per-state linearization.
pub fn paired_inversion_gap(
    states_a: &[EffectiveState],
    states_b: &[EffectiveState],
    q: f64,
) -> Result<MeanEstimate> {
    let ca = inverse_cost_series(states_a);
    let cb = inverse_cost_series(states_b);
    let n = ca.len();
    if n != cb.len() || n == 0 {
        return Err(Error::invalid(
            "paired inversion gap needs equal, non-empty batches",
        ));
    }
    let ma = mean_by(n, |i| ca[i]);
    let mb = mean_by(n, |i| cb[i]);
    let (wa, wb) = (q / (ma * ma), q / (mb * mb));
    let lin: Vec<f64> = (0..n).map(|i| wb * cb[i] - wa * ca[i]).collect();
    let spread = mc_mean(&lin)?;
    Ok(MeanEstimate {
        mean: q / ma - q / mb,
        stderr: spread.stderr,
        n,
    })
}

/// Paired gap `C(a) - C(b)` between outage capacities, standard error from
/// batch means of the per-section difference.
pub fn paired_outage_capacity_gap(
    states_a: &[EffectiveState],
    states_b: &[EffectiveState],
    family: OutageFamily,
    q: f64,
    eps0: f64,
) -> Result<MeanEstimate> {
    if states_a.len() != states_b.len() {
        return Err(Error::invalid(
            "paired outage capacities need equal batches",
        ));
    }
    let a = outage_capacity(states_a, family, q, eps0)?;
    let b = outage_capacity(states_b, family, q, eps0)?;
    let stderr = section_stderr(states_a.len(), |r| {
        Ok(log2_1p(outage_snr(&states_a[r.clone()], family, q, eps0)?)
            - log2_1p(outage_snr(&states_b[r], family, q, eps0)?))
    })?;
    Ok(MeanEstimate {
        mean: a.bits - b.bits,
        stderr,
        n: states_a.len(),
    })
}

/// Lagrangian of the water-filling problem after the inner maximization,
/// `E[(ln(G/mu))^+ - (1 - mu/G)^+] + mu Q` with `G = f/(1+I)`, converted to
/// bits. At the calibrated multiplier it equals the ergodic capacity, and
/// it is minimized there over `mu`.
pub fn wf_dual_value(states: &[EffectiveState], q: f64, mu: f64) -> f64 {
    let nats = mean_by(states.len(), |i| {
        let g = states[i].gain();
        if g > mu {
            (g / mu).ln() - (1.0 - mu / g)
        } else {
            0.0
        }
    }) + mu * q;
    nats / LN_2
}

/// Lagrangian of the fixed-SNR outage problem after the inner minimization,
/// `1 + E[(gamma0 mu/G - 1) 1(G >= gamma0 mu)] - mu Q`. At
/// `mu = theta/gamma0` of the calibrated truncated inversion it equals the
/// minimum outage probability, and it is maximized there over `mu`.
pub fn tci_dual_value(states: &[EffectiveState], q: f64, gamma0: f64, mu: f64) -> f64 {
    let cut = gamma0 * mu;
    1.0 + mean_by(states.len(), |i| {
        let g = states[i].gain();
        if g > 0.0 && g >= cut {
            cut / g - 1.0
        } else {
            0.0
        }
    }) - mu * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingBatch;
    use crate::pr_policy::{calibrate_tci_for_snr, calibrate_wf};

    fn unit_state_batch(f: f64) -> FadingBatch {
        FadingBatch {
            h: vec![1.0],
            g: vec![1.0],
            f: vec![f],
            seed: 0,
        }
    }

    #[test]
    fn constant_power_single_state() {
        let c =
            pr_ergodic_capacity(&unit_state_batch(1.0), &[1.0], &PrPolicy::Cp { q: 10.0 }).unwrap();
        assert!((c.bits - 6f64.log2()).abs() < 1e-12);
        assert!((c.bits - 2.585).abs() < 1e-3);
    }

    #[test]
    fn length_mismatch() {
        let err = pr_ergodic_capacity(
            &unit_state_batch(1.0),
            &[1.0, 1.0],
            &PrPolicy::Cp { q: 1.0 },
        );
        assert!(err.is_err());
    }

    #[test]
    fn zero_target_never_in_outage() {
        let b = FadingBatch {
            h: vec![1.0; 3],
            g: vec![1.0; 3],
            f: vec![0.1, 1.0, 3.0],
            seed: 0,
        };
        let r = outage_probability(&b, &[1.0; 3], &PrPolicy::Cp { q: 10.0 }, 0.0).unwrap();
        assert_eq!(r.epsilon, 0.0);
    }

    #[test]
    fn deterministic_snr_outage_capacity() {
        let b = FadingBatch {
            h: vec![1.0; 4],
            g: vec![1.0; 4],
            f: vec![1.0; 4],
            seed: 0,
        };
        for eps0 in [0.05, 0.5, 0.9] {
            let c = pr_outage_capacity(&b, &[1.0; 4], OutageFamily::Cp, 10.0, eps0).unwrap();
            assert!((c.bits - 6f64.log2()).abs() < 1e-12);
        }
        assert!(pr_outage_capacity(&b, &[1.0; 4], OutageFamily::Cp, 10.0, 0.0).is_err());
    }

    #[test]
    fn single_state_delay_limited() {
        let d = pr_delay_limited_capacity(&unit_state_batch(2.0), &[1.0], 10.0).unwrap();
        assert!((d.estimate.bits - 11f64.log2()).abs() < 1e-12);
        assert!((d.estimate.bits - 3.459).abs() < 1e-3);
        assert!(!d.divergent);
        assert_eq!(d.limit_bits(), d.estimate.bits);
    }

    #[test]
    fn water_filling_dual_is_minimized_at_calibrated_multiplier() {
        let states: Vec<EffectiveState> = (1..=200)
            .map(|i| EffectiveState {
                f: 0.02 * i as f64,
                interference: (i % 7) as f64 * 0.3,
            })
            .collect();
        let PrPolicy::Wf { mu } = calibrate_wf(&states, 2.0).unwrap() else {
            unreachable!()
        };
        let primal = ergodic_capacity(&states, &PrPolicy::Wf { mu })
            .unwrap()
            .bits;
        let at = wf_dual_value(&states, 2.0, mu);
        assert!((at - primal).abs() < 1e-5, "{at} vs {primal}");
        for m in [0.9 * mu, 1.1 * mu] {
            assert!(wf_dual_value(&states, 2.0, m) >= at);
        }
    }

    #[test]
    fn fixed_snr_dual_matches_minimum_outage() {
        let states: Vec<EffectiveState> = (1..=500)
            .map(|i| EffectiveState {
                f: 0.01 * i as f64,
                interference: (i % 5) as f64 * 0.5,
            })
            .collect();
        let p = calibrate_tci_for_snr(&states, 1.0, 1.0).unwrap();
        let PrPolicy::Tci { theta, .. } = p else {
            unreachable!()
        };
        let eps = outage_of(&states, &p, 1.0).unwrap().epsilon;
        let dual = tci_dual_value(&states, 1.0, 1.0, theta);
        assert!(dual <= eps + 1e-12);
        assert!(eps - dual < 0.01);
        for m in [0.8 * theta, 1.25 * theta] {
            assert!(tci_dual_value(&states, 1.0, 1.0, m) <= eps + 1e-12);
        }
    }
}
