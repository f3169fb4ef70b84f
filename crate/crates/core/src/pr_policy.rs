//! Primary-radio power control against a given interference series.
//!
//! The PR treats CR interference as extra noise, so every adaptive rule sees
//! only the effective gain `f/(1+I)`. Four rules are covered: constant power,
//! water-filling, channel inversion, and truncated channel inversion. Each
//! adaptive rule is calibrated so that the batch-average power equals the
//! budget `Q`.

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::fading::empirical_quantile;
use crate::numerics::{bisect_monotone, mean_by, RootProblem};

/// Inverse moments above this are treated as divergent outright.
pub const INVERSE_MOMENT_CEILING: f64 = 1e12;

/// Hill tail-index estimates at or below this flag `E[(1+I)/f]` as
/// divergent. A tail index of one or less means an infinite mean; two or more
/// means finite variance.
pub const HILL_DIVERGENCE_INDEX: f64 = 1.5;

/// One fading state as seen by the PR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveState {
    pub f: f64,
    pub interference: f64,
}

impl EffectiveState {
    /// `f/(1+I)`, zero when `f = 0`.
    #[inline]
    pub fn gain(&self) -> f64 {
        if self.f > 0.0 {
            self.f / (1.0 + self.interference)
        } else {
            0.0
        }
    }

    /// Power needed for unit receiver SNR, `(1+I)/f`. Infinite when `f = 0`.
    #[inline]
    pub fn inverse_gain(&self) -> f64 {
        (1.0 + self.interference) / self.f
    }
}

/// Pairs PR gains with the interference each state receives.
pub fn effective_states(f: &[f64], interference: &[f64]) -> Result<Vec<EffectiveState>> {
    if f.len() != interference.len() {
        return Err(Error::invalid(format!(
            "gain and interference lengths differ ({} vs {})",
            f.len(),
            interference.len()
        )));
    }
    Ok(f.iter()
        .zip(interference)
        .map(|(&f, &interference)| EffectiveState { f, interference })
        .collect())
}

/// Calibrated PR power rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PrPolicy {
    Cp { q: f64 },
    Wf { mu: f64 },
    Ci { gamma: f64, divergent: bool },
    Tci { theta: f64, gamma: f64 },
}

pub fn power_cp(q: f64) -> f64 {
    q
}

/// `(1/mu - (1+I)/f)^+`, zero when `f = 0`.
#[inline]
pub fn power_wf(f: f64, interference: f64, mu: f64) -> f64 {
    if f > 0.0 {
        (1.0 / mu - (1.0 + interference) / f).max(0.0)
    } else {
        0.0
    }
}

impl PrPolicy {
    #[inline]
    pub fn power(&self, s: &EffectiveState) -> f64 {
        match *self {
            PrPolicy::Cp { q } => q,
            PrPolicy::Wf { mu } => power_wf(s.f, s.interference, mu),
            PrPolicy::Ci { gamma, .. } => {
                if s.f > 0.0 {
                    gamma * s.inverse_gain()
                } else {
                    0.0
                }
            }
            PrPolicy::Tci { theta, gamma } => {
                if s.f > 0.0 && s.gain() >= theta {
                    gamma * s.inverse_gain()
                } else {
                    0.0
                }
            }
        }
    }

    /// Receiver SNR `f q/(1+I)`. The inversion rules report their target
    /// SNR exactly on served states, so a served state is never counted as an
    /// outage because of rounding.
    #[inline]
    pub fn snr(&self, s: &EffectiveState) -> f64 {
        if !(s.f > 0.0) {
            return 0.0;
        }
        match *self {
            PrPolicy::Ci { gamma, .. } => gamma,
            PrPolicy::Tci { theta, gamma } => {
                if s.gain() >= theta {
                    gamma
                } else {
                    0.0
                }
            }
            _ => s.f * self.power(s) / (1.0 + s.interference),
        }
    }

    pub fn mean_power(&self, states: &[EffectiveState]) -> f64 {
        mean_by(states.len(), |i| self.power(&states[i]))
    }
}

fn check_budget(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "power budget Q must be > 0, got {q}"
        )))
    }
}

/// Water-filling multiplier from `E[(1/mu - (1+I)/f)^+] = Q`. The mean is at
/// most `1/mu`, which puts `mu = 1/Q` at or above the root. The same call
/// serves the peak-interference case with a constant series.
pub fn calibrate_wf(states: &[EffectiveState], q: f64) -> Result<PrPolicy> {
    check_budget(q)?;
    if states.is_empty() {
        return Err(Error::invalid("calibration states are empty"));
    }
    if states.iter().all(|s| !(s.f > 0.0)) {
        return Err(Error::NoRoot {
            target: q,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let hi = 1.0 / q;
    let mu = bisect_monotone(&RootProblem::new(
        |mu| {
            mean_by(states.len(), |i| {
                power_wf(states[i].f, states[i].interference, mu)
            })
        },
        q,
        0.5 * hi,
        hi,
    ))?;
    debug!("water-filling calibration: mu = {mu}");
    Ok(PrPolicy::Wf { mu })
}

/// Hill estimate of the tail index of `values` from the top `sqrt(n)` order
/// statistics. `None` for fewer than 100 values.
fn hill_tail_index(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n < 100 {
        return None;
    }
    let k = (n as f64).sqrt() as usize;
    values.select_nth_unstable_by(n - k - 1, |a, b| a.total_cmp(b));
    let threshold = values[n - k - 1];
    if !(threshold > 0.0) {
        return None;
    }
    let log_excess: f64 = values[n - k..].iter().map(|x| (x / threshold).ln()).sum();
    Some(if log_excess > 0.0 {
        k as f64 / log_excess
    } else {
        f64::INFINITY
    })
}

/// Sum of `(1+I)/f` over states that pass `keep`, with `f = 0` states
/// dropped (they get zero power). Returns the per-state mean over the full
/// batch.
fn inversion_cost(states: &[EffectiveState], keep: impl Fn(&EffectiveState) -> bool + Sync) -> f64 {
    mean_by(states.len(), |i| {
        let s = &states[i];
        if s.f > 0.0 && keep(s) {
            s.inverse_gain()
        } else {
            0.0
        }
    })
}

fn warn_zero_gains(states: &[EffectiveState]) {
    let zeros = states.iter().filter(|s| !(s.f > 0.0)).count();
    if zeros > 0 {
        warn!("{zeros} states with f = 0 cannot be inverted; they receive zero power");
    }
}

/// Channel inversion: `gamma = Q / E[(1+I)/f]`.
///
/// `E[1/f]` is infinite whenever `f` has positive density at zero (Rayleigh
/// included). The sample mean is still finite, so the rule is returned with
/// `divergent = true` rather than as an error; the flag is raised when the
/// sample mean exceeds [`INVERSE_MOMENT_CEILING`] or the Hill tail index of
/// `(1+I)/f` is at most [`HILL_DIVERGENCE_INDEX`].
pub fn ci_snr(states: &[EffectiveState], q: f64) -> Result<PrPolicy> {
    check_budget(q)?;
    if states.is_empty() {
        return Err(Error::invalid("calibration states are empty"));
    }
    warn_zero_gains(states);
    let cost = inversion_cost(states, |_| true);
    if !(cost > 0.0) {
        return Err(Error::invalid("no state with f > 0 to invert"));
    }
    let mut inverse: Vec<f64> = states
        .iter()
        .filter(|s| s.f > 0.0)
        .map(EffectiveState::inverse_gain)
        .collect();
    let tail = hill_tail_index(&mut inverse);
    let divergent =
        !(cost <= INVERSE_MOMENT_CEILING) || tail.is_some_and(|a| a <= HILL_DIVERGENCE_INDEX);
    if divergent {
        warn!(
            "inverse moment E[(1+I)/f] looks divergent (sample mean {cost}, tail index {tail:?})"
        );
    }
    Ok(PrPolicy::Ci {
        gamma: q / cost,
        divergent,
    })
}

/// Truncated channel inversion at outage probability `eps0`: `theta` is the
/// `eps0`-quantile of `f/(1+I)` and `gamma` meets the budget over the states
/// at or above it. `eps0 = 0` is plain channel inversion.
pub fn calibrate_tci(states: &[EffectiveState], q: f64, eps0: f64) -> Result<PrPolicy> {
    check_budget(q)?;
    if states.is_empty() {
        return Err(Error::invalid("calibration states are empty"));
    }
    if eps0 == 0.0 {
        return ci_snr(states, q);
    }
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::invalid(format!(
            "TCI outage target must lie in [0, 1), got {eps0}"
        )));
    }
    let gains: Vec<f64> = states.iter().map(EffectiveState::gain).collect();
    let theta = empirical_quantile(&gains, eps0)?;
    let cost = inversion_cost(states, |s| s.gain() >= theta);
    if !(cost > 0.0) {
        return Err(Error::invalid(
            "no state above the truncation threshold can be inverted",
        ));
    }
    Ok(PrPolicy::Tci {
        theta,
        gamma: q / cost,
    })
}

/// Truncated inversion that delivers a prescribed SNR `gamma0` to as many
/// states as the budget allows: states are served in decreasing order of
/// effective gain while the average power stays within `Q`. This is the
/// minimum-outage rule at fixed `gamma0`; `theta` is the weakest served gain
/// (`+inf` when nothing can be served).
pub fn calibrate_tci_for_snr(states: &[EffectiveState], q: f64, gamma0: f64) -> Result<PrPolicy> {
    check_budget(q)?;
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::invalid(format!(
            "target SNR must be > 0, got {gamma0}"
        )));
    }
    let mut gains: Vec<f64> = states
        .iter()
        .map(EffectiveState::gain)
        .filter(|&x| x > 0.0)
        .collect();
    gains.sort_unstable_by(|a, b| b.total_cmp(a));
    let budget = q * states.len() as f64;
    let mut spent = 0.0;
    let mut theta = f64::INFINITY;
    for &x in &gains {
        let next = spent + gamma0 / x;
        if next > budget {
            break;
        }
        spent = next;
        theta = x;
    }
    Ok(PrPolicy::Tci {
        theta,
        gamma: gamma0,
    })
}
