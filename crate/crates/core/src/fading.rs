//! Channel power-gain laws and reproducible joint fading batches.
//!
//! A fading state is the triple `(h, g, f)`:
//!
//! * `h` — CR transmitter to CR receiver
//! * `g` — CR transmitter to PR receiver (the interference link)
//! * `f` — PR transmitter to PR receiver
//!
//! The three links are independent. Rayleigh amplitudes give exponential
//! power gains, which are drawn directly rather than as squared complex
//! Gaussians. Noise power is normalized to one at both receivers.

use std::fmt;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Additive noise power at both receivers.
pub const NOISE_VARIANCE: f64 = 1.0;

/// Samples per independently seeded RNG stream segment.
const SAMPLE_CHUNK: usize = 1 << 14;

const STREAM_H: u64 = 0;
const STREAM_G: u64 = 1;
const STREAM_F: u64 = 2;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nonnegative power-gain law with closed-form CDF and quantile.
#[derive(Clone)]
pub struct GainDistribution {
    kind: Kind,
}

#[derive(Clone)]
enum Kind {
    Exponential {
        mean: f64,
    },
    Scaled {
        base: Box<GainDistribution>,
        kappa: f64,
    },
    Synthetic(SyntheticCdf),
}

/// An arbitrary law given by its CDF and quantile, sampled by inversion.
#[derive(Clone)]
pub struct SyntheticCdf {
    name: String,
    mean: f64,
    cdf: ScalarFn,
    quantile: ScalarFn,
}

impl GainDistribution {
    /// Exponential power gain (Rayleigh amplitude) with the given mean.
    pub fn exponential(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::invalid(format!(
                "exponential mean must be > 0, got {mean}"
            )));
        }
        Ok(Self {
            kind: Kind::Exponential { mean },
        })
    }

    /// Law given by closed-form `cdf` and `quantile`. The caller vouches that
    /// the two are inverse to each other and that `mean` is the true mean.
    pub fn synthetic(
        name: impl Into<String>,
        mean: f64,
        cdf: impl Fn(f64) -> f64 + Send + Sync + 'static,
        quantile: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(Error::invalid(format!(
                "synthetic mean must be > 0, got {mean}"
            )));
        }
        Ok(Self {
            kind: Kind::Synthetic(SyntheticCdf {
                name: name.into(),
                mean,
                cdf: Arc::new(cdf),
                quantile: Arc::new(quantile),
            }),
        })
    }

    /// CDF `x^k` on `[0, 1]`. Convex for `k >= 1`.
    pub fn power_cdf(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!(
                "power-CDF exponent must be > 0, got {exponent}"
            )));
        }
        let k = exponent;
        Self::synthetic(
            format!("power-cdf(k={k})"),
            k / (k + 1.0),
            move |x| x.clamp(0.0, 1.0).powf(k),
            move |u| u.clamp(0.0, 1.0).powf(1.0 / k),
        )
    }

    /// `offset + Exp(excess_mean)`: bounded away from zero, so `E[1/x]` is finite.
    pub fn shifted_exponential(offset: f64, excess_mean: f64) -> Result<Self> {
        if !(offset >= 0.0 && excess_mean > 0.0) {
            return Err(Error::invalid(format!(
                "shifted exponential needs offset >= 0 and mean > 0, got ({offset}, {excess_mean})"
            )));
        }
        Self::synthetic(
            format!("shifted-exponential(offset={offset}, mean={excess_mean})"),
            offset + excess_mean,
            move |x| {
                if x <= offset {
                    0.0
                } else {
                    -(-(x - offset) / excess_mean).exp_m1()
                }
            },
            move |u| offset - excess_mean * (-u).ln_1p(),
        )
    }

    /// Scaled copy attenuated by `atten_db`: every sample is multiplied by
    /// `10^(-atten_db/10)`.
    pub fn apply_attenuation(&self, atten_db: f64) -> Self {
        self.scaled(10f64.powf(-atten_db / 10.0))
    }

    /// Scaled copy with factor `kappa`. Draws from the same RNG state are
    /// exactly `kappa` times the base draws.
    pub fn scaled(&self, kappa: f64) -> Self {
        Self {
            kind: Kind::Scaled {
                base: Box::new(self.clone()),
                kappa,
            },
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => *mean,
            Kind::Scaled { base, kappa } => kappa * base.mean(),
            Kind::Synthetic(s) => s.mean,
        }
    }

    /// `Pr{X <= x}`.
    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x / mean).exp_m1()
                }
            }
            Kind::Scaled { base, kappa } => base.cdf(x / kappa),
            Kind::Synthetic(s) => (s.cdf)(x),
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => -mean * (-u).ln_1p(),
            Kind::Scaled { base, kappa } => kappa * base.quantile(u),
            Kind::Synthetic(s) => (s.quantile)(u),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Exponential { mean } => {
                let e: f64 = Exp1.sample(rng);
                mean * e
            }
            Kind::Scaled { base, kappa } => kappa * base.sample(rng),
            Kind::Synthetic(s) => (s.quantile)(rng.random::<f64>()),
        }
    }
}

impl fmt::Debug for GainDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Exponential { mean } => write!(f, "Exponential(mean={mean})"),
            Kind::Scaled { base, kappa } => write!(f, "{kappa} x {base:?}"),
            Kind::Synthetic(s) => write!(f, "{}", s.name),
        }
    }
}

/// Validated exponential law.
pub fn make_exponential(mean: f64) -> Result<GainDistribution> {
    GainDistribution::exponential(mean)
}

pub fn apply_attenuation(dist: &GainDistribution, atten_db: f64) -> GainDistribution {
    dist.apply_attenuation(atten_db)
}

/// `n` joint i.i.d. fading states.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingBatch {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub f: Vec<f64>,
    pub seed: u64,
}

/// Borrowed, possibly partial, view of a [`FadingBatch`].
#[derive(Debug, Clone, Copy)]
pub struct BatchView<'a> {
    pub h: &'a [f64],
    pub g: &'a [f64],
    pub f: &'a [f64],
}

impl FadingBatch {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn view(&self) -> BatchView<'_> {
        BatchView {
            h: &self.h,
            g: &self.g,
            f: &self.f,
        }
    }

    pub fn section(&self, range: Range<usize>) -> BatchView<'_> {
        BatchView {
            h: &self.h[range.clone()],
            g: &self.g[range.clone()],
            f: &self.f[range],
        }
    }
}

impl<'a> BatchView<'a> {
    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn section(&self, range: Range<usize>) -> BatchView<'a> {
        BatchView {
            h: &self.h[range.clone()],
            g: &self.g[range.clone()],
            f: &self.f[range],
        }
    }
}

impl<'a> From<&'a FadingBatch> for BatchView<'a> {
    fn from(b: &'a FadingBatch) -> Self {
        b.view()
    }
}

fn fill_stream(
    out: &mut [f64],
    dist: &GainDistribution,
    seed: u64,
    stream: u64,
    reject_zero: bool,
) {
    out.par_chunks_mut(SAMPLE_CHUNK)
        .enumerate()
        .for_each(|(chunk, slot)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((stream << 48) | chunk as u64);
            for x in slot.iter_mut() {
                *x = loop {
                    let v = dist.sample(&mut rng);
                    if !(reject_zero && v == 0.0) {
                        break v;
                    }
                };
            }
        });
}

/// Draws `n` independent states. The output is a pure function of
/// `(distributions, n, seed)`: each link has its own ChaCha stream, split
/// into fixed-size segments that are filled in parallel. A batch of size
/// `m < n` with the same seed is a prefix of the size-`n` batch.
///
/// Exact zeros in `g` are redrawn.
pub fn sample_joint(
    dh: &GainDistribution,
    dg: &GainDistribution,
    df: &GainDistribution,
    n: usize,
    seed: u64,
) -> Result<FadingBatch> {
    if n == 0 {
        return Err(Error::invalid("sample_joint needs n >= 1"));
    }
    let mut h = vec![0.0; n];
    let mut g = vec![0.0; n];
    let mut f = vec![0.0; n];
    fill_stream(&mut h, dh, seed, STREAM_H, false);
    fill_stream(&mut g, dg, seed, STREAM_G, true);
    fill_stream(&mut f, df, seed, STREAM_F, false);
    Ok(FadingBatch { h, g, f, seed })
}

/// Index of the empirical `prob`-quantile in sorted order: the smallest order
/// statistic whose empirical CDF reaches `prob`.
fn quantile_rank(n: usize, prob: f64) -> usize {
    let k = (prob * n as f64 - 1e-9).ceil();
    if k <= 1.0 {
        0
    } else {
        (k as usize - 1).min(n - 1)
    }
}

/// Empirical quantile by the lower order statistic: `x_(ceil(prob*n))`,
/// with `prob = 0` mapping to the minimum.
///
/// At most `ceil(prob*n) - 1` values lie strictly below the result, so the
/// fraction below never exceeds `prob`.
pub fn empirical_quantile(values: &[f64], prob: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("empirical_quantile of an empty array"));
    }
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::invalid(format!(
            "quantile probability {prob} outside [0, 1]"
        )));
    }
    let k = quantile_rank(values.len(), prob);
    let mut scratch = values.to_vec();
    let (_, v, _) = scratch.select_nth_unstable_by(k, f64::total_cmp);
    Ok(*v)
}
