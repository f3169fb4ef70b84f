//! Monotone scalar root finding and Monte Carlo averaging.
//!
//! Every calibration in the crate has the shape "find the scalar that makes a
//! sample average hit a target". The batch is frozen for the duration of a
//! calibration, so the objective is deterministic and monotone and plain
//! bisection is enough.
//!
//! Sums are accumulated with Neumaier compensation over fixed-size chunks and
//! the chunk partials are combined in index order, so results do not depend on
//! the number of worker threads.

use std::ops::Range;

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 200;
const MAX_EXPANSIONS: usize = 64;

/// Chunk length for parallel reductions. Changing it changes the low bits of
/// every reported sum.
pub const REDUCE_CHUNK: usize = 1 << 14;

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Sum of `term(i)` for `i` in `0..n`, deterministic for any thread count.
pub fn sum_by<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partials: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CompensatedSum::new();
            let end = ((c + 1) * REDUCE_CHUNK).min(n);
            for i in c * REDUCE_CHUNK..end {
                acc.add(term(i));
            }
            acc.value()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Arithmetic mean of `term(i)` over `0..n`. Returns NaN for `n == 0`.
pub fn mean_by<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    sum_by(n, term) / n as f64
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Mean and standard error (sample standard deviation over `sqrt(n)`).
pub fn mc_mean(values: &[f64]) -> Result<MeanEstimate> {
    if values.is_empty() {
        return Err(Error::invalid("mc_mean of an empty array"));
    }
    let n = values.len();
    let mean = mean_by(n, |i| values[i]);
    let stderr = if n < 2 {
        0.0
    } else {
        let ss = sum_by(n, |i| {
            let d = values[i] - mean;
            d * d
        });
        (ss / (n - 1) as f64).sqrt() / (n as f64).sqrt()
    };
    Ok(MeanEstimate { mean, stderr, n })
}

/// Batch-means estimate: splits `0..n` into `sections` contiguous ranges,
/// evaluates `estimator` on each, and reports the mean of the section values
/// with the standard error across sections.
///
/// Used for quantile-type estimators where no per-state stream exists. The
/// returned mean is the average over sections, not the full-batch value.
pub fn batch_means<F>(n: usize, sections: usize, estimator: F) -> Result<MeanEstimate>
where
    F: Fn(Range<usize>) -> Result<f64> + Sync,
{
    if sections < 2 || n < sections {
        return Err(Error::invalid(format!(
            "batch_means needs at least 2 sections of one state (n={n}, sections={sections})"
        )));
    }
    let values: Vec<f64> = (0..sections)
        .into_par_iter()
        .map(|s| estimator(s * n / sections..(s + 1) * n / sections))
        .collect::<Result<_>>()?;
    let est = mc_mean(&values)?;
    Ok(MeanEstimate { n, ..est })
}

/// A scalar equation `objective(x) = target` with a monotone objective.
pub struct RootProblem<F> {
    pub objective: F,
    pub target: f64,
    pub bracket: (f64, f64),
    pub tol: f64,
    pub max_iter: usize,
}

impl<F: Fn(f64) -> f64> RootProblem<F> {
    pub fn new(objective: F, target: f64, lo: f64, hi: f64) -> Self {
        Self {
            objective,
            target,
            bracket: (lo, hi),
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }

    pub fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }
}

fn expand(lo: f64, hi: f64) -> (f64, f64) {
    let width = hi - lo;
    let lo = if lo > 0.0 { lo / 2.0 } else { lo - width };
    let hi = if hi > 0.0 { hi * 2.0 } else { hi + width };
    (lo, hi)
}

/// Bisection on a monotone objective.
///
/// The bracket is expanded geometrically (positive endpoints are halved or
/// doubled, so a strictly positive bracket stays positive) until the objective
/// crosses the target. Stops when the residual is within
/// `tol * max(1, |target|)` or the bracket is narrower than
/// `tol * max(1, |x|)`.
pub fn bisect_monotone<F: Fn(f64) -> f64>(problem: &RootProblem<F>) -> Result<f64> {
    let RootProblem {
        objective,
        target,
        bracket: (mut lo, mut hi),
        tol,
        max_iter,
    } = problem;
    let (target, tol, max_iter) = (*target, *tol, *max_iter);
    if !(tol > 0.0) || max_iter == 0 || !(lo < hi) {
        return Err(Error::invalid(format!(
            "bad root problem: tol={tol}, max_iter={max_iter}, bracket=[{lo}, {hi}]"
        )));
    }

    let residual = |x: f64| objective(x) - target;
    let mut r_lo = residual(lo);
    let mut r_hi = residual(hi);
    let mut expansions = 0;
    loop {
        if r_lo == 0.0 {
            return Ok(lo);
        }
        if r_hi == 0.0 {
            return Ok(hi);
        }
        if r_lo.is_finite() && r_hi.is_finite() && (r_lo < 0.0) != (r_hi < 0.0) {
            break;
        }
        if expansions == MAX_EXPANSIONS {
            return Err(Error::NoRoot { target, lo, hi });
        }
        (lo, hi) = expand(lo, hi);
        r_lo = residual(lo);
        r_hi = residual(hi);
        expansions += 1;
    }

    let accept = tol * target.abs().max(1.0);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let r_mid = residual(mid);
        if r_mid.abs() <= accept {
            return Ok(mid);
        }
        if (r_mid < 0.0) == (r_lo < 0.0) {
            lo = mid;
            r_lo = r_mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * mid.abs().max(1.0) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        lo,
        hi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_four() {
        let x = bisect_monotone(&RootProblem::new(|x| x * x, 4.0, 0.0, 10.0)).unwrap();
        assert!((x - 2.0).abs() <= 2e-6, "{x}");
    }

    #[test]
    fn bracket_choice_does_not_matter() {
        let a = bisect_monotone(&RootProblem::new(|x| x * x, 4.0, 0.0, 10.0)).unwrap();
        let b = bisect_monotone(&RootProblem::new(|x| x * x, 4.0, 1.0, 3.0)).unwrap();
        assert!((a - b).abs() <= 2.0 * DEFAULT_TOL * 4.0);
    }

    #[test]
    fn inverse_of_exponential_cdf() {
        // closed form: -ln(0.8)
        let x =
            bisect_monotone(&RootProblem::new(|x: f64| 1.0 - (-x).exp(), 0.2, 0.0, 1.0)).unwrap();
        assert!((x - 0.223_143_551_314_209_76).abs() <= 2e-6);
    }

    #[test]
    fn bracket_expands_to_find_root() {
        let x = bisect_monotone(&RootProblem::new(|x| x, 1000.0, 0.5, 1.0)).unwrap();
        assert!((x - 1000.0).abs() < 1e-3);
        // decreasing objective, positive bracket stays positive
        let y = bisect_monotone(&RootProblem::new(|x| 1.0 / x, 0.01, 1.0, 2.0)).unwrap();
        assert!(y > 2.0);
        assert!((1.0 / y - 0.01).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn constant_objective_has_no_root() {
        let err = bisect_monotone(&RootProblem::new(|_| 5.0, 4.0, 0.0, 10.0)).unwrap_err();
        assert!(matches!(err, Error::NoRoot { .. }));
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let err = bisect_monotone(
            &RootProblem::new(|x| x, 0.3, 0.0, 1.0)
                .tol(1e-15)
                .max_iter(3),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }));
    }

    #[test]
    fn mean_of_constant_has_zero_stderr() {
        let e = mc_mean(&[2.0, 2.0, 2.0, 2.0]).unwrap();
        assert_eq!(e.mean, 2.0);
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.n, 4);
    }

    #[test]
    fn two_point_mean() {
        let e = mc_mean(&[0.0, 2.0]).unwrap();
        assert_eq!(e.mean, 1.0);
        assert!((e.stderr - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_mean_is_rejected() {
        assert!(matches!(mc_mean(&[]), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let mut s = CompensatedSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn sum_by_is_deterministic_across_pools() {
        let n = 5 * REDUCE_CHUNK + 17;
        let term = |i: usize| ((i as f64) * 0.37).sin() * 1e3;
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| sum_by(n, term));
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| sum_by(n, term));
        assert_eq!(one.to_bits(), many.to_bits());
    }

    #[test]
    fn batch_means_over_sections() {
        let v: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let e = batch_means(v.len(), 4, |r| Ok(v[r].iter().sum::<f64>() / 25.0)).unwrap();
        assert!((e.mean - 49.5).abs() < 1e-12);
        assert!(e.stderr > 0.0);
        assert!(batch_means(3, 4, |_| Ok(0.0)).is_err());
    }
}
