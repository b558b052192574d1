//! Spectral measurements on sampled matrices and the Monte Carlo experiments
//! around the edge bound `λ_max(A_N) ≤ 2σ + N^{−6/11+ε}`.
//!
//! Every Monte Carlo routine is split into a per-trial function, seeded by
//! [`trial_seed`](crate::trial_seed), and a reduction that consumes the trial
//! values in index order. The sequential drivers here and the threaded ones in
//! the `tml` crate share both halves, so results do not depend on thread count.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dyck::catalan_u128;
use crate::ensemble::{sample_symmetric_matrix, EntryDistribution, MatrixSample};
use crate::linalg::{self, EigenError, Which, DEFAULT_TOLERANCE};
use crate::numeric::ln_catalan;
use crate::trial_seed;

/// Largest dimension handled by the dense full-spectrum route.
pub const DENSE_LIMIT: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error("result is not finite")]
    NonFinite,
    #[error("invalid argument: {0}")]
    Domain(&'static str),
}

/// Sample mean and standard error of `Tr A^{2s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub s: usize,
    pub n: usize,
}

impl TraceEstimate {
    /// Summarizes `values` (summed in order).
    pub fn from_samples(values: &[f64], n: usize, s: usize) -> Result<Self, SpectralError> {
        if values.len() < 2 {
            return Err(SpectralError::Domain("need at least two trials"));
        }
        let (mean, stderr) = mean_and_stderr(values);
        Ok(Self { mean, stderr, trials: values.len(), s, n })
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, libm::sqrt(var / k))
}

/// Largest eigenvalue of `M_N` (or of `A_N = M_N/√N`).
pub fn largest_eigenvalue(m: &MatrixSample, normalized: bool) -> Result<f64, SpectralError> {
    largest_eigenvalue_with(m, normalized, DEFAULT_TOLERANCE)
}

pub fn largest_eigenvalue_with(m: &MatrixSample, normalized: bool, tolerance: f64) -> Result<f64, SpectralError> {
    let n = m.n();
    let top = if n <= DENSE_LIMIT {
        *linalg::symmetric_eigenvalues(m.entries(), n)?.last().expect("n >= 1")
    } else {
        linalg::lanczos_extremes(m.entries(), n, Which::Largest, tolerance)?.max
    };
    Ok(top / m.scale(normalized))
}

/// `max |λ|` of `M_N` (or `A_N`).
pub fn spectral_norm(m: &MatrixSample, normalized: bool) -> Result<f64, SpectralError> {
    let n = m.n();
    let (lo, hi) = if n <= DENSE_LIMIT {
        let ev = linalg::symmetric_eigenvalues(m.entries(), n)?;
        (ev[0], ev[n - 1])
    } else {
        let ex = linalg::lanczos_extremes(m.entries(), n, Which::Both, DEFAULT_TOLERANCE)?;
        (ex.min, ex.max)
    };
    Ok(lo.abs().max(hi.abs()) / m.scale(normalized))
}

/// All eigenvalues in ascending order.
pub fn spectrum(m: &MatrixSample, normalized: bool) -> Result<Vec<f64>, SpectralError> {
    let c = m.scale(normalized);
    Ok(linalg::symmetric_eigenvalues(m.entries(), m.n())?.into_iter().map(|x| x / c).collect())
}

fn finite(x: f64) -> Result<f64, SpectralError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SpectralError::NonFinite)
    }
}

fn scaled_trace(m: &MatrixSample, s: usize, normalized: bool, raw: f64) -> Result<f64, SpectralError> {
    // Tr (M/c)^{2s} = Tr M^{2s} / c^{2s}
    let c = m.scale(normalized);
    finite(raw / libm::pow(c, 2.0 * s as f64))
}

/// `Tr M^{2s}` (or `Tr A^{2s}`) by repeated squaring.
pub fn trace_power(m: &MatrixSample, s: usize, normalized: bool) -> Result<f64, SpectralError> {
    if s == 0 {
        return Ok(m.n() as f64);
    }
    let a = m.to_dense(normalized);
    let exponent = u32::try_from(2 * s).map_err(|_| SpectralError::Domain("s too large"))?;
    finite(linalg::trace_of_power(&a, m.n(), exponent))
}

/// `Tr M^{2s}` (or `Tr A^{2s}`) as `Σ λ_i^{2s}`.
pub fn trace_power_by_eigenvalues(m: &MatrixSample, s: usize, normalized: bool) -> Result<f64, SpectralError> {
    let ev = linalg::symmetric_eigenvalues(m.entries(), m.n())?;
    let raw: f64 = ev.iter().map(|x| libm::pow(*x, 2.0 * s as f64)).sum();
    scaled_trace(m, s, normalized, raw)
}

/// `Tr A^{2s}` of the matrix drawn for trial `index`.
pub fn trace_trial(dist: &EntryDistribution, n: usize, s: usize, seed: u64, index: u64) -> Result<f64, SpectralError> {
    let m = sample_symmetric_matrix(dist, n, trial_seed(seed, index));
    trace_power(&m, s, true)
}

/// Monte Carlo estimate of `E[Tr A^{2s}]`.
pub fn mc_expected_trace(
    dist: &EntryDistribution,
    n: usize,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<TraceEstimate, SpectralError> {
    if trials < 2 {
        return Err(SpectralError::Domain("need at least two trials"));
    }
    let values = (0..trials as u64)
        .map(|k| trace_trial(dist, n, s, seed, k))
        .collect::<Result<Vec<f64>, _>>()?;
    TraceEstimate::from_samples(&values, n, s)
}

/// Leading-order `E[Tr A^{2s}] ≈ N·T_{0,2s}·σ^{2s}`.
pub fn wigner_trace_prediction(n: usize, s: usize, sigma: f64) -> f64 {
    let catalan = match catalan_u128(s) {
        Some(c) if c < (1u128 << 53) => c as f64,
        _ => libm::exp(ln_catalan(s as u64)),
    };
    n as f64 * catalan * libm::pow(sigma, 2.0 * s as f64)
}

/// `N·(2σ)^{2s}/(√π·s^{3/2})`, the large-`s` form of [`wigner_trace_prediction`].
pub fn wigner_trace_prediction_asymptotic(n: usize, s: usize, sigma: f64) -> f64 {
    let sf = s as f64;
    n as f64 * libm::pow(2.0 * sigma, 2.0 * sf) / (libm::sqrt(core::f64::consts::PI) * libm::pow(sf, 1.5))
}

/// Markov bound `min(1, E[Tr A^{2s}] / threshold^{2s})` on `P(λ_max ≥ threshold)`.
pub fn markov_tail_bound(expected_trace: f64, s: usize, threshold: f64) -> Result<f64, SpectralError> {
    if !(threshold > 0.0) {
        return Err(SpectralError::Domain("threshold must be positive"));
    }
    let ln = libm::log(expected_trace) - 2.0 * s as f64 * libm::log(threshold);
    Ok(libm::exp(ln).min(1.0))
}

/// `2σ + n^{−6/11+ε}`.
pub fn edge_threshold(sigma: f64, n: usize, epsilon: f64) -> f64 {
    2.0 * sigma + libm::pow(n as f64, -6.0 / 11.0 + epsilon)
}

/// `λ_max(A_N)` of the matrix drawn for trial `index`.
pub fn lambda_max_trial(dist: &EntryDistribution, n: usize, seed: u64, index: u64) -> Result<f64, SpectralError> {
    let m = sample_symmetric_matrix(dist, n, trial_seed(seed, index));
    largest_eigenvalue(&m, true)
}

/// Fraction of trials whose normalized `λ_max` exceeds `2σ + n^{−6/11+ε}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeExperimentRow {
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub threshold: f64,
    pub exceed_fraction: f64,
    /// Sample mean of `λ_max(A_N)`.
    pub mean_lambda: f64,
    /// Largest observed `λ_max(A_N)`.
    pub max_lambda: f64,
}

impl EdgeExperimentRow {
    pub fn from_values(n: usize, sigma: f64, epsilon: f64, lambdas: &[f64]) -> Result<Self, SpectralError> {
        if !(epsilon > 0.0) {
            return Err(SpectralError::Domain("epsilon must be positive"));
        }
        if lambdas.is_empty() {
            return Err(SpectralError::Domain("need at least one trial"));
        }
        let threshold = edge_threshold(sigma, n, epsilon);
        let exceed = lambdas.iter().filter(|&&x| x > threshold).count();
        Ok(Self {
            n,
            trials: lambdas.len(),
            epsilon,
            threshold,
            exceed_fraction: exceed as f64 / lambdas.len() as f64,
            mean_lambda: lambdas.iter().sum::<f64>() / lambdas.len() as f64,
            max_lambda: lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// One row per entry of `n_list`; trial seeds restart from `seed` for each `n`.
pub fn edge_exceedance_experiment(
    dist: &EntryDistribution,
    n_list: &[usize],
    trials: usize,
    epsilon: f64,
    seed: u64,
) -> Result<Vec<EdgeExperimentRow>, SpectralError> {
    n_list
        .iter()
        .map(|&n| {
            let lambdas = (0..trials as u64)
                .map(|k| lambda_max_trial(dist, n, seed, k))
                .collect::<Result<Vec<f64>, _>>()?;
            EdgeExperimentRow::from_values(n, dist.sigma(), epsilon, &lambdas)
        })
        .collect()
}

/// Empirical tail of `|λ_max − mean|` at scale `K·t/√n` next to `4e^{−t²/32}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationRow {
    pub t: f64,
    pub deviation: f64,
    pub empirical_tail: f64,
    /// `4e^{−t²/32}`, unclamped.
    pub bound: f64,
    /// `min(1, bound)`.
    pub bound_clamped: f64,
}

impl ConcentrationRow {
    pub fn within_bound(&self) -> bool {
        self.empirical_tail <= self.bound
    }
}

/// Tail table around the sample mean of `lambdas` (the mean of `λ_max` itself
/// is unknown).
pub fn concentration_table(lambdas: &[f64], n: usize, k: f64, t_grid: &[f64]) -> Vec<ConcentrationRow> {
    let mean = lambdas.iter().sum::<f64>() / lambdas.len() as f64;
    let mut gaps: Vec<f64> = lambdas.iter().map(|x| (x - mean).abs()).collect();
    gaps.sort_by(f64::total_cmp);
    t_grid
        .iter()
        .map(|&t| {
            let deviation = k * t / libm::sqrt(n as f64);
            let below = gaps.partition_point(|g| *g < deviation);
            let bound = 4.0 * libm::exp(-t * t / 32.0);
            ConcentrationRow {
                t,
                deviation,
                empirical_tail: (gaps.len() - below) as f64 / gaps.len() as f64,
                bound,
                bound_clamped: bound.min(1.0),
            }
        })
        .collect()
}

pub fn concentration_experiment(
    dist: &EntryDistribution,
    n: usize,
    trials: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<Vec<ConcentrationRow>, SpectralError> {
    if trials < 100 {
        return Err(SpectralError::Domain("need at least 100 trials"));
    }
    let lambdas = (0..trials as u64)
        .map(|k| lambda_max_trial(dist, n, seed, k))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(concentration_table(&lambdas, n, dist.bound_k(), t_grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::exact_expected_trace;
    use alloc::vec;

    fn dense(n: usize, v: &[f64]) -> MatrixSample {
        MatrixSample::from_dense(n, v.to_vec())
    }

    #[test]
    fn small_eigenvalues() {
        assert_eq!(largest_eigenvalue(&dense(1, &[3.5]), false).unwrap(), 3.5);
        assert!((largest_eigenvalue(&dense(2, &[0.0, 1.0, 1.0, 0.0]), false).unwrap() - 1.0).abs() < 1e-14);
        let m = dense(2, &[0.0, -3.0, -3.0, 0.0]);
        assert!((spectral_norm(&m, false).unwrap() - 3.0).abs() < 1e-14);
        let m = dense(2, &[-5.0, 0.0, 0.0, 1.0]);
        assert_eq!(largest_eigenvalue(&m, false).unwrap(), 1.0);
        assert_eq!(spectral_norm(&m, false).unwrap(), 5.0);
    }

    #[test]
    fn trace_routes() {
        let id = dense(2, &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(trace_power(&id, 3, false).unwrap(), 2.0);
        let x = dense(2, &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(trace_power(&x, 2, false).unwrap(), 2.0);
        let d = EntryDistribution::skew12();
        for n in [3usize, 10, 64] {
            let m = sample_symmetric_matrix(&d, n, 11);
            for s in 1..=8 {
                for normalized in [false, true] {
                    let a = trace_power(&m, s, normalized).unwrap();
                    let b = trace_power_by_eigenvalues(&m, s, normalized).unwrap();
                    assert!((a - b).abs() <= 1e-6 * a.abs(), "n={n} s={s}");
                    let top = largest_eigenvalue(&m, normalized).unwrap();
                    assert!(a >= libm::pow(top, 2.0 * s as f64) * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn lanczos_route_matches_dense() {
        let d = EntryDistribution::rademacher();
        let m = sample_symmetric_matrix(&d, 260, 3);
        let full = spectrum(&m, true).unwrap();
        let top = largest_eigenvalue(&m, true).unwrap();
        assert!((top - full[259]).abs() < 1e-9 * full[259].abs());
        let norm = spectral_norm(&m, true).unwrap();
        assert!((norm - full[0].abs().max(full[259])).abs() < 1e-9);
    }

    #[test]
    fn mc_trace_small_cases() {
        let r = mc_expected_trace(&EntryDistribution::rademacher(), 1, 2, 50, 1).unwrap();
        assert_eq!((r.mean, r.stderr), (1.0, 0.0));
        let two = mc_expected_trace(&EntryDistribution::skew12(), 2, 1, 2, 1).unwrap();
        assert!(two.stderr.is_finite());
        assert!(mc_expected_trace(&EntryDistribution::skew12(), 2, 1, 1, 1).is_err());
        let d = EntryDistribution::skew12();
        let est = mc_expected_trace(&d, 3, 2, 20_000, 77).unwrap();
        let exact = exact_expected_trace(&d, 3, 2, true).unwrap();
        assert!((est.mean - exact).abs() <= 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn predictions() {
        assert_eq!(wigner_trace_prediction(10, 1, 1.0), 10.0);
        assert_eq!(wigner_trace_prediction(10, 2, 1.0), 20.0);
        let ratio = wigner_trace_prediction_asymptotic(1, 400, 1.0) / wigner_trace_prediction(1, 400, 1.0);
        assert!((ratio - 1.0).abs() < 0.01);
        let exact = exact_expected_trace(&EntryDistribution::rademacher(), 60, 2, true).unwrap();
        let r = exact / wigner_trace_prediction(60, 2, 1.0);
        assert!((0.9..=1.1).contains(&r), "{r}");
    }

    #[test]
    fn markov() {
        assert!((markov_tail_bound(20.0, 2, 10.0).unwrap() - 0.002).abs() < 1e-15);
        assert_eq!(markov_tail_bound(1.0, 3, 1.0).unwrap(), 1.0);
        assert!(markov_tail_bound(1.0, 3, 1e100).unwrap() < 1e-300);
        assert!(markov_tail_bound(1.0, 3, 0.0).is_err());
    }

    #[test]
    fn edge_rows() {
        let row = EdgeExperimentRow::from_values(100, 1.0, 0.05, &[1.9, 2.5, 2.0, 3.0]).unwrap();
        let expected = 2.0 + libm::pow(100.0, -6.0 / 11.0 + 0.05);
        assert!((row.threshold - expected).abs() < 1e-12);
        assert_eq!(row.exceed_fraction, 0.5);
        assert!(EdgeExperimentRow::from_values(100, 1.0, 0.0, &[1.0]).is_err());
        let rows = edge_exceedance_experiment(&EntryDistribution::rademacher(), &[20, 40], 5, 0.1, 9).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| (0.0..=1.0).contains(&r.exceed_fraction) && r.threshold > 2.0));
    }

    #[test]
    fn concentration_rows() {
        let lambdas = vec![1.0, 1.1, 0.9, 1.3, 0.7];
        let rows = concentration_table(&lambdas, 4, 1.0, &[0.0, 0.2, 0.4, 1.0]);
        assert_eq!(rows[0].empirical_tail, 1.0);
        assert_eq!(rows[0].bound, 4.0);
        assert_eq!(rows[0].bound_clamped, 1.0);
        assert!(rows.windows(2).all(|w| w[1].empirical_tail <= w[0].empirical_tail));
        assert!(concentration_experiment(&EntryDistribution::rademacher(), 10, 50, &[1.0], 1).is_err());
    }
}
