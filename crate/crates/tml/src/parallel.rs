//! Rayon versions of the core Monte Carlo and enumeration drivers.
//!
//! Each driver maps the core per-trial function over trial indices with
//! `into_par_iter().map(..).collect()`, which preserves index order, and then
//! hands the ordered values to the same reduction as the sequential driver.

use rayon::prelude::*;

use tml_core::dyck::{self, DyckError, Functional, McEstimate, Mode};
use tml_core::ensemble::EntryDistribution;
use tml_core::paths::{self, PathError, TraceSplit};
use tml_core::spectral::{self, ConcentrationRow, EdgeExperimentRow, SpectralError, TraceEstimate};

/// Runs `f` on a pool with `threads` workers (`None`: rayon's default).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

pub fn trace_values(
    dist: &EntryDistribution,
    n: usize,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, SpectralError> {
    (0..trials as u64)
        .into_par_iter()
        .map(|k| spectral::trace_trial(dist, n, s, seed, k))
        .collect()
}

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
    TraceEstimate::from_samples(&trace_values(dist, n, s, trials, seed)?, n, s)
}

/// Exact `E[Tr]` split over the leading vertex.
pub fn exact_trace(dist: &EntryDistribution, n: usize, s: usize, normalized: bool) -> Result<TraceSplit, PathError> {
    let parts = (1..=n as u32)
        .into_par_iter()
        .map(|first| paths::exact_trace_from(dist, n, s, first))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(paths::reduce_trace_parts(&parts, n, s, normalized))
}

pub fn lambda_max_values(
    dist: &EntryDistribution,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, SpectralError> {
    (0..trials as u64)
        .into_par_iter()
        .map(|k| spectral::lambda_max_trial(dist, n, seed, k))
        .collect()
}

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
            let lambdas = lambda_max_values(dist, n, trials, seed)?;
            EdgeExperimentRow::from_values(n, dist.sigma(), epsilon, &lambdas)
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
    let lambdas = lambda_max_values(dist, n, trials, seed)?;
    Ok(spectral::concentration_table(&lambdas, n, dist.bound_k(), t_grid))
}

/// `E f` under the uniform Dyck measure; Monte Carlo samples run in parallel.
pub fn dyck_expectation(s: usize, f: Functional, mode: Mode) -> Result<McEstimate, DyckError> {
    match mode {
        Mode::Exact => dyck::expectation(s, f, mode),
        Mode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(DyckError::TooFewSamples(2));
            }
            let values = (0..samples as u64)
                .into_par_iter()
                .map(|k| dyck::mc_sample(s, f, seed, k))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(McEstimate::from_values(&values))
        }
    }
}

/// Empirical `P(max x = k)`, `k = 0..=s`.
pub fn max_level_tail(s: usize, trials: usize, seed: u64) -> Vec<(usize, f64)> {
    let levels: Vec<usize> = (0..trials as u64)
        .into_par_iter()
        .map(|k| dyck::sample_dyck(s, tml_core::trial_seed(seed, k)).max_level() as usize)
        .collect();
    let mut hist = vec![0usize; s + 1];
    for l in levels {
        hist[l] += 1;
    }
    hist.into_iter()
        .enumerate()
        .map(|(k, c)| (k, c as f64 / trials.max(1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_sequential_drivers() {
        let d = EntryDistribution::skew12();
        let seq = spectral::mc_expected_trace(&d, 4, 2, 300, 9).unwrap();
        for threads in [Some(1), Some(3)] {
            let par = with_threads(threads, || mc_expected_trace(&d, 4, 2, 300, 9).unwrap());
            assert_eq!(par, seq);
        }
        let exact = paths::exact_expected_trace(&d, 3, 3, true).unwrap();
        assert_eq!(exact_trace(&d, 3, 3, true).unwrap().total, exact);
        let mode = Mode::MonteCarlo { samples: 500, seed: 4 };
        assert_eq!(dyck_expectation(20, Functional::K, mode).unwrap(), dyck::expectation(20, Functional::K, mode).unwrap());
        assert_eq!(max_level_tail(12, 400, 2), dyck::max_level_tail(12, 400, 2));
        let rows = edge_exceedance_experiment(&d, &[30], 6, 0.05, 1).unwrap();
        assert_eq!(rows, spectral::edge_exceedance_experiment(&d, &[30], 6, 0.05, 1).unwrap());
    }
}
