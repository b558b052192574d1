//! Entry laws and symmetric matrix sampling.
//!
//! Entries follow a finite discrete law with mean zero, positive variance and
//! (typically) nonzero third moment. The support is finite so every moment is
//! exact up to floating point, which is what the path-enumeration oracle needs.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Highest moment order kept in the cache.
pub const MOMENT_CACHE_DEPTH: usize = 64;

const TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("support and probabilities differ in length ({support} vs {probabilities})")]
    LengthMismatch { support: usize, probabilities: usize },
    #[error("a law needs at least two atoms, got {0}")]
    TooFewAtoms(usize),
    #[error("probability {0} is not in (0, 1]")]
    BadProbability(f64),
    #[error("support value {0} is not finite")]
    BadSupport(f64),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("mean is {0}, the law must be centered")]
    NotCentered(f64),
    #[error("variance is zero")]
    ZeroVariance,
    #[error("cannot parse distribution spec `{0}`")]
    Parse(String),
}

/// A finite discrete law for the matrix entries with cached moments.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryDistribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
    moments: Vec<f64>,
    sigma: f64,
    mu3: f64,
    bound_k: f64,
    name: Option<String>,
}

impl EntryDistribution {
    /// Validates a law and caches its moments up to [`MOMENT_CACHE_DEPTH`].
    pub fn new(support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self, DistributionError> {
        if support.len() != probabilities.len() {
            return Err(DistributionError::LengthMismatch {
                support: support.len(),
                probabilities: probabilities.len(),
            });
        }
        if support.len() < 2 {
            return Err(DistributionError::TooFewAtoms(support.len()));
        }
        if let Some(&x) = support.iter().find(|x| !x.is_finite()) {
            return Err(DistributionError::BadSupport(x));
        }
        if let Some(&p) = probabilities.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
            return Err(DistributionError::BadProbability(p));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > TOLERANCE {
            return Err(DistributionError::NotNormalized(total));
        }
        let moments: Vec<f64> = (0..=MOMENT_CACHE_DEPTH)
            .map(|k| raw_moment(&support, &probabilities, k as u32))
            .collect();
        if moments[1].abs() > TOLERANCE {
            return Err(DistributionError::NotCentered(moments[1]));
        }
        if moments[2] <= 0.0 {
            return Err(DistributionError::ZeroVariance);
        }
        let bound_k = support.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        Ok(Self {
            sigma: libm::sqrt(moments[2]),
            mu3: moments[3],
            bound_k,
            support,
            probabilities,
            moments,
            name: None,
        })
    }

    /// Symmetric two-point law on {-1, 1}.
    pub fn rademacher() -> Self {
        Self::new(alloc::vec![-1.0, 1.0], alloc::vec![0.5, 0.5])
            .expect("valid law")
            .named("rademacher")
    }

    /// Skewed two-point law on {-1, 2} with weights 2/3, 1/3: σ² = 2, μ₃ = 2.
    pub fn skew12() -> Self {
        Self::new(alloc::vec![-1.0, 2.0], alloc::vec![2.0 / 3.0, 1.0 / 3.0])
            .expect("valid law")
            .named("skew12")
    }

    pub fn named(mut self, name: &str) -> Self {
        self.name = Some(name.to_string());
        self
    }

    /// Preset name, if the law came from one.
    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Parses `rademacher`, `skew12`, or `support=a,b,..;probs=p,q,..`.
    ///
    /// Numbers may be written as decimals or as ratios such as `2/3`. The
    /// centering and normalization checks use the usual 1e-12 tolerance, so
    /// rounded decimals like `0.6667` are rejected.
    pub fn parse(spec: &str) -> Result<Self, DistributionError> {
        let spec = spec.trim();
        match spec {
            "rademacher" => return Ok(Self::rademacher()),
            "skew12" => return Ok(Self::skew12()),
            _ => {}
        }
        let bad = || DistributionError::Parse(spec.to_string());
        let mut support = None;
        let mut probs = None;
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let values = value
                .split(',')
                .map(|v| parse_number(v.trim()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(bad)?;
            match key.trim() {
                "support" => support = Some(values),
                "probs" | "probabilities" => probs = Some(values),
                _ => return Err(bad()),
            }
        }
        match (support, probs) {
            (Some(s), Some(p)) => Self::new(s, p),
            _ => Err(bad()),
        }
    }

    /// Canonical text form accepted by [`EntryDistribution::parse`].
    pub fn spec_string(&self) -> String {
        if let Some(name) = &self.name {
            return name.clone();
        }
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| alloc::format!("{x:?}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        alloc::format!("support={};probs={}", join(&self.support), join(&self.probabilities))
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Standard deviation σ.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn variance(&self) -> f64 {
        self.moments[2]
    }

    /// Third moment μ₃.
    pub fn mu3(&self) -> f64 {
        self.mu3
    }

    /// Largest absolute support value; bounds every absolute moment by `K^k`.
    pub fn bound_k(&self) -> f64 {
        self.bound_k
    }

    /// `Σ pᵢ xᵢᵏ`. Orders above the cache depth are computed on demand.
    pub fn moment(&self, k: u32) -> f64 {
        self.moments
            .get(k as usize)
            .copied()
            .unwrap_or_else(|| raw_moment(&self.support, &self.probabilities, k))
    }

    /// Draws one entry.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let index = WeightedIndex::new(&self.probabilities).expect("validated weights");
        self.support[index.sample(rng)]
    }
}

fn raw_moment(support: &[f64], probabilities: &[f64], k: u32) -> f64 {
    support
        .iter()
        .zip(probabilities)
        .map(|(x, p)| p * libm::pow(*x, k as f64))
        .sum()
}

fn parse_number(token: &str) -> Option<f64> {
    match token.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().ok()?;
            let den: f64 = den.trim().parse().ok()?;
            (den != 0.0).then(|| num / den)
        }
        None => token.parse().ok(),
    }
}

/// One realization of the unnormalized symmetric matrix `M_N = (a_ij)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSample {
    n: usize,
    entries: Vec<f64>,
    seed: u64,
}

impl MatrixSample {
    /// Builds a sample from a dense row-major array. Panics unless the array is
    /// `n × n` and exactly symmetric.
    pub fn from_dense(n: usize, entries: Vec<f64>) -> Self {
        assert!(n >= 1, "dimension must be positive");
        assert_eq!(entries.len(), n * n, "expected an n x n array");
        for i in 0..n {
            for j in 0..i {
                assert_eq!(entries[i * n + j], entries[j * n + i], "matrix is not symmetric");
            }
        }
        Self { n, entries, seed: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Unnormalized entry `a_ij` (0-based indices).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Row-major entries of `M_N`.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry of the normalized matrix `A_N = M_N / √N`.
    #[inline]
    pub fn normalized(&self, i: usize, j: usize) -> f64 {
        self.get(i, j) / self.scale(true)
    }

    /// `√N` when `normalized`, else 1.
    pub fn scale(&self, normalized: bool) -> f64 {
        if normalized {
            libm::sqrt(self.n as f64)
        } else {
            1.0
        }
    }

    /// Row-major copy of `M_N` (or `A_N`).
    pub fn to_dense(&self, normalized: bool) -> Vec<f64> {
        let c = self.scale(normalized);
        if c == 1.0 {
            self.entries.clone()
        } else {
            self.entries.iter().map(|x| x / c).collect()
        }
    }
}

/// Samples `M_N`: the upper triangle (diagonal included) is filled row by row
/// with i.i.d. draws from `dist` using a ChaCha8 stream seeded by `seed`, then
/// mirrored.
pub fn sample_symmetric_matrix(dist: &EntryDistribution, n: usize, seed: u64) -> MatrixSample {
    assert!(n >= 1, "dimension must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = WeightedIndex::new(&dist.probabilities).expect("validated weights");
    let mut entries = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let a = dist.support[index.sample(&mut rng)];
            entries[i * n + j] = a;
            entries[j * n + i] = a;
        }
    }
    MatrixSample { n, entries, seed }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_moments() {
        let d = EntryDistribution::rademacher();
        assert_eq!(d.sigma(), 1.0);
        assert_eq!(d.mu3(), 0.0);
        assert_eq!(d.bound_k(), 1.0);
        assert_eq!(d.moment(4), 1.0);
        for k in (1..=63).step_by(2) {
            assert_eq!(d.moment(k), 0.0);
        }
    }

    #[test]
    fn skew12_moments() {
        let d = EntryDistribution::new(alloc::vec![-1.0, 2.0], alloc::vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!(d.moment(1).abs() < 1e-15);
        assert!((d.variance() - 2.0).abs() < 1e-14);
        assert!((d.moment(3) - 2.0).abs() < 1e-14);
        assert!((d.mu3() - 2.0).abs() < 1e-14);
        assert_eq!(d.bound_k(), 2.0);
        assert_eq!(d.moment(0), 1.0);
        for k in 1..=MOMENT_CACHE_DEPTH as u32 {
            assert!(d.moment(k).abs() <= libm::pow(d.bound_k(), k as f64) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn rejects_uncentered_and_degenerate_laws() {
        assert!(matches!(
            EntryDistribution::new(alloc::vec![-1.0, 1.0], alloc::vec![0.3, 0.7]),
            Err(DistributionError::NotCentered(_))
        ));
        assert!(matches!(
            EntryDistribution::new(alloc::vec![-1.0, 1.0], alloc::vec![0.5, 0.6]),
            Err(DistributionError::NotNormalized(_))
        ));
        assert!(matches!(
            EntryDistribution::new(alloc::vec![0.0, 0.0], alloc::vec![0.5, 0.5]),
            Err(DistributionError::ZeroVariance)
        ));
        assert!(matches!(
            EntryDistribution::new(alloc::vec![1.0], alloc::vec![1.0]),
            Err(DistributionError::TooFewAtoms(1))
        ));
        assert!(EntryDistribution::new(alloc::vec![-1.0, 1.0], alloc::vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn parses_presets_and_explicit_laws() {
        assert_eq!(EntryDistribution::parse("rademacher").unwrap().sigma(), 1.0);
        let d = EntryDistribution::parse("support=-1,2;probs=2/3,1/3").unwrap();
        assert!((d.variance() - 2.0).abs() < 1e-14);
        // four-digit decimals leave a mean of about -1e-4
        assert!(matches!(
            EntryDistribution::parse("support=-1,2;probs=0.6667,0.3333"),
            Err(DistributionError::NotCentered(_))
        ));
        assert!(EntryDistribution::parse("support=-1,2").is_err());
        assert!(EntryDistribution::parse("weird").is_err());
        let round = EntryDistribution::parse(&d.spec_string()).unwrap();
        assert_eq!(round.support(), d.support());
    }

    #[test]
    fn sampling_is_deterministic_and_symmetric() {
        let d = EntryDistribution::skew12();
        let a = sample_symmetric_matrix(&d, 7, 99);
        let b = sample_symmetric_matrix(&d, 7, 99);
        assert_eq!(a, b);
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(a.get(i, j), a.get(j, i));
                assert!(d.support().contains(&a.get(i, j)));
            }
        }
        let one = sample_symmetric_matrix(&d, 1, 5);
        assert!(d.support().contains(&one.get(0, 0)));
        assert_ne!(a, sample_symmetric_matrix(&d, 7, 100));
    }

    #[test]
    fn off_diagonal_mean_is_near_zero() {
        let d = EntryDistribution::skew12();
        let n = 50;
        let m = sample_symmetric_matrix(&d, n, 2024);
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += m.get(i, j);
                count += 1;
            }
        }
        let mean = sum / count as f64;
        let stderr = d.sigma() / libm::sqrt(count as f64);
        assert!(mean.abs() < 5.0 * stderr, "mean {mean}, stderr {stderr}");
    }
}
