//! Dyck paths and the window functionals used to count preimages.
//!
//! For a path `x` of length `2s` and an instant `t1`, the window `r₁(t1)` is the
//! largest `r` with `x(t) ≥ x(t1)` on `[t1, t1 + r]`, capped at `2s − t1`.
//! `K(x) = Σ_{t1=0}^{2s} r₁(t1)` and `K^{⊗I}(x)` sums `Π r₁(t_j)` over
//! `0 < t_1 < ⋯ < t_I ≤ 2s`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::numeric::beta;

/// Largest `s` accepted by [`enumerate_dyck`].
pub const ENUMERATION_MAX_S: usize = 14;
/// Largest `s` for exact expectations.
pub const EXACT_MAX_S: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyckError {
    #[error("walk goes below zero at instant {0}")]
    Negative(usize),
    #[error("walk ends at level {0}, not 0")]
    Unbalanced(i64),
    #[error("step {0} is not ±1")]
    BadStep(i64),
    #[error("s = {s} exceeds the limit {limit}")]
    TooLarge { s: usize, limit: usize },
    #[error("instant {t} outside [0, {len}]")]
    Instant { t: usize, len: usize },
    #[error("integer overflow")]
    Overflow,
    #[error("need at least {0} samples")]
    TooFewSamples(usize),
    #[error("cannot parse {0:?}")]
    Parse(alloc::string::String),
}

/// A non-negative ±1 walk from 0 back to 0.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyckPath {
    steps: Vec<i8>,
}

impl DyckPath {
    pub fn new(steps: Vec<i8>) -> Result<Self, DyckError> {
        let mut level: i64 = 0;
        for (t, &st) in steps.iter().enumerate() {
            if st != 1 && st != -1 {
                return Err(DyckError::BadStep(st as i64));
            }
            level += st as i64;
            if level < 0 {
                return Err(DyckError::Negative(t + 1));
            }
        }
        if level != 0 {
            return Err(DyckError::Unbalanced(level));
        }
        Ok(Self { steps })
    }

    /// Parses `+`/`-` (or `U`/`D`) characters.
    pub fn parse(text: &str) -> Result<Self, DyckError> {
        let steps = text
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' | 'U' | 'u' | '(' => Ok(1),
                '-' | 'D' | 'd' | ')' | '−' => Ok(-1),
                _ => Err(DyckError::Parse(text.into())),
            })
            .collect::<Result<Vec<i8>, _>>()?;
        Self::new(steps)
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Half length.
    pub fn s(&self) -> usize {
        self.steps.len() / 2
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `x(0), …, x(2s)`.
    pub fn levels(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut level: i64 = 0;
        out.push(0);
        for &st in &self.steps {
            level += st as i64;
            out.push(level as u32);
        }
        out
    }

    pub fn max_level(&self) -> u32 {
        self.levels().into_iter().max().unwrap_or(0)
    }
}

impl fmt::Display for DyckPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &st in &self.steps {
            f.write_str(if st > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// Catalan number `(2s)!/(s!(s+1)!)`.
pub fn catalan(s: usize) -> BigUint {
    let mut c = BigUint::from(1u32);
    for k in 0..s {
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
    }
    c
}

/// `catalan(0), …, catalan(s_max)`.
pub fn catalan_table(s_max: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(s_max + 1);
    let mut c = BigUint::from(1u32);
    out.push(c.clone());
    for k in 0..s_max {
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
        out.push(c.clone());
    }
    out
}

/// Catalan number as `u128` (exact for `s ≤ 67`).
pub fn catalan_u128(s: usize) -> Option<u128> {
    let mut c: u128 = 1;
    for k in 0..s as u128 {
        c = c.checked_mul(2 * (2 * k + 1))? / (k + 2);
    }
    Some(c)
}

/// Checks `Σ_{k=1}^{s−1} C_k C_{s−k} ≤ factor·C_s` exactly for `2 ≤ s ≤ s_max`.
///
/// Uses `Σ_{k=0}^{s} C_k C_{s−k} = C_{s+1}`, so the left side is
/// `C_{s+1} − 2C_s`. Returns the first failing `s`.
pub fn check_catalan_convolution(s_max: usize, factor: u32) -> Result<(), usize> {
    let table = catalan_table(s_max + 1);
    let factor = BigUint::from(factor);
    for s in 2..=s_max {
        let two_c = &table[s] * 2u32;
        let lhs = &table[s + 1] - &two_c;
        if lhs > &factor * &table[s] {
            return Err(s);
        }
    }
    Ok(())
}

/// The same inequality by direct convolution, for cross-checking.
pub fn check_catalan_convolution_direct(s_max: usize, factor: u32) -> Result<(), usize> {
    let table = catalan_table(s_max);
    let factor = BigUint::from(factor);
    for s in 2..=s_max {
        let mut lhs = BigUint::from(0u32);
        for k in 1..s {
            lhs += &table[k] * &table[s - k];
        }
        if lhs > &factor * &table[s] {
            return Err(s);
        }
    }
    Ok(())
}

/// All Dyck paths of length `2s` in lexicographic order with `+1 < −1`.
pub fn enumerate_dyck(s: usize) -> Result<DyckIter, DyckError> {
    if s > ENUMERATION_MAX_S {
        return Err(DyckError::TooLarge { s, limit: ENUMERATION_MAX_S });
    }
    Ok(DyckIter::new(s))
}

#[derive(Debug, Clone)]
pub struct DyckIter {
    next: Option<Vec<i8>>,
    s: usize,
}

impl DyckIter {
    fn new(s: usize) -> Self {
        let mut first = vec![1i8; s];
        first.extend(core::iter::repeat(-1).take(s));
        Self { next: Some(first), s }
    }
}

impl Iterator for DyckIter {
    type Item = DyckPath;

    fn next(&mut self) -> Option<DyckPath> {
        let current = self.next.take()?;
        self.next = successor(&current, self.s);
        Some(DyckPath { steps: current })
    }
}

/// Next word: the rightmost `+` that can become `−` while staying non-negative,
/// followed by the smallest completion (all remaining `+` first).
fn successor(w: &[i8], s: usize) -> Option<Vec<i8>> {
    let mut balance: Vec<i64> = Vec::with_capacity(w.len() + 1);
    let mut ups: Vec<usize> = Vec::with_capacity(w.len() + 1);
    let (mut b, mut u) = (0i64, 0usize);
    for &st in w {
        balance.push(b);
        ups.push(u);
        b += st as i64;
        if st > 0 {
            u += 1;
        }
    }
    for i in (0..w.len()).rev() {
        if w[i] > 0 && balance[i] >= 1 {
            let mut out = w[..i].to_vec();
            out.push(-1);
            let remaining_ups = s - ups[i];
            out.extend(core::iter::repeat(1).take(remaining_ups));
            let rest = w.len() - out.len();
            out.extend(core::iter::repeat(-1).take(rest));
            return Some(out);
        }
    }
    None
}

/// Uniform Dyck path of length `2s` from `rng`.
///
/// Shuffles `s + 1` up-steps and `s` down-steps, rotates to start right after
/// the last minimum of the prefix sums (cycle lemma) and drops the leading up-step.
pub fn sample_dyck_with<R: rand::Rng + ?Sized>(s: usize, rng: &mut R) -> DyckPath {
    let mut w = vec![1i8; s + 1];
    w.extend(core::iter::repeat(-1).take(s));
    w.shuffle(rng);
    let (mut level, mut min, mut at) = (0i64, 0i64, 0usize);
    for (k, &st) in w.iter().enumerate().take(2 * s) {
        level += st as i64;
        if level <= min {
            min = level;
            at = k + 1;
        }
    }
    let steps: Vec<i8> = (1..=2 * s).map(|k| w[(at + k) % (2 * s + 1)]).collect();
    debug_assert_eq!(w[at], 1);
    DyckPath { steps }
}

pub fn sample_dyck(s: usize, seed: u64) -> DyckPath {
    sample_dyck_with(s, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `r₁(t)` for every `t ∈ [0, 2s]`, via next-smaller-element scanning.
pub fn descent_windows(x: &DyckPath) -> Vec<usize> {
    let lv = x.levels();
    let len = x.len();
    let mut out = vec![0usize; len + 1];
    let mut stack: Vec<usize> = Vec::new();
    for t in 0..=len {
        while let Some(&top) = stack.last() {
            if lv[t] < lv[top] {
                out[top] = t - 1 - top;
                stack.pop();
            } else {
                break;
            }
        }
        stack.push(t);
    }
    for top in stack {
        out[top] = len - top;
    }
    out
}

pub fn descent_window(x: &DyckPath, t1: usize) -> Result<usize, DyckError> {
    if t1 > x.len() {
        return Err(DyckError::Instant { t: t1, len: x.len() });
    }
    let lv = x.levels();
    Ok((t1 + 1..=x.len()).take_while(|&t| lv[t] >= lv[t1]).count())
}

/// `K(x) = Σ_{t1} r₁(t1)`.
pub fn k_functional(x: &DyckPath) -> u64 {
    descent_windows(x).iter().map(|&r| r as u64).sum()
}

/// `K(x)` as the double sum `Σ_{t1} Σ_{1≤l2≤2s−t1} 1{x ≥ x(t1) on [t1, t1+l2]}`.
pub fn k_functional_double_sum(x: &DyckPath) -> u64 {
    let lv = x.levels();
    let len = x.len();
    let mut total = 0;
    for t1 in 0..=len {
        for l2 in 1..=len - t1 {
            if (t1..=t1 + l2).all(|t| lv[t] >= lv[t1]) {
                total += 1;
            }
        }
    }
    total
}

/// `K^{⊗I}(x)`: elementary symmetric polynomial of degree `I` in `r₁(1), …, r₁(2s)`.
pub fn k_functional_tensor(x: &DyckPath, i: usize) -> Result<u128, DyckError> {
    let r = descent_windows(x);
    let values = &r[1..];
    if i > values.len() {
        return Ok(0);
    }
    let mut e = vec![0u128; i + 1];
    e[0] = 1;
    for &v in values {
        for k in (1..=i).rev() {
            let add = e[k - 1].checked_mul(v as u128).ok_or(DyckError::Overflow)?;
            e[k] = e[k].checked_add(add).ok_or(DyckError::Overflow)?;
        }
    }
    Ok(e[i])
}

/// `K^{⊗I}(x)` summed over explicit tuples `0 < t_1 < ⋯ < t_I ≤ 2s`.
pub fn k_functional_tensor_brute(x: &DyckPath, i: usize) -> u128 {
    fn go(r: &[usize], from: usize, left: usize, acc: u128) -> u128 {
        if left == 0 {
            return acc;
        }
        (from..r.len()).map(|t| go(r, t + 1, left - 1, acc * r[t] as u128)).sum()
    }
    let r = descent_windows(x);
    if i == 0 {
        return 1;
    }
    go(&r, 1, i, 1)
}

/// `Σ_{t1 ≤ s} 1{x ≥ x(t1) on [t1, t1 + s]}`.
pub fn stay_above_full_window(x: &DyckPath) -> u64 {
    let s = x.s();
    descent_windows(x)[..=s].iter().filter(|&&r| r >= s).count() as u64
}

/// Exact sum of an integer functional over all paths of length `2s`, with the
/// path count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactSum {
    pub total: u128,
    pub count: u128,
}

impl ExactSum {
    pub fn mean(&self) -> f64 {
        self.total as f64 / self.count as f64
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl McEstimate {
    /// Mean and standard error of `values`, summed in order.
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self { mean, stderr: libm::sqrt(var / n as f64), samples: n }
    }
}

/// How an expectation under the uniform Dyck measure is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo { samples: usize, seed: u64 },
}

/// The functionals exposed by [`expectation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Functional {
    K,
    KTensor(usize),
    StayAbove,
    MaxLevel,
}

impl Functional {
    pub fn eval(self, x: &DyckPath) -> Result<u128, DyckError> {
        Ok(match self {
            Functional::K => k_functional(x) as u128,
            Functional::KTensor(i) => k_functional_tensor(x, i)?,
            Functional::StayAbove => stay_above_full_window(x) as u128,
            Functional::MaxLevel => x.max_level() as u128,
        })
    }
}

pub fn exact_sum(s: usize, f: Functional) -> Result<ExactSum, DyckError> {
    if s > EXACT_MAX_S {
        return Err(DyckError::TooLarge { s, limit: EXACT_MAX_S });
    }
    let (mut total, mut count) = (0u128, 0u128);
    for x in enumerate_dyck(s)? {
        total = total.checked_add(f.eval(&x)?).ok_or(DyckError::Overflow)?;
        count += 1;
    }
    Ok(ExactSum { total, count })
}

/// Value of `f` on the path drawn for sample `index` of a run seeded with `seed`.
pub fn mc_sample(s: usize, f: Functional, seed: u64, index: u64) -> Result<f64, DyckError> {
    let x = sample_dyck(s, crate::trial_seed(seed, index));
    f.eval(&x).map(|v| v as f64)
}

/// `E f` under the uniform measure on Dyck paths of length `2s`.
pub fn expectation(s: usize, f: Functional, mode: Mode) -> Result<McEstimate, DyckError> {
    match mode {
        Mode::Exact => {
            let sum = exact_sum(s, f)?;
            Ok(McEstimate { mean: sum.mean(), stderr: 0.0, samples: sum.count as usize })
        }
        Mode::MonteCarlo { samples, seed } => {
            if samples < 2 {
                return Err(DyckError::TooFewSamples(2));
            }
            let values = (0..samples as u64)
                .map(|k| mc_sample(s, f, seed, k))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(McEstimate::from_values(&values))
        }
    }
}

/// `E K` (for `i ≤ 1`) or `E K^{⊗i}`.
pub fn expected_k_functional(s: usize, i: usize, mode: Mode) -> Result<McEstimate, DyckError> {
    let f = if i <= 1 { Functional::K } else { Functional::KTensor(i) };
    expectation(s, f, mode)
}

pub fn stay_above_full_window_expectation(s: usize, mode: Mode) -> Result<McEstimate, DyckError> {
    expectation(s, Functional::StayAbove, mode)
}

/// `Σ_{k=0}^{I−1} B(3k/2 + 1/2, 3(I−1−k)/2 + 1/2)`.
pub fn beta_sum(i: usize) -> f64 {
    (0..i)
        .map(|k| beta(1.5 * k as f64 + 0.5, 1.5 * (i - 1 - k) as f64 + 0.5))
        .sum()
}

/// Number of Dyck paths of length `2s` with maximum level at most `h`, for
/// `h = 0..=s`.
pub fn max_level_at_most_counts(s: usize) -> Option<Vec<u128>> {
    let mut out = Vec::with_capacity(s + 1);
    for h in 0..=s {
        let mut ways = vec![0u128; h + 1];
        ways[0] = 1;
        for _ in 0..2 * s {
            let mut next = vec![0u128; h + 1];
            for lvl in 0..=h {
                if ways[lvl] == 0 {
                    continue;
                }
                if lvl < h {
                    next[lvl + 1] = next[lvl + 1].checked_add(ways[lvl])?;
                }
                if lvl > 0 {
                    next[lvl - 1] = next[lvl - 1].checked_add(ways[lvl])?;
                }
            }
            ways = next;
        }
        out.push(ways[0]);
    }
    Some(out)
}

/// Exact `P(max x = k)` for `k = 0..=s` (exact counts, for `s ≤ 60`).
pub fn max_level_distribution(s: usize) -> Result<Vec<f64>, DyckError> {
    let counts = max_level_at_most_counts(s).ok_or(DyckError::Overflow)?;
    let total = counts[s] as f64;
    Ok((0..=s)
        .map(|k| {
            let below = if k == 0 { 0 } else { counts[k - 1] };
            (counts[k] - below) as f64 / total
        })
        .collect())
}

/// Empirical `P(max x = k)` for `k = 0..=s` from `trials` uniform samples.
pub fn max_level_tail(s: usize, trials: usize, seed: u64) -> Vec<(usize, f64)> {
    let mut hist = vec![0usize; s + 1];
    for k in 0..trials as u64 {
        hist[sample_dyck(s, crate::trial_seed(seed, k)).max_level() as usize] += 1;
    }
    hist.into_iter()
        .enumerate()
        .map(|(k, c)| (k, c as f64 / trials.max(1) as f64))
        .collect()
}

/// Least-squares fit of `ln P(max = k) ≈ ln C1 − C2·k²/s` over the tail `k ≥ mode`
/// with positive mass. Returns `(C1, C2)`.
pub fn fit_max_level_tail(table: &[(usize, f64)], s: usize) -> Option<(f64, f64)> {
    let mode = table.iter().max_by(|a, b| a.1.total_cmp(&b.1))?.0;
    let pts: Vec<(f64, f64)> = table
        .iter()
        .filter(|(k, p)| *k >= mode && *p > 0.0)
        .map(|(k, p)| ((*k * *k) as f64 / s as f64, libm::log(*p)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((libm::exp(my - slope * mx), -slope))
}

/// Splits `x` at the window starting at `t1`: the excursion
/// `y(t) = x(t1 + t) − x(t1)` on `[0, r₁]` and the remainder `z` with the
/// window cut out.
pub fn split_at_window(x: &DyckPath, t1: usize) -> Result<(DyckPath, DyckPath), DyckError> {
    let r = descent_window(x, t1)?;
    let y = DyckPath::new(x.steps[t1..t1 + r].to_vec())?;
    let mut z = x.steps[..t1].to_vec();
    z.extend_from_slice(&x.steps[t1 + r..]);
    Ok((y, DyckPath::new(z)?))
}

/// Exact `Σ_x K(x)` over Dyck paths of length `2s`, `s = 0..=12`.
pub const K_SUM_FIXTURE: [u128; 13] =
    [0, 2, 12, 58, 260, 1124, 4760, 19898, 82452, 339532, 1391720, 5684452, 23153832];

/// Exact `Σ_x Σ_{t1≤s} 1{x ≥ x(t1) on [t1, t1+s]}` over paths of length `2s`, `s = 0..=10`.
pub const STAY_ABOVE_SUM_FIXTURE: [u128; 11] = [1, 1, 4, 9, 36, 100, 400, 1225, 4900, 15876, 63504];

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn p(text: &str) -> DyckPath {
        DyckPath::parse(text).unwrap()
    }

    #[test]
    fn validation() {
        assert!(DyckPath::new(vec![-1, 1]).is_err());
        assert!(DyckPath::new(vec![1, 1]).is_err());
        assert!(DyckPath::new(vec![1, 2]).is_err());
        assert_eq!(p("++--").levels(), vec![0, 1, 2, 1, 0]);
        assert_eq!(p("UD").to_string(), "+-");
    }

    #[test]
    fn catalan_values() {
        let small: Vec<u64> = (0..=8).map(|s| catalan(s).try_into().unwrap()).collect();
        assert_eq!(small, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430]);
        assert_eq!(catalan_u128(20), Some(6_564_120_420));
        assert_eq!(BigUint::from(catalan_u128(60).unwrap()), catalan(60));
    }

    #[test]
    fn enumeration_order_and_counts() {
        let all: Vec<DyckPath> = enumerate_dyck(3).unwrap().collect();
        let names: Vec<_> = all.iter().map(|x| x.to_string()).collect();
        assert_eq!(names, vec!["+++---", "++-+--", "++--+-", "+-++--", "+-+-+-"]);
        for s in 0..=10 {
            let count = enumerate_dyck(s).unwrap().count() as u64;
            assert_eq!(BigUint::from(count), catalan(s));
        }
        assert!(enumerate_dyck(15).is_err());
    }

    #[test]
    fn windows() {
        let x = p("++--");
        assert_eq!(descent_window(&x, 1).unwrap(), 2);
        assert_eq!(descent_window(&x, 0).unwrap(), 4);
        assert_eq!(descent_window(&x, 4).unwrap(), 0);
        assert!(descent_window(&x, 5).is_err());
        assert_eq!(descent_windows(&x), vec![4, 2, 0, 0, 0]);
        let y = p("+-");
        assert_eq!(descent_windows(&y), vec![2, 0, 0]);
        assert_eq!(k_functional(&y), 2);
    }

    #[test]
    fn k_routes_agree() {
        for s in 0..=8 {
            for x in enumerate_dyck(s).unwrap() {
                let windows = descent_windows(&x);
                for (t, &r) in windows.iter().enumerate() {
                    assert_eq!(descent_window(&x, t).unwrap(), r);
                }
                assert_eq!(k_functional(&x), k_functional_double_sum(&x));
                assert!(k_functional(&x) >= 2 * s as u64);
            }
        }
    }

    #[test]
    fn tensor_routes_agree() {
        for s in 1..=5 {
            for x in enumerate_dyck(s).unwrap() {
                let k = k_functional(&x) as u128;
                assert_eq!(k_functional_tensor(&x, 1).unwrap(), k - 2 * s as u128);
                for i in 0..=3 {
                    assert_eq!(k_functional_tensor(&x, i).unwrap(), k_functional_tensor_brute(&x, i));
                }
                assert_eq!(k_functional_tensor(&x, 2 * s + 1).unwrap(), 0);
            }
        }
    }

    #[test]
    fn sampler_is_valid_and_deterministic() {
        assert_eq!(sample_dyck(1, 7), p("+-"));
        for seed in 0..200 {
            let x = sample_dyck(9, seed);
            assert_eq!(x.len(), 18);
            assert!(DyckPath::new(x.steps().to_vec()).is_ok());
        }
        assert_eq!(sample_dyck(30, 5), sample_dyck(30, 5));
        assert_eq!(sample_dyck(0, 5).len(), 0);
    }

    #[test]
    fn exact_fixtures() {
        for (s, &total) in K_SUM_FIXTURE.iter().enumerate() {
            let sum = exact_sum(s, Functional::K).unwrap();
            assert_eq!(sum.total, total, "s = {s}");
        }
        for (s, &total) in STAY_ABOVE_SUM_FIXTURE.iter().enumerate() {
            assert_eq!(exact_sum(s, Functional::StayAbove).unwrap().total, total, "s = {s}");
        }
        assert_eq!(stay_above_full_window_expectation(1, Mode::Exact).unwrap().mean, 1.0);
        assert_eq!(expected_k_functional(1, 1, Mode::Exact).unwrap().mean, 2.0);
        assert!(exact_sum(13, Functional::K).is_err());
    }

    #[test]
    fn beta_sums() {
        assert!((beta_sum(1) - core::f64::consts::PI).abs() < 1e-12);
        assert!((beta_sum(2) - 8.0 / 3.0).abs() < 1e-12);
        let values: Vec<f64> = (1..=100).map(beta_sum).collect();
        assert!(values.iter().all(|v| v.is_finite() && *v > 0.0));
        let max = values.iter().copied().fold(0.0, f64::max);
        assert_eq!(max, values[0]);
    }

    #[test]
    fn max_level() {
        assert_eq!(max_level_distribution(1).unwrap(), vec![0.0, 1.0]);
        assert_eq!(max_level_distribution(2).unwrap(), vec![0.0, 0.5, 0.5]);
        for s in 1..=8 {
            let dist = max_level_distribution(s).unwrap();
            for (k, pk) in dist.iter().enumerate() {
                let count = enumerate_dyck(s).unwrap().filter(|x| x.max_level() as usize == k).count();
                assert!((pk - count as f64 / enumerate_dyck(s).unwrap().count() as f64).abs() < 1e-15);
            }
        }
        let table = max_level_tail(1, 10, 3);
        assert_eq!(table, vec![(0, 0.0), (1, 1.0)]);
    }

    #[test]
    fn split_identity() {
        for s in 0..=6 {
            for x in enumerate_dyck(s).unwrap() {
                for t1 in 0..=x.len() {
                    let (y, z) = split_at_window(&x, t1).unwrap();
                    let r = descent_window(&x, t1).unwrap();
                    assert_eq!(y.len(), r);
                    assert_eq!(z.len(), x.len() - r);
                }
            }
        }
    }

    #[test]
    fn catalan_convolution() {
        assert_eq!(check_catalan_convolution(300, 2), Ok(()));
        assert_eq!(check_catalan_convolution_direct(300, 2), Ok(()));
        assert_eq!(check_catalan_convolution_direct(10, 1), Err(5));
        assert_eq!(check_catalan_convolution(10, 1), Err(5));
    }
}
