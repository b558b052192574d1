//! Log-space combinatorics shared by the bound calculators.

use libm::{exp, lgamma, log};

/// `ln Γ(x)` for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    lgamma(x)
}

/// `ln n!`
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else if n <= 32 {
        (2..=n).map(|k| log(k as f64)).sum()
    } else {
        lgamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)`, `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln n!/m!` for `m <= n`, i.e. the log of the falling factorial of length `n - m`.
pub fn ln_falling(n: u64, m: u64) -> f64 {
    if m > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(m)
}

/// `ln T_{0,2s}` where `T_{0,2s} = (2s)!/(s!(s+1)!)` is the Catalan number.
pub fn ln_catalan(s: u64) -> f64 {
    ln_factorial(2 * s) - ln_factorial(s) - ln_factorial(s + 1)
}

/// Numerically stable `ln Σ exp(x_i)`; `-inf` on an empty input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let v: alloc::vec::Vec<f64> = terms.into_iter().filter(|x| *x > f64::NEG_INFINITY).collect();
    let Some(m) = v.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    if m == f64::INFINITY {
        return m;
    }
    m + log(v.iter().map(|x| exp(x - m)).sum::<f64>())
}

/// `B(a, b) = Γ(a)Γ(b)/Γ(a+b)`, evaluated through `ln Γ`.
pub fn beta(a: f64, b: f64) -> f64 {
    exp(lgamma(a) + lgamma(b) - lgamma(a + b))
}
