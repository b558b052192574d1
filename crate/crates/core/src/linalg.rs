//! Dense symmetric eigensolvers.
//!
//! Two routes, both built on a tridiagonal reduction:
//!
//! * [`symmetric_eigenvalues`] computes the whole spectrum with Householder
//!   reflections followed by implicit QL with Wilkinson shifts. It costs about
//!   `2n³` flops and is used for small matrices and spectrum histograms.
//! * [`lanczos_extremes`] runs Lanczos with full reorthogonalization and stops
//!   once the Ritz residual of the requested extreme eigenvalues drops below
//!   `tolerance · max|θ|`. Each step is one matrix-vector product, so it is the
//!   route used for λ_max of large matrices.
//!
//! Matrices are row-major `n × n` slices and must be symmetric.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default relative tolerance for both solvers.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EigenError {
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Dot product with four independent accumulators so the loop vectorizes.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ca, ra) = a.split_at(a.len() - a.len() % 4);
    let (cb, rb) = b.split_at(ca.len());
    for (x, y) in ca.chunks_exact(4).zip(cb.chunks_exact(4)) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = A x` for a row-major `n × n` matrix.
pub fn matvec(a: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for (i, yi) in y.iter_mut().enumerate().take(n) {
        *yi = dot(&a[i * n..(i + 1) * n], x);
    }
}

/// Dense product of two row-major `n × n` matrices.
pub fn matmul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        let row = &mut c[i * n..(i + 1) * n];
        for k in 0..n {
            let aik = a[i * n + k];
            if aik != 0.0 {
                axpy(aik, &b[k * n..(k + 1) * n], row);
            }
        }
    }
    c
}

/// Householder reduction of a symmetric matrix to tridiagonal form.
///
/// Returns `(diagonal, off_diagonal)` with `off_diagonal[i]` coupling rows
/// `i` and `i + 1`; the last off-diagonal slot is zero.
pub fn tridiagonalize(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        // column k below the diagonal (equal to row k by symmetry)
        let x = &a[k * n + k + 1..(k + 1) * n];
        let norm = libm::sqrt(dot(x, x));
        diag[k] = a[k * n + k];
        if norm == 0.0 {
            off[k] = 0.0;
            continue;
        }
        let alpha = if x[0] > 0.0 { -norm } else { norm };
        off[k] = alpha;
        let v = &mut v[..m];
        v.copy_from_slice(x);
        v[0] -= alpha;
        let vnorm = libm::sqrt(dot(v, v));
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= vnorm;
        }
        // p = B v on the trailing block B, then w = p - (vᵀp) v
        let w = &mut w[..m];
        let base = k + 1;
        for i in 0..m {
            let row = &a[(base + i) * n + base..(base + i + 1) * n];
            w[i] = dot(row, v);
        }
        let kappa = dot(v, w);
        axpy(-kappa, v, w);
        // B ← B − 2 v wᵀ − 2 w vᵀ
        for i in 0..m {
            let (vi, wi) = (2.0 * v[i], 2.0 * w[i]);
            let row = &mut a[(base + i) * n + base..(base + i + 1) * n];
            for j in 0..m {
                row[j] -= vi * w[j] + wi * v[j];
            }
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 2) * n + n - 1];
    }
    diag[n - 1] = a[n * n - 1];
    (diag, off)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with shifts,
/// sorted ascending. `off` follows the layout of [`tridiagonalize`].
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>, EigenError> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.resize(n, 0.0);
    if n > 0 {
        e[n - 1] = 0.0;
    }
    const MAX_SWEEPS: usize = 60;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(EigenError::NoConvergence {
                    iterations: sweeps,
                    residual: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Result<Vec<f64>, EigenError> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let (d, e) = tridiagonalize(a, n);
    tridiagonal_eigenvalues(&d, &e)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { coupling / q };
        if q == 0.0 {
            q = -f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `index`-th smallest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_kth(diag: &[f64], off: &[f64], index: usize) -> f64 {
    let m = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < m { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Last component of the unit eigenvector of the tridiagonal matrix for the
/// eigenvalue `theta`, by two steps of inverse iteration.
fn ritz_last_component(diag: &[f64], off: &[f64], theta: f64) -> f64 {
    let m = diag.len();
    if m == 1 {
        return 1.0;
    }
    let scale = diag.iter().chain(off.iter()).fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
    let tiny = f64::EPSILON * scale;
    let mut y = vec![1.0; m];
    let mut c = vec![0.0; m];
    let mut dd = vec![0.0; m];
    for _ in 0..3 {
        // Thomas algorithm on (T - θI) y_new = y
        let mut denom = diag[0] - theta;
        if denom.abs() < tiny {
            denom = tiny;
        }
        dd[0] = y[0] / denom;
        c[0] = off[0] / denom;
        for i in 1..m {
            let sub = off[i - 1];
            let mut den = diag[i] - theta - sub * c[i - 1];
            if den.abs() < tiny {
                den = tiny;
            }
            c[i] = if i + 1 < m { off[i] / den } else { 0.0 };
            dd[i] = (y[i] - sub * dd[i - 1]) / den;
        }
        y[m - 1] = dd[m - 1];
        for i in (0..m - 1).rev() {
            y[i] = dd[i] - c[i] * y[i + 1];
        }
        let norm = libm::sqrt(dot(&y, &y));
        if !(norm.is_finite() && norm > 0.0) {
            return 1.0;
        }
        for v in y.iter_mut() {
            *v /= norm;
        }
    }
    y[m - 1]
}

/// Extreme eigenvalues from a Lanczos run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremes {
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    /// Largest Ritz residual among the requested extremes at exit.
    pub residual: f64,
}

/// Which end of the spectrum must reach the tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Largest,
    Both,
}

/// Lanczos with full reorthogonalization for the extreme eigenvalues of a
/// symmetric matrix. The start vector is a fixed pseudo-random unit vector so
/// the result is deterministic.
pub fn lanczos_extremes(a: &[f64], n: usize, which: Which, tolerance: f64) -> Result<Extremes, EigenError> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    if n == 1 {
        return Ok(Extremes { min: a[0], max: a[0], iterations: 1, residual: 0.0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_6e63_7a6f_7301);
    let mut q: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
    let norm = libm::sqrt(dot(&q, &q));
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last = Extremes { min: 0.0, max: 0.0, iterations: 0, residual: f64::INFINITY };
    for k in 0..n {
        matvec(a, n, &q, &mut w);
        let ak = dot(&q, &w);
        axpy(-ak, &q, &mut w);
        if let (Some(prev), Some(bk)) = (basis.last(), beta.last()) {
            axpy(-bk, prev, &mut w);
        }
        basis.push(core::mem::take(&mut q));
        alpha.push(ak);
        for _ in 0..2 {
            for qj in &basis {
                let h = dot(qj, &w);
                axpy(-h, qj, &mut w);
            }
        }
        let bk = libm::sqrt(dot(&w, &w));

        let m = alpha.len();
        let theta_max = tridiagonal_kth(&alpha, &beta, m - 1);
        let theta_min = tridiagonal_kth(&alpha, &beta, 0);
        let scale = theta_max.abs().max(theta_min.abs()).max(f64::MIN_POSITIVE);
        let mut off = beta.clone();
        off.push(0.0);
        let res_max = bk * ritz_last_component(&alpha, &off, theta_max).abs();
        let residual = match which {
            Which::Largest => res_max,
            Which::Both => res_max.max(bk * ritz_last_component(&alpha, &off, theta_min).abs()),
        };
        last = Extremes { min: theta_min, max: theta_max, iterations: k + 1, residual };
        let invariant = bk <= f64::EPSILON * scale * (n as f64);
        // a full Krylov space is exact up to rounding
        if residual <= tolerance * scale || invariant || k + 1 == n {
            return Ok(last);
        }
        beta.push(bk);
        q = w.iter().map(|x| x / bk).collect();
    }
    Err(EigenError::NoConvergence { iterations: last.iterations, residual: last.residual })
}

/// Trace of `A^p` by binary powering.
pub fn trace_of_power(a: &[f64], n: usize, p: u32) -> f64 {
    let mut result: Option<Vec<f64>> = None;
    let mut base = a.to_vec();
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => matmul(&r, &base, n),
            });
        }
        e >>= 1;
        if e > 0 {
            base = matmul(&base, &base, n);
        }
    }
    match result {
        None => n as f64,
        Some(r) => (0..n).map(|i| r[i * n + i]).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let x = rng.gen::<f64>() * 2.0 - 1.0;
                a[i * n + j] = x;
                a[j * n + i] = x;
            }
        }
        a
    }

    #[test]
    fn small_known_spectra() {
        assert_eq!(symmetric_eigenvalues(&[3.5], 1).unwrap(), vec![3.5]);
        let ev = symmetric_eigenvalues(&[0.0, 1.0, 1.0, 0.0], 2).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        // path graph on 3 vertices: eigenvalues -√2, 0, √2
        let ev = symmetric_eigenvalues(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0], 3).unwrap();
        let r2 = libm::sqrt(2.0);
        assert!((ev[0] + r2).abs() < 1e-13 && ev[1].abs() < 1e-13 && (ev[2] - r2).abs() < 1e-13);
    }

    #[test]
    fn spectrum_preserves_trace_and_frobenius_norm() {
        for n in [2, 5, 17, 40] {
            let a = random_symmetric(n, n as u64);
            let ev = symmetric_eigenvalues(&a, n).unwrap();
            let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
            let fro: f64 = a.iter().map(|x| x * x).sum();
            assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10);
            assert!((ev.iter().map(|x| x * x).sum::<f64>() - fro).abs() < 1e-9 * fro);
        }
    }

    #[test]
    fn lanczos_matches_dense_solver() {
        for (n, seed) in [(2, 1), (10, 2), (60, 3), (150, 4)] {
            let a = random_symmetric(n, seed);
            let ev = symmetric_eigenvalues(&a, n).unwrap();
            let ex = lanczos_extremes(&a, n, Which::Both, DEFAULT_TOLERANCE).unwrap();
            let top = ev[n - 1];
            let bottom = ev[0];
            assert!((ex.max - top).abs() <= 1e-9 * top.abs().max(1.0), "{n}: {} vs {top}", ex.max);
            assert!((ex.min - bottom).abs() <= 1e-9 * bottom.abs().max(1.0));
        }
    }

    #[test]
    fn diagonal_matrix_is_an_invariant_subspace_case() {
        let n = 4;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = i as f64;
        }
        let ex = lanczos_extremes(&a, n, Which::Both, DEFAULT_TOLERANCE).unwrap();
        assert!((ex.max - 3.0).abs() < 1e-12 && ex.min.abs() < 1e-12);
    }

    #[test]
    fn power_trace_small_cases() {
        assert_eq!(trace_of_power(&[1.0, 0.0, 0.0, 1.0], 2, 6), 2.0);
        assert_eq!(trace_of_power(&[0.0, 1.0, 1.0, 0.0], 2, 4), 2.0);
        assert_eq!(trace_of_power(&[2.0], 1, 0), 1.0);
        assert_eq!(trace_of_power(&[2.0], 1, 3), 8.0);
    }

    #[test]
    fn rejects_non_finite_input() {
        assert_eq!(symmetric_eigenvalues(&[f64::NAN], 1), Err(EigenError::NonFinite));
    }
}
