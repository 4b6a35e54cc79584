//! Extremal eigenvalues of positive semidefinite Hermitian operators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Smallest and largest eigenvalue from a dense Hermitian eigensolve.
pub fn dense_extremes(s: &DMatrix<Complex64>) -> (f64, f64) {
    let ev = s.clone().symmetric_eigenvalues();
    let lo = ev.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOutcome {
    pub min: f64,
    pub max: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Lanczos with full reorthogonalization for the extreme eigenvalues of the
/// `n × n` Hermitian operator `apply`.
///
/// The start vector is fixed, so results are deterministic. On breakdown the
/// iteration restarts from a fixed vector orthogonal to the current Krylov
/// basis, so eigenvalues outside an invariant subspace are still found.
/// Stops once both extreme Ritz values move by less than `rel_tol` relative to
/// the largest one for two consecutive steps, or after `max_iter` steps.
pub fn lanczos_extremes(
    n: usize,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
    rel_tol: f64,
    max_iter: usize,
) -> LanczosOutcome {
    let m_max = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m_max);
    let mut alpha: Vec<f64> = Vec::with_capacity(m_max);
    let mut beta: Vec<f64> = Vec::with_capacity(m_max);
    let mut seed = 0usize;
    let mut q = match fresh_vector(n, &basis, &mut seed) {
        Some(v) => v,
        None => {
            return LanczosOutcome {
                min: 0.0,
                max: 0.0,
                iterations: 0,
                converged: true,
            }
        }
    };
    let mut prev = (f64::NAN, f64::NAN);
    let mut stable = 0;
    let mut result = (0.0, 0.0);
    let mut converged = false;
    for _ in 0..m_max {
        let mut w = apply(&q);
        let a: f64 = dot(&q, &w).re;
        basis.push(q.clone());
        alpha.push(a);
        // full reorthogonalization, twice for stability
        for _ in 0..2 {
            for v in &basis {
                let c = dot(v, &w);
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * vi;
                }
            }
        }
        let b = norm(&w);
        result = tridiagonal_extremes(&alpha, &beta);
        let scale = result.1.abs().max(f64::MIN_POSITIVE);
        if (result.0 - prev.0).abs() <= rel_tol * scale && (result.1 - prev.1).abs() <= rel_tol * scale {
            stable += 1;
        } else {
            stable = 0;
        }
        prev = result;
        if basis.len() == n {
            converged = true;
            break;
        }
        if stable >= 2 && basis.len() >= 3 {
            converged = true;
            break;
        }
        if b <= 1e-12 * scale.max(a.abs()) {
            match fresh_vector(n, &basis, &mut seed) {
                Some(v) => {
                    q = v;
                    beta.push(0.0);
                }
                None => {
                    converged = true;
                    break;
                }
            }
        } else {
            q = w.iter().map(|v| v / b).collect();
            beta.push(b);
        }
    }
    LanczosOutcome {
        min: result.0,
        max: result.1,
        iterations: alpha.len(),
        converged,
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Deterministic pseudo-random unit vector orthogonal to `basis`.
fn fresh_vector(n: usize, basis: &[Vec<Complex64>], seed: &mut usize) -> Option<Vec<Complex64>> {
    for _ in 0..8 {
        *seed += 1;
        let s = *seed as f64;
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                let t = i as f64 + 1.0;
                Complex64::new((t * 0.754_877_666 * s).sin() + 1.1, (t * 0.569_840_29 * s).cos())
            })
            .collect();
        for _ in 0..2 {
            for b in basis {
                let c = dot(b, &v);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= c * bi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 * (n as f64).sqrt() {
            return Some(v.iter().map(|x| x / nv).collect());
        }
    }
    None
}

fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let ev: DVector<f64> = SymmetricEigen::new(t).eigenvalues;
    (
        ev.iter().copied().fold(f64::INFINITY, f64::min),
        ev.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}
