//! Lanczos-based action of `exp(-i H t)` on a vector with adaptive substeps.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::algebra::{inner, norm};
use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct KrylovOptions {
    /// Largest Krylov subspace dimension per substep.
    pub max_dim: usize,
    /// Accepted local error estimate per substep.
    pub tolerance: f64,
    /// Consecutive step halvings before giving up.
    pub max_halvings: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_dim: 30,
            tolerance: 1e-10,
            max_halvings: 50,
        }
    }
}

struct LanczosBasis {
    vectors: Vec<Vec<C64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last vector; zero on breakdown.
    residual: f64,
}

fn lanczos<F>(apply: &mut F, start: &[C64], max_dim: usize, scale: f64) -> LanczosBasis
where
    F: FnMut(&[C64], &mut [C64]),
{
    let n0 = norm(start);
    let mut vectors = vec![start.iter().map(|a| a / n0).collect::<Vec<_>>()];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); start.len()];
    let dim = max_dim.min(start.len());
    loop {
        let j = vectors.len() - 1;
        apply(&vectors[j], &mut w);
        let a = inner(&vectors[j], &w).re;
        alpha.push(a);
        // two passes of full reorthogonalization
        for _ in 0..2 {
            for v in &vectors {
                let c = inner(v, &w);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = norm(&w);
        if b <= 1e-13 * scale.max(1.0) {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                residual: 0.0,
            };
        }
        if vectors.len() == dim {
            return LanczosBasis {
                vectors,
                alpha,
                beta,
                residual: b,
            };
        }
        beta.push(b);
        vectors.push(w.iter().map(|x| x / b).collect());
    }
}

/// Coefficients `exp(-i T t) e_1` in the Lanczos basis.
fn small_propagate(alpha: &[f64], beta: &[f64], t: f64) -> Vec<C64> {
    let k = alpha.len();
    let mut tri = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        tri[(i, i)] = alpha[i];
        if i + 1 < k {
            tri[(i, i + 1)] = beta[i];
            tri[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(tri);
    (0..k)
        .map(|row| {
            (0..k)
                .map(|m| {
                    let q = eig.eigenvectors[(row, m)] * eig.eigenvectors[(0, m)];
                    C64::from_polar(q, -eig.eigenvalues[m] * t)
                })
                .sum()
        })
        .collect()
}

/// `exp(-i H t) v` where `apply(x, out)` writes `H x` into `out`.
/// `scale` is a bound on `|H|` used to pick the first substep.
pub fn expm_krylov<F>(
    mut apply: F,
    v: &[C64],
    t: f64,
    scale: f64,
    options: &KrylovOptions,
) -> Result<Vec<C64>>
where
    F: FnMut(&[C64], &mut [C64]),
{
    let mut state = v.to_vec();
    let total = t.abs();
    let direction = t.signum();
    if total == 0.0 || norm(&state) == 0.0 {
        return Ok(state);
    }
    let mut elapsed = 0.0;
    let mut step = total.min(options.max_dim as f64 / (2.0 * scale.max(1e-12)));
    let mut halvings = 0;
    while elapsed < total {
        step = step.min(total - elapsed);
        let amp = norm(&state);
        let basis = lanczos(&mut apply, &state, options.max_dim, scale);
        let coeffs = small_propagate(&basis.alpha, &basis.beta, direction * step);
        let estimate = basis.residual * coeffs.last().map_or(0.0, |c| c.norm());
        if estimate > options.tolerance {
            halvings += 1;
            if halvings > options.max_halvings {
                return Err(Error::Convergence {
                    time: direction * elapsed,
                    step,
                    estimate,
                    halvings,
                });
            }
            step /= 2.0;
            continue;
        }
        halvings = 0;
        let mut next = vec![C64::new(0.0, 0.0); state.len()];
        for (c, vec) in coeffs.iter().zip(&basis.vectors) {
            let c = c * amp;
            next.iter_mut().zip(vec).for_each(|(x, y)| *x += c * y);
        }
        state = next;
        elapsed += step;
        if estimate < options.tolerance / 100.0 {
            step *= 1.5;
        }
    }
    Ok(state)
}
