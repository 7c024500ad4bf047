//! Matrix-free Lanczos eigensolver for Hermitian operators.
//!
//! Finds the lowest few eigenpairs with full reorthogonalization and restarts,
//! deflating converged pairs. Used for the Schrödinger eigenmodes of −Δ + V,
//! the self-consistent mean-field operator, and sector ground states of the
//! truncated Fock Hamiltonian.

use thiserror::Error;

use crate::linalg::{self, tql2};
use crate::rng::CounterRng;
use crate::C64;

#[derive(Debug, Clone)]
pub struct LanczosOpts {
    pub max_krylov: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for LanczosOpts {
    fn default() -> Self {
        Self { max_krylov: 140, max_restarts: 150, tol: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector in the plain ℓ² norm.
    pub vector: Vec<C64>,
    /// ‖A q − λ q‖ (plain ℓ²).
    pub residual: f64,
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("Lanczos failed to converge: residual {residual} after {restarts} restarts")]
    NoConvergence { residual: f64, restarts: usize },
    #[error("tridiagonal solve failed: {0}")]
    Tridiagonal(&'static str),
    #[error("operator dimension {0} too small for requested pairs")]
    TooSmall(usize),
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = linalg::norm(v, 1.0);
    if n > 0.0 {
        linalg::scale(v, 1.0 / n);
    }
    n
}

fn orthogonalize(w: &mut [C64], basis: &[Vec<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = linalg::inner(q, w, 1.0);
            linalg::axpy(w, -c, q);
        }
    }
}

/// Lowest `count` eigenpairs of the Hermitian operator given by `apply`.
pub fn lanczos_lowest<F>(
    apply: F,
    dim: usize,
    count: usize,
    opts: &LanczosOpts,
    rng: &mut CounterRng,
) -> Result<Vec<EigenPair>, EigenError>
where
    F: Fn(&[C64], &mut [C64]),
{
    if dim < count {
        return Err(EigenError::TooSmall(dim));
    }
    let mut locked: Vec<EigenPair> = Vec::new();
    let mut start: Vec<C64> = rng.complex_vector(dim);

    while locked.len() < count {
        let locked_vecs: Vec<Vec<C64>> = locked.iter().map(|p| p.vector.clone()).collect();
        let mut restarts = 0;
        loop {
            orthogonalize(&mut start, &locked_vecs);
            if normalize(&mut start) < 1e-12 {
                start = rng.complex_vector(dim);
                orthogonalize(&mut start, &locked_vecs);
                normalize(&mut start);
            }
            let m = opts.max_krylov.min(dim - locked.len());
            let mut basis: Vec<Vec<C64>> = vec![start.clone()];
            let mut alphas: Vec<f64> = Vec::with_capacity(m);
            let mut betas: Vec<f64> = Vec::with_capacity(m);
            let mut w = vec![C64::new(0.0, 0.0); dim];
            for j in 0..m {
                apply(&basis[j], &mut w);
                let alpha = linalg::inner(&basis[j], &w, 1.0).re;
                alphas.push(alpha);
                {
                    let (vj, vjm1) = if j > 0 {
                        let (a, b) = basis.split_at(j);
                        (&b[0], Some(&a[j - 1]))
                    } else {
                        (&basis[0], None)
                    };
                    linalg::axpy(&mut w, C64::new(-alpha, 0.0), vj);
                    if let Some(prev) = vjm1 {
                        linalg::axpy(&mut w, C64::new(-betas[j - 1], 0.0), prev);
                    }
                }
                orthogonalize(&mut w, &basis);
                orthogonalize(&mut w, &locked_vecs);
                let beta = linalg::norm(&w, 1.0);
                if beta < 1e-13 || j + 1 == m {
                    betas.push(beta);
                    break;
                }
                betas.push(beta);
                let mut v_next = w.clone();
                linalg::scale(&mut v_next, 1.0 / beta);
                basis.push(v_next);
            }
            let mm = basis.len();
            let mut d = alphas[..mm].to_vec();
            let mut e: Vec<f64> = (0..mm)
                .map(|i| if i + 1 < mm { betas[i] } else { 0.0 })
                .collect();
            let mut z = vec![0.0; mm * mm];
            for i in 0..mm {
                z[i * mm + i] = 1.0;
            }
            tql2(&mut d, &mut e, &mut z, mm).map_err(EigenError::Tridiagonal)?;
            // Ritz vector for the lowest Ritz value
            let mut q = vec![C64::new(0.0, 0.0); dim];
            for (i, b) in basis.iter().enumerate() {
                linalg::axpy(&mut q, C64::new(z[i * mm], 0.0), b);
            }
            normalize(&mut q);
            apply(&q, &mut w);
            let lambda = linalg::inner(&q, &w, 1.0).re;
            linalg::axpy(&mut w, C64::new(-lambda, 0.0), &q);
            let residual = linalg::norm(&w, 1.0);
            // the achievable residual floor scales with the spectral radius
            let spread = d.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let floor = 64.0 * f64::EPSILON * spread.max(1.0);
            if residual <= (opts.tol * (1.0 + lambda.abs())).max(floor)
                || mm >= dim - locked.len()
            {
                locked.push(EigenPair { value: lambda, vector: q, residual });
                start = rng.complex_vector(dim);
                break;
            }
            restarts += 1;
            if restarts > opts.max_restarts {
                return Err(EigenError::NoConvergence { residual, restarts });
            }
            start = q;
        }
    }
    locked.sort_by(|a, b| a.value.partial_cmp(&b.value).unwrap());
    Ok(locked)
}
