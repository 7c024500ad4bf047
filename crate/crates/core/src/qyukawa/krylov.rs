//! Lanczos matrix-exponential propagation for Hermitian operators.
//!
//! Computes e^{-iθA} v with adaptive substepping: each substep builds a
//! short Krylov basis, exponentiates the real symmetric tridiagonal
//! projection, and halves the substep when the a-posteriori error indicator
//! exceeds tolerance.

use thiserror::Error;

use crate::linalg::{self, tql2};
use crate::C64;

#[derive(Debug, Error)]
pub enum KrylovError {
    #[error("propagation failed to reach tolerance even with substep {substep}")]
    SubstepUnderflow { substep: f64 },
    #[error("tridiagonal solve failed: {0}")]
    Tridiagonal(&'static str),
}

#[derive(Debug, Clone)]
pub struct KrylovOpts {
    pub max_dim: usize,
    pub tol: f64,
}

impl Default for KrylovOpts {
    fn default() -> Self {
        Self { max_dim: 36, tol: 1e-12 }
    }
}

/// e^{-iθA} v for Hermitian A given through `apply`.
pub fn expm_apply<F>(
    apply: &F,
    dim: usize,
    v: &[C64],
    theta: f64,
    opts: &KrylovOpts,
) -> Result<Vec<C64>, KrylovError>
where
    F: Fn(&[C64], &mut [C64]),
{
    let norm0 = linalg::norm(v, 1.0);
    if norm0 == 0.0 || theta == 0.0 {
        return Ok(v.to_vec());
    }
    let mut state = v.to_vec();
    let mut remaining = theta;
    let mut substep = theta;
    let mut guard = 0;
    while remaining != 0.0 {
        guard += 1;
        if guard > 100_000 {
            return Err(KrylovError::SubstepUnderflow { substep });
        }
        let step = if remaining.abs() <= substep.abs() {
            remaining
        } else {
            substep
        };
        match krylov_substep(apply, dim, &state, step, opts)? {
            Some(next) => {
                state = next;
                remaining -= step;
            }
            None => {
                substep *= 0.5;
                if substep.abs() < 1e-14 * theta.abs().max(1.0) {
                    return Err(KrylovError::SubstepUnderflow { substep });
                }
            }
        }
    }
    Ok(state)
}

/// One Lanczos substep; returns None when the error indicator rejects the
/// step size.
fn krylov_substep<F>(
    apply: &F,
    dim: usize,
    v: &[C64],
    theta: f64,
    opts: &KrylovOpts,
) -> Result<Option<Vec<C64>>, KrylovError>
where
    F: Fn(&[C64], &mut [C64]),
{
    let beta0 = linalg::norm(v, 1.0);
    let m_max = opts.max_dim.min(dim);
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    let mut first = v.to_vec();
    linalg::scale(&mut first, 1.0 / beta0);
    basis.push(first);
    let mut alphas: Vec<f64> = Vec::with_capacity(m_max);
    let mut betas: Vec<f64> = Vec::with_capacity(m_max);
    let mut w = vec![C64::new(0.0, 0.0); dim];
    let mut happy = false;
    for j in 0..m_max {
        apply(&basis[j], &mut w);
        let alpha = linalg::inner(&basis[j], &w, 1.0).re;
        alphas.push(alpha);
        {
            let vj = &basis[j];
            linalg::axpy(&mut w, C64::new(-alpha, 0.0), vj);
        }
        if j > 0 {
            let prev = basis[j - 1].clone();
            linalg::axpy(&mut w, C64::new(-betas[j - 1], 0.0), &prev);
        }
        // one reorthogonalization pass keeps the short recurrence honest
        for q in &basis {
            let c = linalg::inner(q, &w, 1.0);
            linalg::axpy(&mut w, -c, q);
        }
        let beta = linalg::norm(&w, 1.0);
        if beta < 1e-14 * beta0.max(1.0) {
            happy = true;
            betas.push(0.0);
            break;
        }
        betas.push(beta);
        if j + 1 < m_max {
            let mut next = w.clone();
            linalg::scale(&mut next, 1.0 / beta);
            basis.push(next);
        }
    }
    let m = basis.len();
    let mut d = alphas[..m].to_vec();
    let mut e: Vec<f64> = (0..m)
        .map(|i| if i + 1 < m { betas[i] } else { 0.0 })
        .collect();
    let mut z = vec![0.0; m * m];
    for i in 0..m {
        z[i * m + i] = 1.0;
    }
    tql2(&mut d, &mut e, &mut z, m).map_err(KrylovError::Tridiagonal)?;
    // y = Z exp(-iθ D) Zᵀ e₁
    let mut small = vec![C64::new(0.0, 0.0); m];
    for col in 0..m {
        let phase = C64::from_polar(1.0, -theta * d[col]);
        let weight = z[col]; // Zᵀ e₁ component = Z[0, col]
        for row in 0..m {
            small[row] += z[row * m + col] * phase * weight;
        }
    }
    // a-posteriori indicator: weight that the exponential pushes onto the
    // last Krylov direction
    if !happy {
        let err = betas[m - 1].abs() * small[m - 1].norm() * theta.abs();
        if err > opts.tol * beta0 {
            return Ok(None);
        }
    }
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (coeff, q) in small.iter().zip(&basis) {
        linalg::axpy(&mut out, beta0 * coeff, q);
    }
    Ok(Some(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_exponential_is_exact_phase() {
        let dim = 50;
        let diag: Vec<f64> = (0..dim).map(|i| 0.3 * i as f64 - 2.0).collect();
        let apply = |x: &[C64], y: &mut [C64]| {
            for i in 0..dim {
                y[i] = diag[i] * x[i];
            }
        };
        let mut rng = crate::rng::CounterRng::new(11);
        let v = rng.complex_vector(dim);
        let theta = 1.7;
        let out = expm_apply(&apply, dim, &v, theta, &KrylovOpts::default()).unwrap();
        for i in 0..dim {
            let expect = v[i] * C64::from_polar(1.0, -theta * diag[i]);
            assert!((out[i] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn unitarity_and_reversibility() {
        // dense random hermitian matrix
        let dim = 40;
        let mut rng = crate::rng::CounterRng::new(13);
        let mut mat = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = rng.next_complex_gaussian();
                let v = if i == j { C64::new(v.re, 0.0) } else { v };
                mat[i * dim + j] = v;
                mat[j * dim + i] = v.conj();
            }
        }
        let apply = |x: &[C64], y: &mut [C64]| {
            for i in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..dim {
                    acc += mat[i * dim + j] * x[j];
                }
                y[i] = acc;
            }
        };
        let v = rng.complex_vector(dim);
        let theta = 3.2;
        let fwd = expm_apply(&apply, dim, &v, theta, &KrylovOpts::default()).unwrap();
        assert!(
            (linalg::norm(&fwd, 1.0) - linalg::norm(&v, 1.0)).abs()
                < 1e-10 * linalg::norm(&v, 1.0)
        );
        let back = expm_apply(&apply, dim, &fwd, -theta, &KrylovOpts::default()).unwrap();
        let mut diff = 0.0f64;
        for (a, b) in back.iter().zip(&v) {
            diff = diff.max((a - b).norm());
        }
        assert!(diff < 1e-9, "round trip error {diff}");
    }
}
