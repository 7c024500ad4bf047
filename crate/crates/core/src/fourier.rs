//! Unitary symmetric spectral transform on the periodic box.
//!
//! Position nodes are x_i = −L + i·Δx with Δx = 2L/N; momentum nodes are
//! k_j = πj/L for j = −N/2, …, N/2−1 with Δk = π/L, stored in monotone order.
//! The forward transform approximates û(k) = (2π)^{-1/2} ∫ e^{-ikx} u(x) dx
//! by
//!
//! ```text
//! û_j = (Δx/√(2π)) Σ_i e^{-i k_j x_i} u_i
//! ```
//!
//! and is realized by a standard FFT with an index shift and alternating-sign
//! phase. With quadrature-weighted norms (Δx in position, Δk in momentum) the
//! map is exactly unitary and the round trip is the identity to roundoff.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};

use crate::model::ModelError;

/// Paired FFT plans plus phase bookkeeping for one grid size.
pub struct Transform {
    n: usize,
    forward_scale: f64,
    inverse_scale: f64,
    /// (−1)^j at natural momentum index p (j = p − N/2).
    sign: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("n", &self.n).finish()
    }
}

impl Transform {
    /// `half_length` is the box half-length L; `n` must be a power of two.
    pub fn new(half_length: f64, n: usize) -> Self {
        assert!(n.is_power_of_two(), "grid size must be a power of two");
        let dx = 2.0 * half_length / n as f64;
        let dk = std::f64::consts::PI / half_length;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let sign: Vec<f64> = (0..n)
            .map(|p| {
                let j = p as i64 - (n / 2) as i64;
                if j.rem_euclid(2) == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        Self {
            n,
            forward_scale: dx / (2.0 * std::f64::consts::PI).sqrt(),
            inverse_scale: dk / (2.0 * std::f64::consts::PI).sqrt(),
            sign,
            fwd,
            inv,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Position samples → momentum samples (natural k order), in place.
    pub fn forward(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.n);
        let mut scratch = vec![C64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(data, &mut scratch);
        // FFT bin b holds frequency j ≡ b (mod N); shift halves to monotone j
        // and apply the e^{+iπj} phase from the x-origin at −L.
        let half = self.n / 2;
        for p in 0..half {
            data.swap(p, p + half);
        }
        for (d, s) in data.iter_mut().zip(&self.sign) {
            *d *= s * self.forward_scale;
        }
    }

    /// Momentum samples (natural k order) → position samples, in place.
    pub fn inverse(&self, data: &mut [C64]) {
        assert_eq!(data.len(), self.n);
        for (d, s) in data.iter_mut().zip(&self.sign) {
            *d *= *s;
        }
        let half = self.n / 2;
        for p in 0..half {
            data.swap(p, p + half);
        }
        let mut scratch = vec![C64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        self.inv.process_with_scratch(data, &mut scratch);
        for d in data.iter_mut() {
            *d *= self.inverse_scale;
        }
    }

    pub fn to_momentum(&self, pos: &[C64]) -> Vec<C64> {
        let mut out = pos.to_vec();
        self.forward(&mut out);
        out
    }

    pub fn to_position(&self, mom: &[C64]) -> Vec<C64> {
        let mut out = mom.to_vec();
        self.inverse(&mut out);
        out
    }

    /// Raw unnormalized FFT in bin order. Together with [`Self::inv_raw`] the
    /// round trip scales by exactly N, so multiplier vectors folded with the
    /// exact power of two 1/N cancel without a systematic scale bias; the
    /// flow's kinetic substeps rely on this for machine-level mass
    /// conservation over long horizons.
    pub fn fwd_raw(&self, data: &mut [C64]) {
        let mut scratch = vec![C64::new(0.0, 0.0); self.fwd.get_inplace_scratch_len()];
        self.fwd.process_with_scratch(data, &mut scratch);
    }

    /// Raw unnormalized inverse FFT in bin order.
    pub fn inv_raw(&self, data: &mut [C64]) {
        let mut scratch = vec![C64::new(0.0, 0.0); self.inv.get_inplace_scratch_len()];
        self.inv.process_with_scratch(data, &mut scratch);
    }

    /// Natural momentum index p (k = (p − N/2)·Δk) for FFT bin b.
    pub fn natural_from_bin(&self, b: usize) -> usize {
        (b + self.n / 2) % self.n
    }
}

/// Direction tag for [`transform`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    ToMomentum,
    ToPosition,
}

/// Checked transform entry point: rejects fields whose length does not match
/// the grid.
pub fn transform(tr: &Transform, field: &[C64], direction: Direction) -> Result<Vec<C64>, ModelError> {
    if field.len() != tr.len() {
        return Err(ModelError::SizeMismatch {
            expected: tr.len(),
            got: field.len(),
        });
    }
    Ok(match direction {
        Direction::ToMomentum => tr.to_momentum(field),
        Direction::ToPosition => tr.to_position(field),
    })
}
