//! Constrained ground-state problem via the single-field reduction.
//!
//! Eliminating the meson field at its closed-form minimizer
//! z₀ = −(χ/ω^{3/2}) ρ̂ turns the two-field energy into the Hartree
//! functional
//!
//! ```text
//! 𝓔̂(u) = ⟨u, (−Δ + V) u⟩ − Q(u),   Q(u) = ∫ (χ²/ω²) |ρ̂|² dk,
//! ```
//!
//! minimized over ‖u‖ = δ. The mean-field operator carries coefficient 2 on
//! the convolution term, (−Δ+V)u − 2(W∗|u|²)u = λu, which is what the
//! functional's derivative produces and what makes the reconstructed pair
//! (u₀, z₀) stationary under the full flow; λ = (⟨u,(−Δ+V)u⟩ − 2Q)/δ² is the
//! matching multiplier. The value δ^{-2}E_δ is also reported for comparison
//! with the unscaled-convolution convention.

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{lanczos_lowest, EigenError, LanczosOpts};
use crate::linalg;
use crate::model::GridPair;
use crate::rng::CounterRng;
use crate::skg::{self, ClassicalState};
use crate::C64;

/// Real even convolution kernel with its generating momentum profile χ²/ω².
#[derive(Debug, Clone)]
pub struct KernelW {
    /// W(x) on the position grid (periodic).
    pub kernel: Vec<f64>,
    /// χ²(k)/ω²(k) on the momentum grid; nonnegative.
    pub momentum_profile: Vec<f64>,
}

/// Builds the pair-potential kernel. The real-space samples are normalized
/// so that the position-quadrature double sum Δx² ΣΣ ρ W ρ equals the
/// momentum quadrature ∫ (χ²/ω²)|ρ̂|² dk.
pub fn build_kernel(grid: &GridPair) -> KernelW {
    let momentum_profile: Vec<f64> = grid
        .chi
        .iter()
        .zip(&grid.omega)
        .map(|(c, w)| c * c / (w * w))
        .collect();
    let mut buf: Vec<C64> = momentum_profile.iter().map(|&p| C64::new(p, 0.0)).collect();
    grid.transform.inverse(&mut buf);
    let scale = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let kernel: Vec<f64> = buf.iter().map(|v| v.re * scale).collect();
    debug_assert!(buf.iter().all(|v| v.im.abs() < 1e-12));
    KernelW { kernel, momentum_profile }
}

impl KernelW {
    /// Max |W(x) − W(−x)| over the grid (evenness defect).
    pub fn evenness_defect(&self) -> f64 {
        let n = self.kernel.len();
        (1..n / 2)
            .map(|j| (self.kernel[n / 2 + j] - self.kernel[n / 2 - j]).abs())
            .fold(0.0, f64::max)
    }
}

/// Quartic interaction Q(u) = ∫ (χ²/ω²)|ρ̂|² dk ≥ 0.
pub fn interaction_q(grid: &GridPair, u: &[C64]) -> f64 {
    let mut rho: Vec<C64> = u.iter().map(|ui| C64::new(ui.norm_sqr(), 0.0)).collect();
    grid.transform.forward(&mut rho);
    rho.iter()
        .zip(grid.chi.iter().zip(&grid.omega))
        .map(|(r, (c, w))| (c * c / (w * w)) * r.norm_sqr())
        .sum::<f64>()
        * grid.dk
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HartreeEnergy {
    /// 𝓔̂(u) = kinetic − q.
    pub total: f64,
    /// ⟨u, (−Δ + V) u⟩.
    pub kinetic: f64,
    pub q: f64,
}

pub fn hartree_energy(grid: &GridPair, u: &[C64]) -> HartreeEnergy {
    let au = skg::apply_schrodinger(grid, u);
    let kinetic = linalg::inner(u, &au, grid.dx).re;
    let q = interaction_q(grid, u);
    HartreeEnergy { total: kinetic - q, kinetic, q }
}

/// z₀(k) = −(χ/ω^{3/2})(k) ρ̂(k); satisfies ω z₀ + F = 0 identically.
pub fn reconstruct_field(grid: &GridPair, u: &[C64]) -> Vec<C64> {
    let mut rho: Vec<C64> = u.iter().map(|ui| C64::new(ui.norm_sqr(), 0.0)).collect();
    grid.transform.forward(&mut rho);
    for (r, (c, w)) in rho.iter_mut().zip(grid.chi.iter().zip(&grid.omega)) {
        *r *= -c / (w * w.sqrt());
    }
    rho
}

/// Gradient of 𝓔̂ in the real-inner-product convention:
/// 2(−Δ+V)u − 4(W∗|u|²)u.
pub fn gradient(grid: &GridPair, u: &[C64]) -> Vec<C64> {
    let rho: Vec<f64> = u.iter().map(|ui| ui.norm_sqr()).collect();
    let w_rho = skg::convolve_pair_potential(grid, &rho);
    let au = skg::apply_schrodinger(grid, u);
    au.iter()
        .zip(u.iter().zip(&w_rho))
        .map(|(a, (ui, w))| 2.0 * a - 4.0 * w * ui)
        .collect()
}

/// Central finite differences of 𝓔̂ along random directions versus the
/// analytic gradient; returns the maximum relative error.
pub fn gradient_check(
    grid: &GridPair,
    u: &[C64],
    h: f64,
    directions: usize,
    rng: &mut CounterRng,
) -> f64 {
    let g = gradient(grid, u);
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let mut v = rng.complex_vector(grid.len());
        let nrm = grid.norm_x(&v);
        linalg::scale(&mut v, 1.0 / nrm);
        let plus: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + h * b).collect();
        let minus: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a - h * b).collect();
        let fd = (hartree_energy(grid, &plus).total - hartree_energy(grid, &minus).total)
            / (2.0 * h);
        let analytic = linalg::inner(&g, &v, grid.dx).re;
        let scale = analytic.abs().max(1e-6);
        worst = worst.max((fd - analytic).abs() / scale);
    }
    worst
}

/// Lower bound inf spec(−Δ+V)·δ² − δ⁴‖ω^{-1}χ‖² for the constrained energy.
pub fn energy_lower_bound(grid: &GridPair, delta: f64, rng: &mut CounterRng) -> f64 {
    let pairs = skg::schrodinger_eigenpairs(grid, 1, rng);
    let chi_over_omega: Vec<C64> = grid
        .chi
        .iter()
        .zip(&grid.omega)
        .map(|(c, w)| C64::new(c / w, 0.0))
        .collect();
    pairs[0].0 * delta * delta
        - delta.powi(4) * linalg::norm_sq(&chi_over_omega, grid.dk)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Scf,
    ProjectedGradient,
}

#[derive(Debug, Clone)]
pub struct MinimizeOpts {
    pub method: Method,
    pub tol: f64,
    pub max_iter: usize,
    /// SCF damping θ; halved automatically when the energy increases.
    pub damping: f64,
}

impl Default for MinimizeOpts {
    fn default() -> Self {
        Self { method: Method::Scf, tol: 1e-10, max_iter: 400, damping: 0.5 }
    }
}

/// Initial guess for the minimizer.
#[derive(Debug, Clone)]
pub enum Init {
    LowestEigenmode,
    Guess(Vec<C64>),
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiStartReport {
    /// Pairwise distances modulo global phase between all returned minimizers.
    pub pairwise_distances: Vec<f64>,
    pub max_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HartreeResult {
    #[serde(skip)]
    pub u0: Vec<C64>,
    #[serde(skip)]
    pub z0: Vec<C64>,
    pub delta: f64,
    pub e_delta: f64,
    /// Multiplier of the coefficient-2 mean-field equation
    /// (Rayleigh quotient of −Δ+V−2W∗|u₀|² at u₀).
    pub lambda: f64,
    /// δ^{-2} E_δ, the multiplier of the unscaled-convolution convention;
    /// reported alongside for comparison.
    pub lambda_unscaled_convention: f64,
    pub q: f64,
    pub iterations: usize,
    pub residual: f64,
    pub method: Method,
    pub multi_start: Option<MultiStartReport>,
}

#[derive(Debug, Error)]
pub enum HartreeError {
    #[error("minimization did not converge: final residual {final_residual}; history {history:?}")]
    NoConvergence { final_residual: f64, history: Vec<f64> },
    #[error("eigensolver failure: {0}")]
    Eigen(#[from] EigenError),
    #[error("delta must be positive")]
    BadDelta,
}

fn normalize_to_delta(grid: &GridPair, u: &mut Vec<C64>, delta: f64) {
    let n = grid.norm_x(u);
    if n > 0.0 {
        linalg::scale(u, delta / n);
    }
}

/// Rotates the global phase so the largest-magnitude sample is real positive.
pub fn canonical_phase(u: &mut [C64]) {
    let lead = u
        .iter()
        .cloned()
        .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap());
    if let Some(lead) = lead {
        if lead.norm() > 0.0 {
            let phase = lead / lead.norm();
            for ui in u.iter_mut() {
                *ui /= phase;
            }
        }
    }
}

/// Euler–Lagrange residual ‖(−Δ+V)u − 2(W∗|u|²)u − λu‖/‖u‖ with λ the
/// Rayleigh quotient of the mean-field operator.
fn el_residual(grid: &GridPair, u: &[C64]) -> (f64, f64) {
    let rho: Vec<f64> = u.iter().map(|ui| ui.norm_sqr()).collect();
    let w_rho = skg::convolve_pair_potential(grid, &rho);
    let au = skg::apply_schrodinger(grid, u);
    let hu: Vec<C64> = au
        .iter()
        .zip(u.iter().zip(&w_rho))
        .map(|(a, (ui, w))| a - 2.0 * w * ui)
        .collect();
    let mass = linalg::norm_sq(u, grid.dx);
    let lambda = linalg::inner(u, &hu, grid.dx).re / mass;
    let res: Vec<C64> = hu.iter().zip(u).map(|(h, ui)| h - lambda * ui).collect();
    (linalg::norm(&res, grid.dx) / mass.sqrt(), lambda)
}

fn scf_minimize(
    grid: &GridPair,
    delta: f64,
    init: Vec<C64>,
    opts: &MinimizeOpts,
    rng: &mut CounterRng,
) -> Result<(Vec<C64>, usize, f64), HartreeError> {
    let mut u = init;
    normalize_to_delta(grid, &mut u, delta);
    let mut theta = opts.damping;
    let mut energy_prev = hartree_energy(grid, &u).total;
    let mut history = Vec::new();
    let lopts = LanczosOpts { max_krylov: 160, max_restarts: 200, tol: 1e-12 };
    for iter in 1..=opts.max_iter {
        let rho: Vec<f64> = u.iter().map(|ui| ui.norm_sqr()).collect();
        let w_rho = skg::convolve_pair_potential(grid, &rho);
        let apply = |v: &[C64], out: &mut [C64]| {
            let av = skg::apply_schrodinger(grid, v);
            for (o, (a, (vi, w))) in out.iter_mut().zip(av.iter().zip(v.iter().zip(&w_rho))) {
                *o = a - 2.0 * w * vi;
            }
        };
        let pairs = lanczos_lowest(apply, grid.len(), 1, &lopts, rng)?;
        let mut v = pairs[0].vector.clone();
        // align the eigenvector phase with the current iterate before mixing
        let overlap = linalg::inner(&u, &v, grid.dx);
        if overlap.norm() > 0.0 {
            let phase = overlap / overlap.norm();
            for vi in v.iter_mut() {
                *vi *= phase.conj();
            }
        }
        normalize_to_delta(grid, &mut v, delta);
        let mut u_next: Vec<C64> = u
            .iter()
            .zip(&v)
            .map(|(a, b)| (1.0 - theta) * a + theta * b)
            .collect();
        normalize_to_delta(grid, &mut u_next, delta);
        let energy_next = hartree_energy(grid, &u_next).total;
        if energy_next > energy_prev + 1e-13 * energy_prev.abs() {
            theta = (theta * 0.5).max(0.05);
        }
        u = u_next;
        energy_prev = energy_next;
        let (res, _) = el_residual(grid, &u);
        history.push(res);
        if res < opts.tol {
            return Ok((u, iter, res));
        }
    }
    Err(HartreeError::NoConvergence {
        final_residual: *history.last().unwrap_or(&f64::INFINITY),
        history,
    })
}

fn projected_gradient_minimize(
    grid: &GridPair,
    delta: f64,
    init: Vec<C64>,
    opts: &MinimizeOpts,
) -> Result<(Vec<C64>, usize, f64), HartreeError> {
    let mut u = init;
    normalize_to_delta(grid, &mut u, delta);
    let mut energy = hartree_energy(grid, &u).total;
    let mut history = Vec::new();
    let mut prev: Option<(Vec<C64>, Vec<C64>)> = None; // (u, tangent gradient)
    for iter in 1..=opts.max_iter {
        let g = gradient(grid, &u);
        // tangent projection on the sphere ‖u‖ = δ
        let radial = linalg::inner(&u, &g, grid.dx).re / (delta * delta);
        let gt: Vec<C64> = g.iter().zip(&u).map(|(gi, ui)| gi - radial * ui).collect();
        let gnorm_sq = linalg::norm_sq(&gt, grid.dx);
        // Barzilai-Borwein trial step from the previous iterate, then a
        // monotone backtracking line search
        let mut step = match &prev {
            Some((u_prev, g_prev)) => {
                let s: Vec<C64> = u.iter().zip(u_prev).map(|(a, b)| a - b).collect();
                let y: Vec<C64> = gt.iter().zip(g_prev).map(|(a, b)| a - b).collect();
                let ss = linalg::norm_sq(&s, grid.dx);
                let sy = linalg::inner(&s, &y, grid.dx).re;
                if sy > 1e-300 {
                    (ss / sy).clamp(1e-6, 1e3)
                } else {
                    0.1
                }
            }
            None => 0.1,
        };
        prev = Some((u.clone(), gt.clone()));
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<C64> = u
                .iter()
                .zip(&gt)
                .map(|(ui, gi)| ui - step * gi)
                .collect();
            normalize_to_delta(grid, &mut trial, delta);
            let e_trial = hartree_energy(grid, &trial).total;
            if e_trial <= energy - 1e-4 * step * gnorm_sq {
                u = trial;
                energy = e_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        let (res, _) = el_residual(grid, &u);
        history.push(res);
        if res < opts.tol {
            return Ok((u, iter, res));
        }
        if !accepted && gnorm_sq.sqrt() < opts.tol * delta {
            return Ok((u, iter, res));
        }
    }
    Err(HartreeError::NoConvergence {
        final_residual: *history.last().unwrap_or(&f64::INFINITY),
        history,
    })
}

/// Minimizes 𝓔̂ on the sphere ‖u‖ = δ and packages the reconstructed pair.
pub fn minimize(
    grid: &GridPair,
    delta: f64,
    init: Init,
    opts: &MinimizeOpts,
    rng: &mut CounterRng,
) -> Result<HartreeResult, HartreeError> {
    if delta <= 0.0 {
        return Err(HartreeError::BadDelta);
    }
    let init_vec = match init {
        Init::Guess(v) => v,
        Init::LowestEigenmode => {
            let pairs = skg::schrodinger_eigenpairs(grid, 1, rng);
            pairs[0].1.clone()
        }
    };
    let (mut u0, iterations, residual) = match opts.method {
        Method::Scf => scf_minimize(grid, delta, init_vec, opts, rng)?,
        Method::ProjectedGradient => projected_gradient_minimize(grid, delta, init_vec, opts)?,
    };
    canonical_phase(&mut u0);
    let z0 = reconstruct_field(grid, &u0);
    let he = hartree_energy(grid, &u0);
    let (_, lambda) = el_residual(grid, &u0);
    let delta_sq = delta * delta;
    Ok(HartreeResult {
        e_delta: he.total,
        lambda,
        lambda_unscaled_convention: he.total / delta_sq,
        q: he.q,
        delta,
        iterations,
        residual,
        method: opts.method,
        multi_start: None,
        u0,
        z0,
    })
}

/// Runs `starts` independent minimizations from random initial data and
/// reports pairwise distances modulo global phase. Returns the lowest-energy
/// result with the distinctness report attached.
pub fn multistart_minimize(
    grid: &GridPair,
    delta: f64,
    starts: usize,
    opts: &MinimizeOpts,
    rng: &CounterRng,
) -> Result<HartreeResult, HartreeError> {
    use rayon::prelude::*;
    let results: Vec<Result<HartreeResult, HartreeError>> = (0..starts)
        .into_par_iter()
        .map(|s| {
            let mut stream = rng.substream(s as u64 + 1);
            let init: Vec<C64> = (0..grid.len())
                .map(|i| {
                    // random smooth-ish start: Gaussian envelope times noise
                    let x = grid.x[i];
                    let envelope = (-x * x / 8.0).exp();
                    stream.next_complex_gaussian() * envelope
                })
                .collect();
            minimize(grid, delta, Init::Guess(init), opts, &mut stream)
        })
        .collect();
    let mut ok = Vec::with_capacity(starts);
    for r in results {
        ok.push(r?);
    }
    let mut pairwise = Vec::new();
    let mut max_distance = 0.0f64;
    for i in 0..ok.len() {
        for j in (i + 1)..ok.len() {
            let d = linalg::phase_distance(&ok[i].u0, &ok[j].u0, grid.dx);
            max_distance = max_distance.max(d);
            pairwise.push(d);
        }
    }
    let mut best = ok
        .into_iter()
        .min_by(|a, b| a.e_delta.partial_cmp(&b.e_delta).unwrap())
        .unwrap();
    best.multi_start = Some(MultiStartReport { pairwise_distances: pairwise, max_distance });
    Ok(best)
}

/// Packages (u₀, z₀) as a flow state for stationarity experiments.
pub fn as_state(result: &HartreeResult) -> ClassicalState {
    ClassicalState::new(result.u0.clone(), result.z0.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_grids, CutoffSpec, ModelParams};
    use crate::skg::{energy, gaussian_packet, normalized_to};

    fn default_grid() -> GridPair {
        build_grids(&ModelParams::default()).unwrap()
    }

    fn decoupled_grid() -> GridPair {
        build_grids(&ModelParams {
            cutoff: CutoffSpec { radius: 2.0, amplitude: 0.0 },
            ..ModelParams::default()
        })
        .unwrap()
    }

    #[test]
    fn kernel_vanishes_without_cutoff() {
        let grid = decoupled_grid();
        let w = build_kernel(&grid);
        assert!(w.kernel.iter().all(|&v| v.abs() < 1e-15));
        assert!(w.momentum_profile.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn kernel_is_real_even_with_nonnegative_profile() {
        let grid = default_grid();
        let w = build_kernel(&grid);
        assert!(w.evenness_defect() < 1e-12);
        assert!(w.momentum_profile.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn kernel_profile_scales_with_mass_at_zero() {
        // at k = 0 the profile is χ(0)²/m²: doubling m divides it by 4
        let p1 = ModelParams::default();
        let p2 = ModelParams { mass: 2.0, ..ModelParams::default() };
        let g1 = build_grids(&p1).unwrap();
        let g2 = build_grids(&p2).unwrap();
        let w1 = build_kernel(&g1);
        let w2 = build_kernel(&g2);
        let zero = g1.nearest_k_index(0.0);
        assert!((w1.momentum_profile[zero] - 1.0).abs() < 1e-14);
        assert!((w2.momentum_profile[zero] - 0.25).abs() < 1e-14);
    }

    #[test]
    fn kernel_and_momentum_quadratures_agree() {
        let grid = default_grid();
        let w = build_kernel(&grid);
        let mut rng = CounterRng::new(41);
        let u = normalized_to(&grid, &rng.complex_vector(grid.len()), 0.7);
        let rho: Vec<f64> = u.iter().map(|ui| ui.norm_sqr()).collect();
        let n = grid.len();
        // direct periodic double sum through the real-space kernel; the
        // displacement x_i − x_j sits at sample index N/2 + (i − j) mod N
        // because the kernel is tabulated on x ∈ [−L, L)
        let mut q_kernel = 0.0;
        for i in 0..n {
            let mut conv = 0.0;
            for j in 0..n {
                let d = (n / 2 + i + n - j) % n;
                conv += w.kernel[d] * rho[j];
            }
            q_kernel += rho[i] * conv;
        }
        q_kernel *= grid.dx * grid.dx;
        let q_momentum = interaction_q(&grid, &u);
        assert!(
            (q_kernel - q_momentum).abs() < 1e-10 * q_momentum.abs().max(1e-10),
            "kernel {q_kernel} vs momentum {q_momentum}"
        );
    }

    #[test]
    fn hartree_energy_zero_for_zero_field() {
        let grid = default_grid();
        let he = hartree_energy(&grid, &vec![C64::new(0.0, 0.0); grid.len()]);
        assert_eq!(he.total, 0.0);
        assert_eq!(he.kinetic, 0.0);
        assert_eq!(he.q, 0.0);
    }

    #[test]
    fn hartree_energy_of_decoupled_eigenmode() {
        let grid = decoupled_grid();
        let mut rng = CounterRng::new(43);
        let pairs = skg::schrodinger_eigenpairs(&grid, 1, &mut rng);
        let delta = 0.5;
        let u: Vec<C64> = pairs[0].1.iter().map(|v| v * delta).collect();
        let he = hartree_energy(&grid, &u);
        assert!(he.q == 0.0);
        let expect = delta * delta * pairs[0].0;
        assert!((he.total - expect).abs() < 1e-10);
    }

    #[test]
    fn hartree_energy_equals_full_energy_at_reconstructed_field() {
        let grid = default_grid();
        let u = normalized_to(&grid, &gaussian_packet(&grid, 0.3, 1.2, 1.0, 0.2), 0.6);
        let z0 = reconstruct_field(&grid, &u);
        let full = energy(&grid, &ClassicalState::new(u.clone(), z0));
        let reduced = hartree_energy(&grid, &u);
        assert!(
            (full.total - reduced.total).abs() < 1e-10 * reduced.total.abs().max(1.0),
            "full {} vs reduced {}",
            full.total,
            reduced.total
        );
    }

    #[test]
    fn reconstructed_field_kills_the_field_equation() {
        let grid = default_grid();
        let u = normalized_to(&grid, &gaussian_packet(&grid, 0.0, 1.0, 1.0, 0.0), 0.5);
        let z0 = reconstruct_field(&grid, &u);
        let f = skg::source_term(&grid, &u);
        let mut worst = 0.0f64;
        for ((zj, w), fj) in z0.iter().zip(&grid.omega).zip(&f) {
            worst = worst.max((w * zj + fj).norm());
        }
        assert!(worst < 1e-12, "field equation residual {worst}");
    }

    #[test]
    fn reconstructed_field_matches_conjugate_form_for_even_density() {
        // for an even density ρ̂ is real, so −(χ(−k)/ω^{3/2}) conj(ρ̂)(k)
        // coincides with the implemented formula
        let grid = default_grid();
        let u = normalized_to(&grid, &gaussian_packet(&grid, 0.0, 1.0, 1.0, 0.0), 0.5);
        let z0 = reconstruct_field(&grid, &u);
        let mut rho: Vec<C64> = u.iter().map(|ui| C64::new(ui.norm_sqr(), 0.0)).collect();
        grid.transform.forward(&mut rho);
        let n = grid.len();
        let mut worst = 0.0f64;
        for j in 1..n {
            let mirror = n - j; // index of −k for j > 0
            let chi_neg = grid.chi[mirror];
            let expect = -chi_neg / grid.omega[j].powf(1.5) * rho[j].conj();
            worst = worst.max((z0[j] - expect).norm());
        }
        assert!(worst < 1e-12, "conjugate-form mismatch {worst}");
    }

    #[test]
    fn reconstruct_zero_cases() {
        let grid = default_grid();
        let z = reconstruct_field(&grid, &vec![C64::new(0.0, 0.0); grid.len()]);
        assert!(z.iter().all(|c| c.norm() == 0.0));
        let g0 = decoupled_grid();
        let u = gaussian_packet(&g0, 0.0, 1.0, 0.4, 0.0);
        let z = reconstruct_field(&g0, &u);
        assert!(z.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let grid = default_grid();
        let mut rng = CounterRng::new(47);
        let u = normalized_to(&grid, &gaussian_packet(&grid, 0.4, 1.1, 1.0, 0.3), 0.5);
        let err = gradient_check(&grid, &u, 1e-5, 20, &mut rng);
        assert!(err < 1e-6, "gradient FD error {err}");
    }

    #[test]
    fn gradient_matches_finite_differences_decoupled() {
        let grid = decoupled_grid();
        let mut rng = CounterRng::new(53);
        let u = normalized_to(&grid, &gaussian_packet(&grid, -0.2, 0.9, 1.0, 0.1), 0.5);
        let err = gradient_check(&grid, &u, 1e-5, 20, &mut rng);
        assert!(err < 1e-6, "quadratic-case FD error {err}");
    }

    #[test]
    fn wrong_quartic_coefficient_fails_the_gradient_check() {
        // dropping the factor on the convolution term must be detectable
        let grid = default_grid();
        let mut rng = CounterRng::new(59);
        let u = normalized_to(&grid, &gaussian_packet(&grid, 0.1, 1.0, 1.0, 0.0), 0.5);
        let rho: Vec<f64> = u.iter().map(|ui| ui.norm_sqr()).collect();
        let w_rho = skg::convolve_pair_potential(&grid, &rho);
        let au = skg::apply_schrodinger(&grid, &u);
        let bad: Vec<C64> = au
            .iter()
            .zip(u.iter().zip(&w_rho))
            .map(|(a, (ui, w))| 2.0 * a - 2.0 * w * ui)
            .collect();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let mut v = rng.complex_vector(grid.len());
            let nrm = grid.norm_x(&v);
            linalg::scale(&mut v, 1.0 / nrm);
            let h = 1e-5;
            let plus: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a + h * b).collect();
            let minus: Vec<C64> = u.iter().zip(&v).map(|(a, b)| a - h * b).collect();
            let fd = (hartree_energy(&grid, &plus).total - hartree_energy(&grid, &minus).total)
                / (2.0 * h);
            let analytic = linalg::inner(&bad, &v, grid.dx).re;
            worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-6));
        }
        assert!(worst > 1e-2, "negative control too accurate: {worst}");
    }

    #[test]
    fn decoupled_minimizer_is_scaled_eigenmode() {
        let grid = decoupled_grid();
        let mut rng = CounterRng::new(61);
        let delta = 0.5;
        let result =
            minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng)
                .unwrap();
        let pairs = skg::schrodinger_eigenpairs(&grid, 1, &mut rng);
        let expect_e = delta * delta * pairs[0].0;
        assert!((result.e_delta - expect_e).abs() < 1e-8, "E {}", result.e_delta);
        assert!((result.lambda - pairs[0].0).abs() < 1e-8, "λ {}", result.lambda);
        let scaled: Vec<C64> = pairs[0].1.iter().map(|v| v * delta).collect();
        assert!(linalg::phase_distance(&result.u0, &scaled, grid.dx) < 1e-7);
    }

    #[test]
    fn minimizer_norm_constraint_and_invariants() {
        let grid = default_grid();
        let mut rng = CounterRng::new(67);
        let delta = 0.5;
        let r = minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng)
            .unwrap();
        assert!((grid.norm_x(&r.u0) - delta).abs() < 1e-12);
        assert!(r.residual < 1e-10);
        // reconstructed pair satisfies both stationary equations
        let st = as_state(&r);
        let res = skg::stationary_residual(&grid, &st, Some(r.lambda));
        assert!(res.r_u < 1e-8, "r_u {}", res.r_u);
        assert!(res.r_z < 1e-10, "r_z {}", res.r_z);
        // energy lower bound
        let bound = energy_lower_bound(&grid, delta, &mut rng);
        assert!(r.e_delta >= bound, "E {} below bound {bound}", r.e_delta);
        // identity between reduced and full energy
        let full = energy(&grid, &st);
        assert!((full.total - r.e_delta).abs() < 1e-10 * r.e_delta.abs().max(1.0));
    }

    #[test]
    fn multistart_minimizers_agree_modulo_phase() {
        let grid = default_grid();
        let rng = CounterRng::new(71);
        let r = multistart_minimize(&grid, 0.3, 5, &MinimizeOpts::default(), &rng).unwrap();
        let report = r.multi_start.as_ref().unwrap();
        assert!(
            report.max_distance < 1e-6,
            "multi-start disagreement {}",
            report.max_distance
        );
    }

    #[test]
    fn minimizer_dominates_random_trials() {
        let grid = default_grid();
        let mut rng = CounterRng::new(73);
        let delta = 0.5;
        let r = minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng)
            .unwrap();
        for trial in 0..100 {
            let mut stream = rng.substream(trial);
            let cand = normalized_to(&grid, &stream.complex_vector(grid.len()), delta);
            let e = hartree_energy(&grid, &cand).total;
            assert!(e > r.e_delta, "trial {trial} beat the minimizer: {e} <= {}", r.e_delta);
        }
    }

    #[test]
    fn projected_gradient_agrees_with_scf() {
        let grid = default_grid();
        let mut rng = CounterRng::new(79);
        let delta = 0.4;
        let scf = minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng)
            .unwrap();
        // gradient methods bottom out near √ε in the residual; SCF is the
        // high-accuracy path
        let pg_opts = MinimizeOpts {
            method: Method::ProjectedGradient,
            tol: 2e-8,
            max_iter: 4000,
            damping: 0.5,
        };
        let pg = minimize(&grid, delta, Init::LowestEigenmode, &pg_opts, &mut rng).unwrap();
        assert!((scf.e_delta - pg.e_delta).abs() < 1e-8);
        assert!(linalg::phase_distance(&scf.u0, &pg.u0, grid.dx) < 1e-4);
    }

    #[test]
    fn u1_covariance_of_minimizer() {
        let grid = default_grid();
        let mut rng = CounterRng::new(83);
        let delta = 0.3;
        let base = minimize(&grid, delta, Init::LowestEigenmode, &MinimizeOpts::default(), &mut rng)
            .unwrap();
        let theta = 1.234;
        let rotated: Vec<C64> = base
            .u0
            .iter()
            .map(|ui| ui * C64::from_polar(1.0, theta))
            .collect();
        let r2 = minimize(&grid, delta, Init::Guess(rotated), &MinimizeOpts::default(), &mut rng)
            .unwrap();
        assert!(linalg::phase_distance(&base.u0, &r2.u0, grid.dx) < 1e-8);
    }

    #[test]
    fn non_convergence_reports_history() {
        let grid = default_grid();
        let mut rng = CounterRng::new(89);
        let opts = MinimizeOpts { max_iter: 1, tol: 1e-15, ..MinimizeOpts::default() };
        let err = minimize(&grid, 0.5, Init::LowestEigenmode, &opts, &mut rng).unwrap_err();
        match err {
            HartreeError::NoConvergence { history, .. } => assert_eq!(history.len(), 1),
            other => panic!("unexpected error {other:?}"),
        }
    }
}
