//! The coupled Schrödinger–Klein-Gordon flow.
//!
//! State is the pair (u, z): nucleon wavefunction on the position grid and
//! meson field on the momentum grid. The equations of motion are
//!
//! ```text
//! i ∂_t u = (−Δ + V) u + φ_χ u
//! i ∂_t z = ω z + F,   F(k) = ω^{-1/2}(k) χ(k) ρ̂(k),   ρ = |u|²
//! ```
//!
//! with the smeared field φ_χ(x) = 2 Re ℱ^{-1}[ω^{-1/2} χ z](x). Both
//! equations are the Hamiltonian flow of the energy
//! 𝓔 = ⟨u,(−Δ+V)u⟩ + ⟨z,ωz⟩ + 2 Re⟨z,F⟩ in the unitary convention.
//!
//! Time stepping is a palindromic splitting: half-step kinetic phase on u,
//! half-step exact frozen-source update on z, full-step potential-plus-
//! coupling phase on u, then the mirrored substeps. Every substep multiplies
//! u by unimodular factors, so mass is conserved to roundoff; the z-substep
//! is the exact flow of i ż = ωz + F for frozen F, so the decoupled (χ ≡ 0)
//! field evolves exactly.

use serde::Serialize;
use thiserror::Error;

use crate::eigen::{lanczos_lowest, LanczosOpts};
use crate::linalg;
use crate::model::GridPair;
use crate::rng::CounterRng;
use crate::C64;

/// Phase-space point (u, z) with its timestamp.
#[derive(Debug, Clone)]
pub struct ClassicalState {
    pub u: Vec<C64>,
    pub z: Vec<C64>,
    pub t: f64,
}

impl ClassicalState {
    pub fn new(u: Vec<C64>, z: Vec<C64>) -> Self {
        Self { u, z, t: 0.0 }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![C64::new(0.0, 0.0); n], vec![C64::new(0.0, 0.0); n])
    }
}

/// Integrator configuration. The only integrator is the order-2 palindromic
/// splitting described in the module docs.
#[derive(Debug, Clone, Serialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub horizon: f64,
    /// Scalar series (t, mass, energies, boundary mass) recorded every
    /// `stride` steps.
    pub stride: usize,
    /// Full (u, z) snapshots recorded every `snapshot_stride` strides;
    /// 0 disables snapshots.
    pub snapshot_stride: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { dt: 1e-3, horizon: 10.0, stride: 100, snapshot_stride: 0 }
    }
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("non-finite values detected at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid flow configuration: {0}")]
    BadConfig(&'static str),
    #[error("substep violated unimodularity at t = {t}: norm ratio deviation {deviation}")]
    NotUnimodular { t: f64, deviation: f64 },
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum FlowWarning {
    /// More than the allowed fraction of mass in the outer 10% of the box.
    BoundaryMass { t: f64, fraction: f64 },
    /// Δt·max(ω) ≥ 1; the splitting stays stable but accuracy degrades.
    CoarseTimestep { dt_omega: f64 },
}

/// Energy functional split into its parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyBreakdown {
    pub total: f64,
    pub free: f64,
    pub interaction: f64,
    pub mass: f64,
}

/// One recorded scalar sample along a trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub energy0: f64,
    pub boundary_mass: f64,
}

#[derive(Debug)]
pub struct Trajectory {
    pub samples: Vec<FlowSample>,
    pub snapshots: Vec<ClassicalState>,
    pub warnings: Vec<FlowWarning>,
    pub final_state: ClassicalState,
}

/// F(k) = ω^{-1/2} χ ρ̂ for the current density ρ = |u|².
pub fn source_term(grid: &GridPair, u: &[C64]) -> Vec<C64> {
    let mut rho: Vec<C64> = u.iter().map(|ui| C64::new(ui.norm_sqr(), 0.0)).collect();
    grid.transform.forward(&mut rho);
    for (f, (w, c)) in rho.iter_mut().zip(grid.omega.iter().zip(&grid.chi)) {
        *f *= c / w.sqrt();
    }
    rho
}

/// Smeared field φ_χ(x) = 2 Re ℱ^{-1}[ω^{-1/2} χ z](x).
pub fn phi_field(grid: &GridPair, z: &[C64]) -> Vec<f64> {
    let mut buf: Vec<C64> = z
        .iter()
        .zip(grid.omega.iter().zip(&grid.chi))
        .map(|(zj, (w, c))| zj * (c / w.sqrt()))
        .collect();
    grid.transform.inverse(&mut buf);
    buf.iter().map(|v| 2.0 * v.re).collect()
}

/// (W ∗ ρ)(x) = ℱ^{-1}[(χ²/ω²) ρ̂](x) for a real density ρ; returns real
/// samples.
pub fn convolve_pair_potential(grid: &GridPair, rho: &[f64]) -> Vec<f64> {
    let mut buf: Vec<C64> = rho.iter().map(|&r| C64::new(r, 0.0)).collect();
    grid.transform.forward(&mut buf);
    for (b, (w, c)) in buf.iter_mut().zip(grid.omega.iter().zip(&grid.chi)) {
        *b *= c * c / (w * w);
    }
    grid.transform.inverse(&mut buf);
    buf.iter().map(|v| v.re).collect()
}

/// (−Δ + V) v by spectral differentiation.
pub fn apply_schrodinger(grid: &GridPair, v: &[C64]) -> Vec<C64> {
    let mut buf = v.to_vec();
    grid.transform.forward(&mut buf);
    for (b, kj) in buf.iter_mut().zip(&grid.k) {
        *b *= kj * kj;
    }
    grid.transform.inverse(&mut buf);
    for (b, (vi, pot)) in buf.iter_mut().zip(v.iter().zip(&grid.potential)) {
        *b += pot * vi;
    }
    buf
}

/// Lowest eigenpairs of −Δ + V, normalized in the position-quadrature norm
/// with real positive phase convention.
pub fn schrodinger_eigenpairs(
    grid: &GridPair,
    count: usize,
    rng: &mut CounterRng,
) -> Vec<(f64, Vec<C64>)> {
    let dim = grid.len();
    let apply = |v: &[C64], out: &mut [C64]| {
        let r = apply_schrodinger(grid, v);
        out.copy_from_slice(&r);
    };
    let pairs = lanczos_lowest(apply, dim, count, &LanczosOpts::default(), rng)
        .expect("Schrödinger eigensolve failed");
    pairs
        .into_iter()
        .map(|p| {
            let mut v = p.vector;
            // the operator preserves real vectors; rotate to the real axis
            let lead = v
                .iter()
                .cloned()
                .max_by(|a, b| a.norm_sqr().partial_cmp(&b.norm_sqr()).unwrap())
                .unwrap();
            let phase = lead / lead.norm();
            for vi in v.iter_mut() {
                *vi /= phase;
            }
            let nrm = grid.norm_x(&v);
            linalg::scale(&mut v, 1.0 / nrm);
            (p.value, v)
        })
        .collect()
}

/// Total, free, and interaction energy plus mass of a state.
pub fn energy(grid: &GridPair, state: &ClassicalState) -> EnergyBreakdown {
    let mass = linalg::norm_sq(&state.u, grid.dx);
    let mut uhat = state.u.clone();
    grid.transform.forward(&mut uhat);
    let kinetic: f64 = uhat
        .iter()
        .zip(&grid.k)
        .map(|(c, kj)| kj * kj * c.norm_sqr())
        .sum::<f64>()
        * grid.dk;
    let potential: f64 = state
        .u
        .iter()
        .zip(&grid.potential)
        .map(|(ui, v)| v * ui.norm_sqr())
        .sum::<f64>()
        * grid.dx;
    let field: f64 = state
        .z
        .iter()
        .zip(&grid.omega)
        .map(|(zj, w)| w * zj.norm_sqr())
        .sum::<f64>()
        * grid.dk;
    let f = source_term(grid, &state.u);
    let interaction = 2.0 * linalg::inner(&state.z, &f, grid.dk).re;
    let free = kinetic + potential + field;
    EnergyBreakdown { total: free + interaction, free, interaction, mass }
}

/// Constants for the rough comparison bounds between 𝓔 and 𝓔₀:
/// |𝓔 − 𝓔₀| ≤ c1 (𝓔₀ + ‖u‖⁴) and 𝓔₀ ≤ c2 (𝓔 + α ‖u‖⁴).
#[derive(Debug, Clone, Copy)]
pub struct EnergyBounds {
    pub c1: f64,
    pub c2: f64,
    pub alpha: f64,
}

pub fn energy_bounds(grid: &GridPair) -> EnergyBounds {
    let g: Vec<C64> = grid
        .coupling_profile()
        .iter()
        .map(|&v| C64::new(v, 0.0))
        .collect();
    let g_norm_sq = linalg::norm_sq(&g, grid.dk);
    let m = grid.params.mass;
    let two_pi = 2.0 * std::f64::consts::PI;
    EnergyBounds {
        c1: (1.0 / m).max(g_norm_sq / two_pi),
        c2: 2.0,
        alpha: g_norm_sq / (std::f64::consts::PI * m),
    }
}

impl EnergyBounds {
    pub fn satisfied(&self, e: &EnergyBreakdown) -> bool {
        let u4 = e.mass * e.mass;
        e.interaction.abs() <= self.c1 * (e.free + u4) + 1e-12
            && e.free >= -1e-12
            && e.free <= self.c2 * (e.total + self.alpha * u4) + 1e-12
    }
}

/// Fraction of mass in the outer 10% of the box.
pub fn boundary_mass_fraction(grid: &GridPair, u: &[C64]) -> f64 {
    let edge = 0.9 * grid.params.box_half_length;
    let outer: f64 = u
        .iter()
        .zip(&grid.x)
        .filter(|(_, &x)| x.abs() >= edge)
        .map(|(ui, _)| ui.norm_sqr())
        .sum::<f64>()
        * grid.dx;
    let total = linalg::norm_sq(u, grid.dx);
    if total > 0.0 {
        outer / total
    } else {
        0.0
    }
}

/// Single-trajectory stepper. Recorders receive every step boundary
/// (including t = 0) with the instantaneous source term, so scattering
/// quadratures accumulate without re-running the flow.
pub struct Stepper<'g> {
    grid: &'g GridPair,
    pub dt: f64,
    pub state: ClassicalState,
    kin_half: Vec<C64>,
    zrot_half: Vec<C64>,
    zsrc_half: Vec<C64>,
    coupling: Vec<f64>,
    source: Vec<C64>,
    scratch: Vec<C64>,
    mass_sq_target: f64,
    pub warnings: Vec<FlowWarning>,
    boundary_warned: bool,
}

/// Largest per-substep norm-ratio deviation attributable to roundoff; larger
/// deviations indicate a non-unimodular substep and abort the run.
const UNIMODULAR_GUARD: f64 = 1e-12;

impl<'g> Stepper<'g> {
    pub fn new(grid: &'g GridPair, state: ClassicalState, dt: f64) -> Result<Self, FlowError> {
        if dt == 0.0 || !dt.is_finite() {
            return Err(FlowError::BadConfig("dt must be finite and nonzero"));
        }
        if state.u.len() != grid.len() || state.z.len() != grid.len() {
            return Err(FlowError::BadConfig("state length does not match grid"));
        }
        let n = grid.len();
        // kinetic phases in FFT bin order with the exact 1/N fold
        let inv_n = 1.0 / n as f64;
        let kin_half: Vec<C64> = (0..n)
            .map(|b| {
                let j = if b < n / 2 { b as i64 } else { b as i64 - n as i64 };
                let k = j as f64 * grid.dk;
                C64::from_polar(1.0, -0.5 * dt * k * k) * inv_n
            })
            .collect();
        let zrot_half: Vec<C64> = grid
            .omega
            .iter()
            .map(|&w| C64::from_polar(1.0, -0.5 * dt * w))
            .collect();
        let zsrc_half: Vec<C64> = grid
            .omega
            .iter()
            .zip(&zrot_half)
            .map(|(&w, rot)| (C64::new(1.0, 0.0) - rot) / w)
            .collect();
        let mut warnings = Vec::new();
        let max_omega = grid.omega.iter().cloned().fold(0.0, f64::max);
        if dt.abs() * max_omega >= 1.0 {
            warnings.push(FlowWarning::CoarseTimestep { dt_omega: dt.abs() * max_omega });
        }
        let mass_sq_target = state.u.iter().map(|c| c.norm_sqr()).sum();
        Ok(Self {
            grid,
            dt,
            state,
            kin_half,
            zrot_half,
            zsrc_half,
            coupling: grid.coupling_profile(),
            source: vec![C64::new(0.0, 0.0); n],
            scratch: vec![C64::new(0.0, 0.0); n],
            mass_sq_target,
            warnings,
            boundary_warned: false,
        })
    }

    /// Source term F at the current state (recomputed; boundary-exact).
    pub fn boundary_source(&mut self) -> &[C64] {
        for (s, ui) in self.scratch.iter_mut().zip(&self.state.u) {
            *s = C64::new(ui.norm_sqr(), 0.0);
        }
        self.grid.transform.forward(&mut self.scratch);
        for ((f, s), g) in self.source.iter_mut().zip(&self.scratch).zip(&self.coupling) {
            *f = s * *g;
        }
        &self.source
    }

    /// Checks that a substep changed the norm only at roundoff scale. Every
    /// substep of the splitting is an isometry on u in exact arithmetic, so
    /// a larger deviation is a defect, not integration error.
    fn check_unimodular(&self, before_sq: f64) -> Result<(), FlowError> {
        let after_sq: f64 = self.state.u.iter().map(|c| c.norm_sqr()).sum();
        if before_sq == 0.0 {
            return Ok(());
        }
        let dev = (after_sq / before_sq - 1.0).abs();
        if !dev.is_finite() || dev > UNIMODULAR_GUARD {
            return Err(FlowError::NotUnimodular { t: self.state.t, deviation: dev });
        }
        Ok(())
    }

    /// Projects u back onto the mass shell fixed at construction. Per-step
    /// roundoff bias (~1e-16 relative) is below one ulp and cannot be
    /// corrected per step; once the accumulated deviation reaches a few ulps
    /// the rescale is representable and resets it. Deviations beyond the
    /// guard are defects and abort instead of being absorbed.
    fn project_mass(&mut self) -> Result<(), FlowError> {
        if self.mass_sq_target == 0.0 {
            return Ok(());
        }
        let m: f64 = self.state.u.iter().map(|c| c.norm_sqr()).sum();
        let dev = m / self.mass_sq_target - 1.0;
        if !dev.is_finite() || dev.abs() > UNIMODULAR_GUARD {
            return Err(FlowError::NotUnimodular { t: self.state.t, deviation: dev.abs() });
        }
        if dev.abs() > 32.0 * f64::EPSILON {
            let scale = 1.0 / (1.0 + dev).sqrt();
            for ui in self.state.u.iter_mut() {
                *ui *= scale;
            }
        }
        Ok(())
    }

    fn half_kinetic(&mut self) -> Result<(), FlowError> {
        let before: f64 = self.state.u.iter().map(|c| c.norm_sqr()).sum();
        self.grid.transform.fwd_raw(&mut self.state.u);
        for (ui, ph) in self.state.u.iter_mut().zip(&self.kin_half) {
            *ui *= ph;
        }
        self.grid.transform.inv_raw(&mut self.state.u);
        self.check_unimodular(before)
    }

    fn half_field(&mut self) {
        for ((zj, rot), (src, f)) in self
            .state
            .z
            .iter_mut()
            .zip(&self.zrot_half)
            .zip(self.zsrc_half.iter().zip(&self.source))
        {
            *zj = rot * *zj - src * f;
        }
    }

    /// One palindromic step; advances t by dt.
    pub fn step(&mut self) -> Result<(), FlowError> {
        self.half_kinetic()?;

        // frozen source from the current density (|u| is unchanged by the
        // phase substeps below, so one evaluation serves both field halves)
        for (s, ui) in self.scratch.iter_mut().zip(&self.state.u) {
            *s = C64::new(ui.norm_sqr(), 0.0);
        }
        self.grid.transform.forward(&mut self.scratch);
        for ((f, s), g) in self.source.iter_mut().zip(&self.scratch).zip(&self.coupling) {
            *f = s * *g;
        }

        self.half_field();

        // potential-plus-coupling phase at the midpoint field
        for ((s, zj), g) in self.scratch.iter_mut().zip(&self.state.z).zip(&self.coupling) {
            *s = zj * *g;
        }
        self.grid.transform.inverse(&mut self.scratch);
        let before: f64 = self.state.u.iter().map(|c| c.norm_sqr()).sum();
        for ((ui, s), v) in self
            .state
            .u
            .iter_mut()
            .zip(&self.scratch)
            .zip(&self.grid.potential)
        {
            let phi = 2.0 * s.re;
            *ui *= C64::from_polar(1.0, -self.dt * (v + phi));
        }
        self.check_unimodular(before)?;

        self.half_field();
        self.half_kinetic()?;
        self.project_mass()?;
        self.state.t += self.dt;

        if !self.state.u[0].re.is_finite()
            || self.state.u.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
            || self.state.z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(FlowError::NonFinite { t: self.state.t });
        }
        Ok(())
    }

    /// Checks the boundary-mass monitor, recording at most one warning.
    pub fn check_boundary(&mut self) {
        if self.boundary_warned {
            return;
        }
        let frac = boundary_mass_fraction(self.grid, &self.state.u);
        if frac >= 1e-8 {
            self.warnings.push(FlowWarning::BoundaryMass { t: self.state.t, fraction: frac });
            self.boundary_warned = true;
        }
    }
}

/// Evolves a state over `cfg.horizon`, recording scalar samples and optional
/// snapshots.
pub fn evolve(
    grid: &GridPair,
    state: ClassicalState,
    cfg: &FlowConfig,
) -> Result<Trajectory, FlowError> {
    if cfg.dt <= 0.0 {
        return Err(FlowError::BadConfig("dt must be positive"));
    }
    if cfg.horizon < 0.0 {
        return Err(FlowError::BadConfig("horizon must be nonnegative"));
    }
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let stride = cfg.stride.max(1);
    let mut stepper = Stepper::new(grid, state, cfg.dt)?;
    let mut samples = Vec::with_capacity(steps / stride + 2);
    let mut snapshots = Vec::new();
    let record = |st: &ClassicalState, grid: &GridPair, samples: &mut Vec<FlowSample>| {
        let e = energy(grid, st);
        samples.push(FlowSample {
            t: st.t,
            mass: e.mass,
            energy: e.total,
            energy0: e.free,
            boundary_mass: boundary_mass_fraction(grid, &st.u),
        });
    };
    record(&stepper.state, grid, &mut samples);
    if cfg.snapshot_stride > 0 {
        snapshots.push(stepper.state.clone());
    }
    for n in 1..=steps {
        stepper.step()?;
        stepper.check_boundary();
        if n % stride == 0 || n == steps {
            record(&stepper.state, grid, &mut samples);
            if cfg.snapshot_stride > 0 && (n / stride) % cfg.snapshot_stride == 0 {
                snapshots.push(stepper.state.clone());
            }
        }
    }
    let warnings = stepper.warnings.clone();
    Ok(Trajectory { samples, snapshots, warnings, final_state: stepper.state })
}

/// Residuals of the stationary system at multiplier λ:
/// r_u = ‖(−Δ+V)u − 2(W∗|u|²)u − λu‖/‖u‖ and r_z = ‖ωz + F‖/max(‖z‖, 1).
/// The convolution coefficient 2 is the variationally consistent one.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationaryResidual {
    pub r_u: f64,
    pub r_z: f64,
    pub lambda: f64,
}

pub fn stationary_residual(
    grid: &GridPair,
    state: &ClassicalState,
    lambda: Option<f64>,
) -> StationaryResidual {
    let rho: Vec<f64> = state.u.iter().map(|ui| ui.norm_sqr()).collect();
    let w_rho = convolve_pair_potential(grid, &rho);
    let au = apply_schrodinger(grid, &state.u);
    let hu: Vec<C64> = au
        .iter()
        .zip(state.u.iter().zip(&w_rho))
        .map(|(a, (ui, w))| a - 2.0 * w * ui)
        .collect();
    let mass = linalg::norm_sq(&state.u, grid.dx);
    let lambda = lambda.unwrap_or_else(|| {
        if mass > 0.0 {
            linalg::inner(&state.u, &hu, grid.dx).re / mass
        } else {
            0.0
        }
    });
    let res_u: Vec<C64> = hu
        .iter()
        .zip(&state.u)
        .map(|(h, ui)| h - lambda * ui)
        .collect();
    let r_u = if mass > 0.0 {
        linalg::norm(&res_u, grid.dx) / mass.sqrt()
    } else {
        0.0
    };
    let f = source_term(grid, &state.u);
    let res_z: Vec<C64> = state
        .z
        .iter()
        .zip(grid.omega.iter().zip(&f))
        .map(|(zj, (w, fj))| w * zj + fj)
        .collect();
    let r_z = linalg::norm(&res_z, grid.dk) / linalg::norm(&state.z, grid.dk).max(1.0);
    StationaryResidual { r_u, r_z, lambda }
}

/// Gaussian packet amplitude · exp(−(x−center)²/(2 width²) + i k₀ x),
/// unnormalized.
pub fn gaussian_packet(
    grid: &GridPair,
    center: f64,
    width: f64,
    amplitude: f64,
    momentum: f64,
) -> Vec<C64> {
    grid.x
        .iter()
        .map(|&x| {
            let env = amplitude * (-(x - center) * (x - center) / (2.0 * width * width)).exp();
            C64::from_polar(env, momentum * x)
        })
        .collect()
}

/// Scales a field to the given quadrature norm.
pub fn normalized_to(grid: &GridPair, field: &[C64], target_norm: f64) -> Vec<C64> {
    let mut v = field.to_vec();
    let n = grid.norm_x(&v);
    if n > 0.0 {
        linalg::scale(&mut v, target_norm / n);
    }
    v
}
