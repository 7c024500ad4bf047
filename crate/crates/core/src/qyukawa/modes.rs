//! Mode-truncated classical dynamics.
//!
//! Galerkin restriction of the coupled flow to the retained nucleon
//! eigenmodes and meson nodes:
//!
//! ```text
//! i u̇_a = e_a u_a + Σ_b Φ_ab(z) u_b,   Φ_ab = Σ_μ (D^μ_ab z_μ + conj(D^μ_ab) z̄_μ)
//! i ż_μ = ω_μ z_μ + F_μ(u),            F_μ = Σ_ab ū_a u_b conj(D^μ_ab)
//! ```
//!
//! This is the classical side of every semiclassical comparison: it shares
//! the coupling tensor with the quantum build, so the ħ → 0 limit is
//! isolated from discretization error. The integrator mirrors the
//! palindromic splitting of the full flow; wave-operator pairings use the
//! same Cook quadrature.

use crate::linalg::{self, expm_small_apply};
use crate::rng::CounterRng;
use crate::C64;

use super::fock::FockSpec;

/// Classical data of the truncated system.
#[derive(Debug, Clone)]
pub struct ModeSystem {
    pub e: Vec<f64>,
    pub omega: Vec<f64>,
    /// d_u×d_u coupling block per meson mode (shared with the quantum build).
    pub d: Vec<Vec<C64>>,
}

impl ModeSystem {
    pub fn from_spec(spec: &FockSpec) -> Self {
        Self {
            e: spec.nucleon_energies.clone(),
            omega: spec.meson_omegas.clone(),
            d: spec.coupling.clone(),
        }
    }

    pub fn d_u(&self) -> usize {
        self.e.len()
    }

    pub fn meson_count(&self) -> usize {
        self.omega.len()
    }

    /// F_μ(u) = Σ_ab ū_a u_b conj(D^μ_ab).
    pub fn source(&self, u: &[C64]) -> Vec<C64> {
        let d_u = self.d_u();
        self.d
            .iter()
            .map(|block| {
                let mut acc = C64::new(0.0, 0.0);
                for a in 0..d_u {
                    for b in 0..d_u {
                        acc += u[a].conj() * u[b] * block[a * d_u + b].conj();
                    }
                }
                acc
            })
            .collect()
    }

    /// Coupling matrix Φ(z), Hermitian d_u×d_u.
    pub fn coupling_matrix(&self, z: &[C64]) -> Vec<C64> {
        let d_u = self.d_u();
        let mut phi = vec![C64::new(0.0, 0.0); d_u * d_u];
        for (block, &zmu) in self.d.iter().zip(z) {
            for idx in 0..d_u * d_u {
                phi[idx] += block[idx] * zmu + block[idx].conj() * zmu.conj();
            }
        }
        phi
    }

    /// Total energy Σ e|u|² + Σ ω|z|² + 2 Re Σ z̄ F.
    pub fn energy(&self, u: &[C64], z: &[C64]) -> f64 {
        let free_u: f64 = self.e.iter().zip(u).map(|(&e, ui)| e * ui.norm_sqr()).sum();
        let free_z: f64 = self
            .omega
            .iter()
            .zip(z)
            .map(|(&w, zj)| w * zj.norm_sqr())
            .sum();
        let f = self.source(u);
        let inter = 2.0 * linalg::inner(z, &f, 1.0).re;
        free_u + free_z + inter
    }

    /// Hartree-reduced energy Σ e|u|² − Σ |F_μ|²/ω_μ.
    pub fn reduced_energy(&self, u: &[C64]) -> f64 {
        let free: f64 = self.e.iter().zip(u).map(|(&e, ui)| e * ui.norm_sqr()).sum();
        let f = self.source(u);
        let q: f64 = f
            .iter()
            .zip(&self.omega)
            .map(|(fm, &w)| fm.norm_sqr() / w)
            .sum();
        free - q
    }

    /// z_μ = −F_μ/ω_μ, the field minimizer at fixed u.
    pub fn reconstruct_field(&self, u: &[C64]) -> Vec<C64> {
        self.source(u)
            .iter()
            .zip(&self.omega)
            .map(|(f, &w)| -f / w)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ModeState {
    pub u: Vec<C64>,
    pub z: Vec<C64>,
    pub t: f64,
}

/// Palindromic step mirroring the full-grid splitting; the field source is
/// refrozen before each field half-step because the coupling phase no longer
/// preserves the nucleon density matrix after Galerkin truncation.
pub struct ModeStepper<'m> {
    pub system: &'m ModeSystem,
    pub state: ModeState,
    pub dt: f64,
    e_half: Vec<C64>,
    zrot_half: Vec<C64>,
    zsrc_half: Vec<C64>,
}

impl<'m> ModeStepper<'m> {
    pub fn new(system: &'m ModeSystem, state: ModeState, dt: f64) -> Self {
        let e_half: Vec<C64> = system
            .e
            .iter()
            .map(|&e| C64::from_polar(1.0, -0.5 * dt * e))
            .collect();
        let zrot_half: Vec<C64> = system
            .omega
            .iter()
            .map(|&w| C64::from_polar(1.0, -0.5 * dt * w))
            .collect();
        let zsrc_half: Vec<C64> = system
            .omega
            .iter()
            .zip(&zrot_half)
            .map(|(&w, rot)| (C64::new(1.0, 0.0) - rot) / w)
            .collect();
        Self { system, state, dt, e_half, zrot_half, zsrc_half }
    }

    fn half_free(&mut self) {
        for (ua, ph) in self.state.u.iter_mut().zip(&self.e_half) {
            *ua *= ph;
        }
    }

    fn half_field(&mut self) {
        let f = self.system.source(&self.state.u);
        for ((zj, rot), (src, fj)) in self
            .state
            .z
            .iter_mut()
            .zip(&self.zrot_half)
            .zip(self.zsrc_half.iter().zip(&f))
        {
            *zj = rot * *zj - src * fj;
        }
    }

    pub fn step(&mut self) {
        self.half_free();
        self.half_field();
        // coupling phase e^{-i dt Φ(z)} at the midpoint field
        let d_u = self.system.d_u();
        let phi = self.system.coupling_matrix(&self.state.z);
        let gen: Vec<C64> = phi.iter().map(|p| -C64::i() * self.dt * p).collect();
        self.state.u = expm_small_apply(&gen, d_u, &self.state.u);
        self.half_field();
        self.half_free();
        self.state.t += self.dt;
    }
}

/// Cook pairing ⟨ξ, Λ±(u₀,z₀)⟩ on the mode system at a fixed horizon,
/// all dictionary elements along one trajectory.
pub struct ModePairing {
    pub value: C64,
    pub horizon: f64,
}

pub fn mode_pairings(
    system: &ModeSystem,
    state0: &ModeState,
    xis: &[Vec<C64>],
    horizon: f64,
    dt: f64,
    forward: bool,
) -> Vec<ModePairing> {
    let sign = if forward { 1.0 } else { -1.0 };
    let dt_signed = dt * sign;
    let steps = (horizon / dt).round() as usize;
    let mut stepper = ModeStepper::new(
        system,
        ModeState { u: state0.u.clone(), z: state0.z.clone(), t: 0.0 },
        dt_signed,
    );
    let m = system.meson_count();
    let mut phase = vec![C64::new(1.0, 0.0); m];
    let phase_step: Vec<C64> = system
        .omega
        .iter()
        .map(|&w| C64::from_polar(1.0, dt_signed * w))
        .collect();
    let mut integrals = vec![C64::new(0.0, 0.0); xis.len()];
    let mut g_prev: Vec<C64> = {
        let f = system.source(&stepper.state.u);
        xis.iter().map(|xi| linalg::inner(xi, &f, 1.0)).collect()
    };
    for _ in 0..steps {
        stepper.step();
        for (p, s) in phase.iter_mut().zip(&phase_step) {
            *p *= s;
        }
        let f = system.source(&stepper.state.u);
        let twisted: Vec<C64> = f.iter().zip(&phase).map(|(fj, p)| p * fj).collect();
        for (slot, xi) in xis.iter().enumerate() {
            let g = linalg::inner(xi, &twisted, 1.0);
            integrals[slot] += 0.5 * dt_signed * (g_prev[slot] + g);
            g_prev[slot] = g;
        }
    }
    xis.iter()
        .enumerate()
        .map(|(slot, xi)| ModePairing {
            value: linalg::inner(xi, &state0.z, 1.0) - C64::i() * integrals[slot],
            horizon,
        })
        .collect()
}

/// Wirtinger gradient of the reduced energy (∂/∂ū; the real-convention
/// gradient is twice this).
pub fn reduced_gradient(system: &ModeSystem, u: &[C64]) -> Vec<C64> {
    let d_u = system.d_u();
    let f = system.source(u);
    let mut g: Vec<C64> = system.e.iter().zip(u).map(|(&e, ua)| e * ua).collect();
    for ((block, fmu), &w) in system.d.iter().zip(&f).zip(&system.omega) {
        // F_μ = u† conj(D^μ) u ⇒ ∂F/∂ū = conj(D^μ) u and ∂F̄/∂ū = D^μ u
        for a in 0..d_u {
            let mut dbar_u = C64::new(0.0, 0.0);
            let mut d_u_vec = C64::new(0.0, 0.0);
            for b in 0..d_u {
                dbar_u += block[a * d_u + b].conj() * u[b];
                d_u_vec += block[a * d_u + b] * u[b];
            }
            g[a] -= (fmu.conj() * dbar_u + fmu * d_u_vec) / w;
        }
    }
    g
}

/// Minimum of the reduced energy on the sphere ‖u‖ = δ by multi-start
/// projected gradient with Barzilai-Borwein steps.
pub fn minimize_reduced(
    system: &ModeSystem,
    delta: f64,
    starts: usize,
    rng: &CounterRng,
) -> (Vec<C64>, f64) {
    let d_u = system.d_u();
    let mut best: Option<(Vec<C64>, f64)> = None;
    for s in 0..starts {
        let mut stream = rng.substream(900 + s as u64);
        let mut u: Vec<C64> = if s == 0 {
            let mut v = vec![C64::new(0.0, 0.0); d_u];
            v[0] = C64::new(1.0, 0.0);
            v
        } else {
            stream.complex_vector(d_u)
        };
        let nrm = linalg::norm(&u, 1.0);
        linalg::scale(&mut u, delta / nrm);
        let mut energy = system.reduced_energy(&u);
        let mut prev: Option<(Vec<C64>, Vec<C64>)> = None;
        for _ in 0..4000 {
            let g_w = reduced_gradient(system, &u);
            let g: Vec<C64> = g_w.iter().map(|v| 2.0 * v).collect();
            let radial = linalg::inner(&u, &g, 1.0).re / (delta * delta);
            let gt: Vec<C64> = g.iter().zip(&u).map(|(gi, ui)| gi - radial * ui).collect();
            let gnorm = linalg::norm(&gt, 1.0);
            if gnorm < 1e-13 {
                break;
            }
            let mut step = match &prev {
                Some((u_prev, g_prev)) => {
                    let s_vec: Vec<C64> = u.iter().zip(u_prev).map(|(a, b)| a - b).collect();
                    let y_vec: Vec<C64> = gt.iter().zip(g_prev).map(|(a, b)| a - b).collect();
                    let sy = linalg::inner(&s_vec, &y_vec, 1.0).re;
                    if sy > 1e-300 {
                        (linalg::norm_sq(&s_vec, 1.0) / sy).clamp(1e-8, 1e2)
                    } else {
                        0.05
                    }
                }
                None => 0.05,
            };
            prev = Some((u.clone(), gt.clone()));
            let mut moved = false;
            for _ in 0..50 {
                let mut trial: Vec<C64> =
                    u.iter().zip(&gt).map(|(ui, gi)| ui - step * gi).collect();
                let nrm = linalg::norm(&trial, 1.0);
                linalg::scale(&mut trial, delta / nrm);
                let e_trial = system.reduced_energy(&trial);
                if e_trial <= energy - 1e-6 * step * gnorm * gnorm {
                    u = trial;
                    energy = e_trial;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, e)| energy < *e) {
            best = Some((u, energy));
        }
    }
    best.unwrap()
}
