//! Coherent preparations and Weyl operators on the truncated basis.
//!
//! A coherent state at phase-space point (u, z) has per-mode displacement
//! β = α/√ħ with α the mode projection of (u, z). Its occupation
//! coefficients are products of Poisson amplitudes, so it is written down
//! in closed form, truncated to the basis, and renormalized; the captured
//! norm is the truncation-adequacy measure. The Weyl operator
//! W_ħ(η) = exp{(i/√2)(ψ*_ħ(η₁)+ψ_ħ(η₁)) + (i/√2)(a*_ħ(η₂)+a_ħ(η₂))} acts
//! through a Krylov exponential of its Hermitian generator. Its coherent
//! expectation has the closed form e^{√2 i Re⟨η,α⟩ − ħ‖η‖²/4}.

use crate::linalg;
use crate::C64;

use super::fock::{FockBasis, FockError, NucleonSector, QuantumState};
use super::krylov::{expm_apply, KrylovError, KrylovOpts};

/// Smallest cap with Poisson(λ) tail mass beyond it at most `tol`.
pub fn poisson_adequate_cap(lambda: f64, tol: f64) -> u8 {
    if lambda <= 0.0 {
        return 0;
    }
    let mut term = (-lambda).exp();
    let mut cdf = term;
    for n in 1..=250u32 {
        term *= lambda / n as f64;
        cdf += term;
        if 1.0 - cdf <= tol {
            return n.min(255) as u8;
        }
    }
    255
}

#[derive(Debug, Clone)]
pub struct CoherentInfo {
    /// Norm fraction captured by the truncated basis before renormalization.
    pub captured: f64,
    pub alpha_nucleon: Vec<C64>,
    pub alpha_meson: Vec<C64>,
}

fn poisson_amplitudes(beta: C64, cap: u8) -> Vec<C64> {
    let mut out = Vec::with_capacity(cap as usize + 1);
    let mut amp = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    out.push(amp);
    for n in 1..=cap as usize {
        amp = amp * beta / (n as f64).sqrt();
        out.push(amp);
    }
    out
}

/// Coherent state at mode amplitudes (α_nucleon, α_meson). Errors when the
/// truncated basis captures less than 1 − 1e-8 of the norm, suggesting
/// adequate caps.
pub fn coherent_state(
    basis: &FockBasis,
    alpha_nucleon: &[C64],
    alpha_meson: &[C64],
) -> Result<(QuantumState, CoherentInfo), FockError> {
    let spec = &basis.spec;
    if alpha_nucleon.len() != spec.d_u() || alpha_meson.len() != spec.meson_count() {
        return Err(FockError::ModeMismatch);
    }
    let hs_sqrt = spec.hslash.sqrt();
    let nuc_cap_for_tables = match spec.nucleon_sector {
        NucleonSector::Capped(c) => c,
        NucleonSector::Fixed(n) => n,
    };
    let nuc_amps: Vec<Vec<C64>> = alpha_nucleon
        .iter()
        .map(|&a| poisson_amplitudes(a / hs_sqrt, nuc_cap_for_tables))
        .collect();
    let mes_amps: Vec<Vec<C64>> = alpha_meson
        .iter()
        .map(|&a| poisson_amplitudes(a / hs_sqrt, spec.meson_cap))
        .collect();
    let mut coeffs = Vec::with_capacity(basis.dim());
    for (nuc, mes) in &basis.states {
        let mut c = C64::new(1.0, 0.0);
        for (mode, &occ) in nuc.iter().enumerate() {
            c *= nuc_amps[mode][occ as usize];
        }
        for (mode, &occ) in mes.iter().enumerate() {
            c *= mes_amps[mode][occ as usize];
        }
        coeffs.push(c);
    }
    let captured = match spec.nucleon_sector {
        NucleonSector::Capped(_) => linalg::norm_sq(&coeffs, 1.0),
        NucleonSector::Fixed(_) => {
            // fixed-sector preparation is the normalized projection; adequacy
            // concerns the meson factor only
            mes_amps
                .iter()
                .map(|amps| amps.iter().map(|a| a.norm_sqr()).sum::<f64>())
                .product()
        }
    };
    if captured < 1.0 - 1e-8 {
        let lambda_n: f64 =
            alpha_nucleon.iter().map(|a| a.norm_sqr()).sum::<f64>() / spec.hslash;
        let lambda_m: f64 =
            alpha_meson.iter().map(|a| a.norm_sqr()).sum::<f64>() / spec.hslash;
        return Err(FockError::TruncationInadequate {
            captured,
            suggested_nucleon: poisson_adequate_cap(lambda_n, 5e-9),
            suggested_meson: poisson_adequate_cap(lambda_m, 5e-9),
        });
    }
    let state = QuantumState::new_normalized(coeffs);
    Ok((
        state,
        CoherentInfo {
            captured,
            alpha_nucleon: alpha_nucleon.to_vec(),
            alpha_meson: alpha_meson.to_vec(),
        },
    ))
}

/// Closed-form coherent expectation of W_ħ(η):
/// e^{√2 i Re⟨η, α⟩ − ħ‖η‖²/4}, with the inner product over both sectors.
pub fn coherent_weyl_expectation(
    hslash: f64,
    alpha_nucleon: &[C64],
    alpha_meson: &[C64],
    eta_nucleon: &[C64],
    eta_meson: &[C64],
) -> C64 {
    let inner = linalg::inner(eta_nucleon, alpha_nucleon, 1.0)
        + linalg::inner(eta_meson, alpha_meson, 1.0);
    let norm_sq = linalg::norm_sq(eta_nucleon, 1.0) + linalg::norm_sq(eta_meson, 1.0);
    let magnitude = (-hslash * norm_sq / 4.0).exp();
    C64::from_polar(magnitude, std::f64::consts::SQRT_2 * inner.re)
}

/// Applies the Hermitian Weyl generator
/// B = (1/√2)(φ^{(1)}_ħ(η₁) + φ^{(2)}_ħ(η₂)).
pub fn apply_weyl_generator(
    basis: &FockBasis,
    eta_nucleon: &[C64],
    eta_meson: &[C64],
    x: &[C64],
    y: &mut [C64],
) {
    let inv_sqrt2 = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    for v in y.iter_mut() {
        *v = C64::new(0.0, 0.0);
    }
    if eta_meson.iter().any(|e| e.norm_sqr() > 0.0) {
        basis.apply_meson_annihilate(eta_meson, x, y, inv_sqrt2);
        basis.apply_meson_create(eta_meson, x, y, inv_sqrt2);
    }
    if eta_nucleon.iter().any(|e| e.norm_sqr() > 0.0) {
        basis.apply_nucleon_annihilate(eta_nucleon, x, y, inv_sqrt2);
        basis.apply_nucleon_create(eta_nucleon, x, y, inv_sqrt2);
    }
}

/// W_ħ(η) x = e^{iB} x by Krylov exponentiation of the generator.
pub fn weyl_apply(
    basis: &FockBasis,
    eta_nucleon: &[C64],
    eta_meson: &[C64],
    x: &[C64],
) -> Result<Vec<C64>, KrylovError> {
    let apply = |v: &[C64], out: &mut [C64]| {
        apply_weyl_generator(basis, eta_nucleon, eta_meson, v, out);
    };
    // e^{iB} = e^{-i(−1)B}
    expm_apply(&apply, basis.dim(), x, -1.0, &KrylovOpts::default())
}

/// ⟨a_ħ,p⟩ for every mode of both sectors.
pub fn mode_expectations(basis: &FockBasis, state: &QuantumState) -> (Vec<C64>, Vec<C64>) {
    let d_u = basis.spec.d_u();
    let m = basis.spec.meson_count();
    let dim = basis.dim();
    let mut nuc = Vec::with_capacity(d_u);
    let mut unit = vec![C64::new(0.0, 0.0); d_u];
    for a in 0..d_u {
        unit[a] = C64::new(1.0, 0.0);
        let mut y = vec![C64::new(0.0, 0.0); dim];
        basis.apply_nucleon_annihilate(&unit, &state.coeffs, &mut y, C64::new(1.0, 0.0));
        nuc.push(linalg::inner(&state.coeffs, &y, 1.0));
        unit[a] = C64::new(0.0, 0.0);
    }
    let mut mes = Vec::with_capacity(m);
    let mut unit_m = vec![C64::new(0.0, 0.0); m];
    for mu in 0..m {
        unit_m[mu] = C64::new(1.0, 0.0);
        let mut y = vec![C64::new(0.0, 0.0); dim];
        basis.apply_meson_annihilate(&unit_m, &state.coeffs, &mut y, C64::new(1.0, 0.0));
        mes.push(linalg::inner(&state.coeffs, &y, 1.0));
        unit_m[mu] = C64::new(0.0, 0.0);
    }
    (nuc, mes)
}

/// Fixed-sector coherent preparation: the normalized projection of the
/// coherent state onto the nucleon number-n block (the meson factor is the
/// usual truncated coherent state).
pub fn fixed_sector_coherent(
    basis: &FockBasis,
    alpha_nucleon: &[C64],
    alpha_meson: &[C64],
) -> Result<(QuantumState, CoherentInfo), FockError> {
    match basis.spec.nucleon_sector {
        NucleonSector::Fixed(_) => coherent_state(basis, alpha_nucleon, alpha_meson),
        NucleonSector::Capped(_) => Err(FockError::ModeMismatch),
    }
}

/// Diagnostic CCR check: ⟨[a_ħ,μ, a*_ħ,μ]⟩ on a state; equals ħ exactly when
/// the state is far from the occupation cap.
pub fn ccr_expectation(basis: &FockBasis, state: &QuantumState, mu: usize) -> f64 {
    let dim = basis.dim();
    let m = basis.spec.meson_count();
    let mut eta = vec![C64::new(0.0, 0.0); m];
    eta[mu] = C64::new(1.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let mut up = vec![C64::new(0.0, 0.0); dim];
    basis.apply_meson_create(&eta, &state.coeffs, &mut up, one);
    let mut down_up = vec![C64::new(0.0, 0.0); dim];
    basis.apply_meson_annihilate(&eta, &up, &mut down_up, one);
    let mut down = vec![C64::new(0.0, 0.0); dim];
    basis.apply_meson_annihilate(&eta, &state.coeffs, &mut down, one);
    let mut up_down = vec![C64::new(0.0, 0.0); dim];
    basis.apply_meson_create(&eta, &down, &mut up_down, one);
    (linalg::inner(&state.coeffs, &down_up, 1.0) - linalg::inner(&state.coeffs, &up_down, 1.0))
        .re
}

/// Caps from the expected per-sector quanta with Poisson-tail padding and a
/// dynamics margin on the meson side.
pub fn adequate_caps(nucleon_quanta: f64, meson_quanta: f64, dynamics_margin: u8) -> (u8, u8) {
    let spec_rule = |q: f64| (4.0 * q).ceil().max(1.0) as u8;
    let nuc = spec_rule(nucleon_quanta)
        .max(poisson_adequate_cap(nucleon_quanta, 5e-9))
        .saturating_add(1);
    let mes = spec_rule(meson_quanta)
        .max(poisson_adequate_cap(meson_quanta, 5e-9))
        .saturating_add(dynamics_margin);
    (nuc, mes)
}
