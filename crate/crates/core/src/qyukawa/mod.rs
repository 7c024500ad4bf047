//! Truncated Fock-space quantization of the particle-field model.
//!
//! The quantum layer shares its discretization with the classical one: the
//! nucleon one-particle space is spanned by the lowest eigenmodes of −Δ + V
//! on the grid and the meson space by selected momentum nodes inside the
//! cutoff support, so every quantum-versus-classical comparison runs on an
//! identical mode truncation.

pub mod asymptotic;
pub mod coherent;
pub mod fock;
pub mod krylov;
pub mod modes;
pub mod operators;
pub mod sweep;

pub use fock::{FockBasis, FockError, FockSpec, NucleonSector, QuantumState};
pub use operators::{build_hamiltonian, ground_state, Hamiltonians, SparseOperator};

use crate::C64;

/// Ψ(t) = e^{−i(t/ħ)H} Ψ by Krylov propagation; norm is preserved to the
/// propagator tolerance.
pub fn propagate(
    h: &SparseOperator,
    state: &QuantumState,
    t: f64,
    hslash: f64,
    opts: &krylov::KrylovOpts,
) -> Result<QuantumState, krylov::KrylovError> {
    let apply = |x: &[C64], y: &mut [C64]| h.apply(x, y);
    let coeffs = krylov::expm_apply(&apply, h.dim, &state.coeffs, t / hslash, opts)?;
    Ok(QuantumState { coeffs, normalized: state.normalized })
}

#[cfg(test)]
mod tests {
    use super::asymptotic::*;
    use super::coherent::*;
    use super::fock::*;
    use super::krylov::KrylovOpts;
    use super::modes::*;
    use super::operators::*;
    use super::propagate;
    use crate::linalg;
    use crate::model::{build_grids, CutoffSpec, ModelParams};
    use crate::rng::CounterRng;
    use crate::C64;

    fn setup(amplitude: f64, hslash: f64, nuc_cap: u8, mes_cap: u8) -> (FockBasis, Hamiltonians) {
        let grid = build_grids(&ModelParams {
            cutoff: CutoffSpec { radius: 2.0, amplitude },
            ..ModelParams::default()
        })
        .unwrap();
        let mut rng = CounterRng::new(333);
        let spec = FockSpec::build(
            &grid,
            3,
            &[1.2, 1.6],
            NucleonSector::Capped(nuc_cap),
            mes_cap,
            hslash,
            &mut rng,
        )
        .unwrap();
        let basis = FockBasis::new(spec).unwrap();
        let ops = build_hamiltonian(&basis, &mut rng).unwrap();
        (basis, ops)
    }

    #[test]
    fn free_propagation_is_pure_phase_on_number_states() {
        let (basis, ops) = setup(0.0, 0.5, 2, 2);
        let idx = basis.lookup(&[1, 0, 0], &[0, 1]).unwrap();
        let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
        coeffs[idx] = C64::new(1.0, 0.0);
        let state = QuantumState { coeffs, normalized: true };
        let t = 2.7;
        let out = propagate(&ops.h, &state, t, 0.5, &KrylovOpts::default()).unwrap();
        let expect = C64::from_polar(1.0, -t / 0.5 * ops.h0_diag[idx]);
        assert!((out.coeffs[idx] - expect).norm() < 1e-12);
        for (i, c) in out.coeffs.iter().enumerate() {
            if i != idx {
                assert!(c.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn propagation_preserves_norm_and_energy() {
        let (basis, ops) = setup(1.0, 0.5, 3, 3);
        let mut rng = CounterRng::new(347);
        let state = QuantumState::new_normalized(rng.complex_vector(basis.dim()));
        let e0 = ops.h.expectation(&state.coeffs).re;
        let out = propagate(&ops.h, &state, 3.0, 0.5, &KrylovOpts::default()).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-10);
        let e1 = ops.h.expectation(&out.coeffs).re;
        assert!((e1 - e0).abs() < 1e-9 * e0.abs().max(1.0), "energy drift {}", e1 - e0);
        let back = propagate(&ops.h, &out, -3.0, 0.5, &KrylovOpts::default()).unwrap();
        let mut diff = 0.0f64;
        for (a, b) in back.coeffs.iter().zip(&state.coeffs) {
            diff = diff.max((a - b).norm());
        }
        assert!(diff < 1e-9, "time reversal error {diff}");
    }

    #[test]
    fn decoupled_weyl_proxy_is_exact_coherent_formula() {
        let hs = 0.5;
        let (basis, ops) = setup(0.0, hs, 6, 6);
        let alpha_n = vec![C64::new(0.3, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let alpha_m = vec![C64::new(0.1, 0.05), C64::new(0.0, -0.08)];
        let (state, _) = coherent_state(&basis, &alpha_n, &alpha_m).unwrap();
        let xi = vec![C64::new(0.4, 0.0), C64::new(0.1, 0.2)];
        let opts = ProxyOpts { horizon: 5.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy = weyl_asymptotic(&basis, &ops, &state, &xi, true, &opts).unwrap();
        // integral term vanishes identically without coupling
        assert!((proxy.value() - C64::new(proxy.static_re, proxy.static_im)).norm() < 1e-12);
        let zeros = vec![C64::new(0.0, 0.0); 3];
        let expect = coherent_weyl_expectation(hs, &alpha_n, &alpha_m, &zeros, &xi);
        assert!(
            (proxy.value() - expect).norm() < 1e-6,
            "proxy {} vs formula {}",
            proxy.value(),
            expect
        );
    }

    #[test]
    fn vacuum_weyl_proxy_with_coupling_is_certified_near_formula() {
        let hs = 0.5;
        let (basis, ops) = setup(1.0, hs, 3, 4);
        let zeros_n = vec![C64::new(0.0, 0.0); 3];
        let zeros_m = vec![C64::new(0.0, 0.0); 2];
        let (vacuum, _) = coherent_state(&basis, &zeros_n, &zeros_m).unwrap();
        let xi = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.3)];
        let opts = ProxyOpts { horizon: 8.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy = weyl_asymptotic(&basis, &ops, &vacuum, &xi, true, &opts).unwrap();
        let norm_sq = linalg::norm_sq(&xi, 1.0);
        let expect = (-hs * norm_sq / 4.0).exp();
        assert!((C64::new(proxy.static_re, proxy.static_im)
            - C64::new(expect, 0.0))
        .norm()
            < 1e-8);
        // with coupling the vacuum radiates a little; the integral term is
        // small and certified
        let integral = (proxy.value() - C64::new(proxy.static_re, proxy.static_im)).norm();
        assert!(integral < 0.05, "vacuum integral too large: {integral}");
    }

    #[test]
    fn decoupled_field_proxy_is_classical_overlap() {
        let hs = 0.25;
        let (basis, ops) = setup(0.0, hs, 8, 6);
        let alpha_n = vec![C64::new(0.35, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let alpha_m = vec![C64::new(0.12, -0.03), C64::new(0.04, 0.06)];
        let (state, _) = coherent_state(&basis, &alpha_n, &alpha_m).unwrap();
        let xi = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.0)];
        let opts = ProxyOpts { horizon: 4.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy = field_asymptotic(&basis, &ops, &state, &xi, true, &opts).unwrap();
        let expect = 2.0 * linalg::inner(&xi, &alpha_m, 1.0).re;
        assert!(
            (proxy.value_re - expect).abs() < 1e-6 && proxy.value_im.abs() < 1e-10,
            "field proxy {} vs classical {expect}",
            proxy.value_re
        );
    }

    #[test]
    fn vacuum_field_proxy_vanishes() {
        let (basis, ops) = setup(1.0, 0.5, 3, 4);
        let zeros_n = vec![C64::new(0.0, 0.0); 3];
        let zeros_m = vec![C64::new(0.0, 0.0); 2];
        let (vacuum, _) = coherent_state(&basis, &zeros_n, &zeros_m).unwrap();
        let xi = vec![C64::new(0.5, 0.0), C64::new(0.2, 0.0)];
        let opts = ProxyOpts { horizon: 6.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy = field_asymptotic(&basis, &ops, &vacuum, &xi, true, &opts).unwrap();
        // ⟨φ⟩ = 0 on the vacuum and the integrand vanishes on the
        // nucleon-empty sector
        assert!(proxy.static_re.abs() < 1e-12);
        assert!(proxy.value_re.abs() < 1e-10, "vacuum field proxy {}", proxy.value_re);
    }

    #[test]
    fn correlation_routes_agree_and_reject_long_lists() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let mut rng = CounterRng::new(353);
        let spec = FockSpec::build(
            &grid,
            3,
            &[1.2, 1.6],
            NucleonSector::Fixed(1),
            4,
            0.25,
            &mut rng,
        )
        .unwrap();
        let basis = FockBasis::new(spec).unwrap();
        let ops = build_hamiltonian(&basis, &mut rng).unwrap();
        let alpha_n = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let alpha_m = vec![C64::new(0.03, 0.0), C64::new(0.0, 0.02)];
        let (state, _) = fixed_sector_coherent(&basis, &alpha_n, &alpha_m).unwrap();
        let xi1 = vec![C64::new(0.4, 0.0), C64::new(0.0, 0.0)];
        let xi2 = vec![C64::new(0.0, 0.0), C64::new(0.3, 0.1)];
        let opts = ProxyOpts { horizon: 6.0, checkpoint_dt: 0.02, ..Default::default() };
        let proxy = correlation_asymptotic(
            &basis,
            &ops,
            &state,
            &[xi1.clone(), xi2.clone()],
            true,
            &opts,
        )
        .unwrap();
        let gap = (proxy.value() - proxy.direct()).norm();
        assert!(gap < 1e-4, "two-route correlation gap {gap}");
        let too_long = vec![xi1.clone(), xi2.clone(), xi1.clone(), xi2];
        assert!(matches!(
            correlation_asymptotic(&basis, &ops, &state, &too_long, true, &opts),
            Err(ProxyError::ListTooLong(4))
        ));
    }

    #[test]
    fn single_field_correlation_vanishes_without_coupling() {
        let grid = build_grids(&ModelParams {
            cutoff: CutoffSpec { radius: 2.0, amplitude: 0.0 },
            ..ModelParams::default()
        })
        .unwrap();
        let mut rng = CounterRng::new(359);
        let spec = FockSpec::build(
            &grid,
            3,
            &[1.2, 1.6],
            NucleonSector::Fixed(1),
            2,
            0.5,
            &mut rng,
        )
        .unwrap();
        let basis = FockBasis::new(spec).unwrap();
        let ops = build_hamiltonian(&basis, &mut rng).unwrap();
        // one nucleon in the lowest mode, meson vacuum
        let idx = basis.lookup(&[1, 0, 0], &[0, 0]).unwrap();
        let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
        coeffs[idx] = C64::new(1.0, 0.0);
        let state = QuantumState { coeffs, normalized: true };
        let xi = vec![C64::new(0.4, 0.1), C64::new(0.0, 0.2)];
        let opts = ProxyOpts { horizon: 4.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy =
            correlation_asymptotic(&basis, &ops, &state, &[xi], true, &opts).unwrap();
        assert!(proxy.value().norm() < 1e-12, "free single-field correlation {}", proxy.value());
    }

    #[test]
    fn annihilator_proxy_vanishes_on_free_eigenstate() {
        let grid = build_grids(&ModelParams {
            cutoff: CutoffSpec { radius: 2.0, amplitude: 0.0 },
            ..ModelParams::default()
        })
        .unwrap();
        let mut rng = CounterRng::new(367);
        let spec = FockSpec::build(
            &grid,
            3,
            &[1.2, 1.6],
            NucleonSector::Fixed(1),
            2,
            0.5,
            &mut rng,
        )
        .unwrap();
        let basis = FockBasis::new(spec).unwrap();
        let idx = basis.lookup(&[1, 0, 0], &[0, 0]).unwrap();
        let mut coeffs = vec![C64::new(0.0, 0.0); basis.dim()];
        coeffs[idx] = C64::new(1.0, 0.0);
        let state = QuantumState { coeffs, normalized: true };
        let xi = vec![C64::new(0.5, 0.0), C64::new(0.3, 0.0)];
        let opts = ProxyOpts { horizon: 4.0, checkpoint_dt: 0.1, ..Default::default() };
        let proxy = annihilator_proxy(&basis, &state, &xi, &opts).unwrap();
        assert_eq!(proxy.max_norm, 0.0);
        assert_eq!(proxy.static_bound, 0.0);
    }

    #[test]
    fn interacting_ground_state_proxy_below_certificate() {
        let (basis, ops) = {
            let grid = build_grids(&ModelParams::default()).unwrap();
            let mut rng = CounterRng::new(373);
            let spec = FockSpec::build(
                &grid,
                3,
                &[1.2, 1.6],
                NucleonSector::Fixed(2),
                4,
                0.125,
                &mut rng,
            )
            .unwrap();
            let basis = FockBasis::new(spec).unwrap();
            let ops = build_hamiltonian(&basis, &mut rng).unwrap();
            (basis, ops)
        };
        let mut rng = CounterRng::new(379);
        let gs = ground_state(&ops.h, &mut rng).unwrap();
        let xi = vec![C64::new(0.6, 0.0), C64::new(0.0, 0.4)];
        let opts = ProxyOpts { horizon: 12.0, checkpoint_dt: 0.05, ..Default::default() };
        let proxy = annihilator_proxy(&basis, &gs.state, &xi, &opts).unwrap();
        assert!(
            proxy.max_norm <= proxy.certificate + 1e-12,
            "proxy {} vs certificate {}",
            proxy.max_norm,
            proxy.certificate
        );
        // the dressing content of the ground state is small on this scale
        assert!(proxy.static_bound < 0.1);
    }

    #[test]
    fn quantum_weyl_approaches_mode_classical_target() {
        // one halving of hslash must shrink the gap to the identically
        // truncated classical target
        let grid = build_grids(&ModelParams::default()).unwrap();
        let mut rng = CounterRng::new(383);
        let horizon = 6.0;
        let mut gaps = Vec::new();
        for &hs in &[0.5, 0.25] {
            let (nuc_cap, mes_cap) = adequate_caps(0.25 / hs, 0.02 / hs, 3);
            let spec = FockSpec::build(
                &grid,
                3,
                &[1.2, 1.6],
                NucleonSector::Capped(nuc_cap),
                mes_cap,
                hs,
                &mut rng,
            )
            .unwrap();
            let sys = ModeSystem::from_spec(&spec);
            let basis = FockBasis::new(spec).unwrap();
            let ops = build_hamiltonian(&basis, &mut rng).unwrap();
            let alpha_n = vec![C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
            let alpha_m = vec![C64::new(0.08, 0.0), C64::new(0.0, 0.05)];
            let (state, _) = coherent_state(&basis, &alpha_n, &alpha_m).unwrap();
            let xi = vec![C64::new(0.5, 0.0), C64::new(0.3, 0.0)];
            let opts = ProxyOpts { horizon, checkpoint_dt: 0.05, ..Default::default() };
            let proxy = weyl_asymptotic(&basis, &ops, &state, &xi, true, &opts).unwrap();
            let mode_state = ModeState { u: alpha_n.clone(), z: alpha_m.clone(), t: 0.0 };
            let pairing = mode_pairings(&sys, &mode_state, &[xi.clone()], horizon, 1e-3, true);
            let target = C64::from_polar(
                1.0,
                std::f64::consts::SQRT_2 * pairing[0].value.re,
            );
            gaps.push((proxy.value() - target).norm());
        }
        assert!(
            gaps[1] < gaps[0],
            "gap did not shrink with hslash: {:?}",
            gaps
        );
    }
}
