//! Physical model and discretization: confining potential, relativistic
//! dispersion, compactly supported momentum cutoff, periodic grids, and the
//! test-function dictionary used for weak pairings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fourier::Transform;
use crate::linalg;
use crate::C64;

/// Confining potential V(x) = c₀ (1 + x²)^{(1+ν)/2}.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub c0: f64,
    pub nu: f64,
}

impl Default for PotentialSpec {
    fn default() -> Self {
        Self { c0: 1.0, nu: 1.0 }
    }
}

impl PotentialSpec {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0 * (1.0 + x * x).powf(0.5 * (1.0 + self.nu))
    }
}

/// Smooth compactly supported momentum cutoff
/// χ(k) = amplitude · exp(1 + 1/((k/K)² − 1)) for |k| < K, zero otherwise,
/// normalized so χ(0) = amplitude.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CutoffSpec {
    /// Support radius K.
    pub radius: f64,
    /// Peak value χ(0).
    pub amplitude: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        Self { radius: 2.0, amplitude: 1.0 }
    }
}

impl CutoffSpec {
    pub fn eval(&self, k: f64) -> f64 {
        bump(k / self.radius) * self.amplitude
    }

    pub fn is_off(&self) -> bool {
        self.amplitude == 0.0
    }
}

/// Standard bump profile: exp(1 + 1/(t² − 1)) on |t| < 1, peak value 1 at 0.
pub fn bump(t: f64) -> f64 {
    if t.abs() < 1.0 {
        (1.0 + 1.0 / (t * t - 1.0)).exp()
    } else {
        0.0
    }
}

/// Physical and discretization constants. The Fourier convention is fixed
/// globally as unitary symmetric (see [`crate::fourier`]).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    pub dimension: usize,
    pub box_half_length: f64,
    pub grid_size: usize,
    pub mass: f64,
    pub potential: PotentialSpec,
    pub cutoff: CutoffSpec,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            dimension: 1,
            box_half_length: 16.0,
            grid_size: 256,
            mass: 1.0,
            potential: PotentialSpec::default(),
            cutoff: CutoffSpec::default(),
        }
    }
}

impl ModelParams {
    pub fn omega(&self, k: f64) -> f64 {
        (k * k + self.mass * self.mass).sqrt()
    }

    /// Largest resolvable momentum πN/(2L).
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.grid_size as f64 / (2.0 * self.box_half_length)
    }

    /// Collects every violated constraint rather than the first.
    pub fn validate(&self) -> Result<(), Vec<ModelError>> {
        let mut errs = Vec::new();
        if self.dimension != 1 {
            errs.push(ModelError::UnsupportedDimension(self.dimension));
        }
        if !self.grid_size.is_power_of_two() || self.grid_size < 8 {
            errs.push(ModelError::GridSizeNotPowerOfTwo(self.grid_size));
        }
        if self.box_half_length <= 0.0 {
            errs.push(ModelError::NonPositive("box_half_length"));
        }
        if self.mass <= 0.0 {
            errs.push(ModelError::NonPositive("mass"));
        }
        if self.potential.c0 <= 0.0 {
            errs.push(ModelError::NonPositive("potential.c0"));
        }
        if self.potential.nu <= 0.0 {
            errs.push(ModelError::NonPositive("potential.nu"));
        }
        if self.cutoff.radius <= 0.0 {
            errs.push(ModelError::NonPositive("cutoff.radius"));
        }
        if self.cutoff.amplitude < 0.0 {
            errs.push(ModelError::NonPositive("cutoff.amplitude"));
        }
        if self.cutoff.radius >= self.nyquist() {
            errs.push(ModelError::CutoffExceedsNyquist {
                radius: self.cutoff.radius,
                nyquist: self.nyquist(),
            });
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("cutoff radius {radius} does not fit strictly inside the resolvable band {nyquist}")]
    CutoffExceedsNyquist { radius: f64, nyquist: f64 },
    #[error("grid size {0} is not a power of two (or too small)")]
    GridSizeNotPowerOfTwo(usize),
    #[error("parameter {0} must be positive")]
    NonPositive(&'static str),
    #[error("only dimension 1 is executable (got {0})")]
    UnsupportedDimension(usize),
    #[error("field length {got} does not match grid size {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("annulus inner radius must be positive")]
    InvalidAnnulus,
}

/// Position/momentum grids with precomputed samples of ω, V, χ and the
/// spectral transform. Immutable after construction and shareable across
/// threads.
#[derive(Debug)]
pub struct GridPair {
    pub params: ModelParams,
    /// Position nodes −L + iΔx.
    pub x: Vec<f64>,
    /// Momentum nodes πj/L in monotone order, j = −N/2 … N/2−1.
    pub k: Vec<f64>,
    pub dx: f64,
    pub dk: f64,
    pub omega: Vec<f64>,
    pub potential: Vec<f64>,
    pub chi: Vec<f64>,
    pub transform: Transform,
}

impl GridPair {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// ω^{-1/2}(k) χ(k), the momentum profile of the form factor.
    pub fn coupling_profile(&self) -> Vec<f64> {
        self.omega
            .iter()
            .zip(&self.chi)
            .map(|(w, c)| c / w.sqrt())
            .collect()
    }

    /// ‖f‖₂ with position-quadrature weight.
    pub fn norm_x(&self, f: &[C64]) -> f64 {
        linalg::norm(f, self.dx)
    }

    /// ‖f‖₂ with momentum-quadrature weight.
    pub fn norm_k(&self, f: &[C64]) -> f64 {
        linalg::norm(f, self.dk)
    }

    pub fn inner_x(&self, a: &[C64], b: &[C64]) -> C64 {
        linalg::inner(a, b, self.dx)
    }

    pub fn inner_k(&self, a: &[C64], b: &[C64]) -> C64 {
        linalg::inner(a, b, self.dk)
    }

    /// Index of the momentum node closest to `k`.
    pub fn nearest_k_index(&self, k: f64) -> usize {
        let p = ((k / self.dk) + (self.len() / 2) as f64).round();
        (p.max(0.0) as usize).min(self.len() - 1)
    }
}

/// Builds the grids and verifies their invariants.
pub fn build_grids(params: &ModelParams) -> Result<GridPair, Vec<ModelError>> {
    params.validate()?;
    let n = params.grid_size;
    let l = params.box_half_length;
    let dx = 2.0 * l / n as f64;
    let dk = std::f64::consts::PI / l;
    let x: Vec<f64> = (0..n).map(|i| -l + i as f64 * dx).collect();
    let k: Vec<f64> = (0..n).map(|p| (p as i64 - (n / 2) as i64) as f64 * dk).collect();
    let omega: Vec<f64> = k.iter().map(|&kj| params.omega(kj)).collect();
    let potential: Vec<f64> = x.iter().map(|&xi| params.potential.eval(xi)).collect();
    let chi: Vec<f64> = k.iter().map(|&kj| params.cutoff.eval(kj)).collect();

    debug_assert!(omega.iter().all(|&w| w >= params.mass));
    debug_assert!(chi
        .iter()
        .zip(&k)
        .all(|(&c, &kj)| c == 0.0 || kj.abs() < params.cutoff.radius));

    Ok(GridPair {
        params: params.clone(),
        x,
        k,
        dx,
        dk,
        omega,
        potential,
        chi,
        transform: Transform::new(l, n),
    })
}

/// ⟨η, λ_x⟩ = ∫ conj(η)(k) e^{ikx} ω^{-1/2}(k) χ(k) dk by grid quadrature.
pub fn form_factor_pairing(grid: &GridPair, eta: &[C64], x: f64) -> Result<C64, ModelError> {
    if eta.len() != grid.len() {
        return Err(ModelError::SizeMismatch {
            expected: grid.len(),
            got: eta.len(),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..grid.len() {
        if grid.chi[j] == 0.0 {
            continue;
        }
        let phase = C64::from_polar(1.0, grid.k[j] * x);
        acc += eta[j].conj() * phase * (grid.chi[j] / grid.omega[j].sqrt());
    }
    Ok(acc * grid.dk)
}

/// One labeled momentum-space test function, supported away from k = 0.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub label: String,
    pub samples: Vec<C64>,
    /// Declared support annulus (inner, outer) in |k|.
    pub annulus: (f64, f64),
}

/// Dictionary of L²-normalized bump translates on a momentum annulus.
#[derive(Debug, Clone)]
pub struct TestDictionary {
    pub elements: Vec<TestFunction>,
    pub annulus: (f64, f64),
}

impl TestDictionary {
    /// Rank of the Gram matrix at relative eigenvalue threshold 1e-10.
    pub fn gram_rank(&self, grid: &GridPair) -> usize {
        let n = self.elements.len();
        let mut gram = vec![C64::new(0.0, 0.0); n * n];
        for p in 0..n {
            for q in 0..n {
                gram[p * n + q] = grid.inner_k(&self.elements[p].samples, &self.elements[q].samples);
            }
        }
        let ev = linalg::eigh_small(&gram, n);
        let max = ev.iter().cloned().fold(0.0, f64::max);
        ev.iter().filter(|&&e| e > 1e-10 * max.max(1e-300)).count()
    }
}

/// Builds `count` even bump translates with supports tiling [r_in, r_out]
/// symmetrically in |k|, each normalized to ‖ξ‖₂ = 1.
pub fn make_test_dictionary(
    grid: &GridPair,
    annulus: (f64, f64),
    count: usize,
) -> Result<TestDictionary, ModelError> {
    let (r_in, r_out) = annulus;
    if r_in <= 0.0 || r_out <= r_in || count == 0 {
        return Err(ModelError::InvalidAnnulus);
    }
    let spacing = (r_out - r_in) / (count + 1) as f64;
    let mut elements = Vec::with_capacity(count);
    for q in 0..count {
        let center = r_in + (q + 1) as f64 * spacing;
        let mut samples: Vec<C64> = grid
            .k
            .iter()
            .map(|&kj| C64::new(bump((kj.abs() - center) / spacing), 0.0))
            .collect();
        let nrm = grid.norm_k(&samples);
        if nrm == 0.0 {
            return Err(ModelError::InvalidAnnulus);
        }
        linalg::scale(&mut samples, 1.0 / nrm);
        elements.push(TestFunction {
            label: format!("xi{:02}@{:.3}", q, center),
            samples,
            annulus: (center - spacing, center + spacing),
        });
    }
    Ok(TestDictionary { elements, annulus })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_params_validate() {
        assert!(ModelParams::default().validate().is_ok());
    }

    #[test]
    fn dispersion_identities() {
        let params = ModelParams::default();
        let grid = build_grids(&params).unwrap();
        // ω(0) = m at the k = 0 node
        let zero = grid.nearest_k_index(0.0);
        assert_eq!(grid.k[zero], 0.0);
        assert!((grid.omega[zero] - 1.0).abs() < 1e-15);
        // 3-4-5 identity in the dispersion function
        let p4 = ModelParams { mass: 4.0, ..ModelParams::default() };
        assert!((p4.omega(3.0) - 5.0).abs() < 1e-15);
        // V(0) = c0 for the default exponent
        assert!((params.potential.eval(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_bounded_below_by_mass() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        assert!(grid.omega.iter().all(|&w| w >= grid.params.mass));
    }

    #[test]
    fn potential_growth_bound_holds_with_equality() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let p = &grid.params.potential;
        for (&xi, &vi) in grid.x.iter().zip(&grid.potential) {
            let lower = p.c0 * (1.0 + xi * xi).powf(0.5 * (1.0 + p.nu));
            assert!(vi >= lower - 1e-14 * lower.abs());
        }
    }

    #[test]
    fn chi_vanishes_outside_support_and_is_even() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let n = grid.len();
        for j in 0..n {
            if grid.k[j].abs() >= grid.params.cutoff.radius {
                assert_eq!(grid.chi[j], 0.0);
            }
        }
        for j in 1..n / 2 {
            let plus = grid.chi[n / 2 + j];
            let minus = grid.chi[n / 2 - j];
            assert!((plus - minus).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_cutoff_beyond_nyquist() {
        let params = ModelParams {
            cutoff: CutoffSpec { radius: 30.0, amplitude: 1.0 },
            ..ModelParams::default()
        };
        let errs = params.validate().unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ModelError::CutoffExceedsNyquist { .. })));
    }

    #[test]
    fn rejects_non_power_of_two_grid() {
        let params = ModelParams { grid_size: 200, ..ModelParams::default() };
        let errs = params.validate().unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, ModelError::GridSizeNotPowerOfTwo(200))));
    }

    #[test]
    fn form_factor_disjoint_support_vanishes() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        // η supported where χ = 0
        let eta: Vec<C64> = grid
            .k
            .iter()
            .map(|&kj| {
                if kj.abs() > 3.0 && kj.abs() < 5.0 {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let v = form_factor_pairing(&grid, &eta, 0.3).unwrap();
        assert_eq!(v, C64::new(0.0, 0.0));
    }

    #[test]
    fn form_factor_self_pairing_gives_norm_squared() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let eta: Vec<C64> = grid
            .coupling_profile()
            .iter()
            .map(|&g| C64::new(g, 0.0))
            .collect();
        let v = form_factor_pairing(&grid, &eta, 0.0).unwrap();
        let expect = linalg::norm_sq(&eta, grid.dk);
        assert!((v.re - expect).abs() < 1e-12 * expect);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn form_factor_matches_refined_quadrature() {
        // the cutoff's edge derivatives demand the scattering-scale Δk for
        // quadrature at the 1e-8 level
        let grid = build_grids(&ModelParams {
            box_half_length: 128.0,
            grid_size: 2048,
            ..ModelParams::default()
        })
        .unwrap();
        let params = &grid.params;
        // smooth profile with an explicit closed form so it can be resampled
        let eta_fn = |k: f64| C64::new((-0.5 * (k - 0.8) * (k - 0.8)).exp(), 0.1 * k);
        let eta: Vec<C64> = grid.k.iter().map(|&kj| eta_fn(kj)).collect();
        let x0 = 0.7;
        let coarse = form_factor_pairing(&grid, &eta, x0).unwrap();
        // 10x refined Riemann sum over the same band
        let refine = 10;
        let nf = grid.len() * refine;
        let dkf = grid.dk / refine as f64;
        let mut fine = C64::new(0.0, 0.0);
        for p in 0..nf {
            let k = (p as i64 - (nf / 2) as i64) as f64 * dkf;
            let chi = params.cutoff.eval(k);
            if chi == 0.0 {
                continue;
            }
            fine += eta_fn(k).conj()
                * C64::from_polar(1.0, k * x0)
                * (chi / params.omega(k).sqrt());
        }
        fine *= dkf;
        assert!(
            (coarse - fine).norm() < 1e-8,
            "coarse {coarse} vs fine {fine}"
        );
    }

    #[test]
    fn form_factor_stable_under_grid_refinement() {
        let eta_fn = |k: f64| C64::new((-0.4 * k * k).exp(), 0.2 * (-k * k).exp());
        let value = |l: f64, n: usize| {
            let grid = build_grids(&ModelParams {
                box_half_length: l,
                grid_size: n,
                ..ModelParams::default()
            })
            .unwrap();
            let eta: Vec<C64> = grid.k.iter().map(|&kj| eta_fn(kj)).collect();
            form_factor_pairing(&grid, &eta, 0.7).unwrap()
        };
        let a = value(64.0, 1024);
        let b = value(128.0, 2048);
        assert!((a - b).norm() < 1e-6, "refinement jump {}", (a - b).norm());
    }

    #[test]
    fn dictionary_normalized_and_supported() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        let dict = make_test_dictionary(&grid, (1.0, 2.0), 1).unwrap();
        let xi = &dict.elements[0];
        assert!((grid.norm_k(&xi.samples) - 1.0).abs() < 1e-12);
        // even and vanishing inside the inner radius
        let n = grid.len();
        for j in 0..n {
            if grid.k[j].abs() <= 1.0 {
                assert_eq!(xi.samples[j], C64::new(0.0, 0.0));
            }
            if j >= 1 && j < n && n / 2 + j < n && n / 2 >= j {
                let plus = xi.samples[n / 2 + j];
                let minus = xi.samples[n / 2 - j];
                assert!((plus - minus).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dictionary_rank_is_full() {
        // a finer momentum grid so eight bumps resolve
        let params = ModelParams {
            box_half_length: 64.0,
            grid_size: 1024,
            ..ModelParams::default()
        };
        let grid = build_grids(&params).unwrap();
        let dict = make_test_dictionary(&grid, (1.0, 2.0), 8).unwrap();
        assert_eq!(dict.elements.len(), 8);
        assert_eq!(dict.gram_rank(&grid), 8);
    }

    #[test]
    fn dictionary_rejects_bad_annulus() {
        let grid = build_grids(&ModelParams::default()).unwrap();
        assert!(make_test_dictionary(&grid, (0.0, 2.0), 4).is_err());
        assert!(make_test_dictionary(&grid, (2.0, 1.0), 4).is_err());
    }
}
