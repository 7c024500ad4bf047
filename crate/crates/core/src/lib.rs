//! Numerical workbench for the classical Schrödinger–Klein-Gordon system,
//! its scattering theory, the constrained Hartree ground-state problem, and
//! a truncated two-sector Fock-space quantization of the same model.
//!
//! The crate is organized around five layers:
//!
//! * [`model`] — physical constants, grids, spectral transforms, and the
//!   test-function dictionary used for weak pairings;
//! * [`skg`] — the coupled Schrödinger–Klein-Gordon flow, its conserved
//!   quantities, and stationary-equation residuals;
//! * [`scatter`] — wave-operator pairings by time quadrature, decay-exponent
//!   fits, and radiationless classification;
//! * [`hartree`] — the reduced single-field energy, SCF / projected-gradient
//!   minimizers, and field reconstruction;
//! * [`qyukawa`] — the truncated Fock-space Hamiltonian, Krylov propagation,
//!   finite-horizon proxies of asymptotic observables, and sweeps that compare
//!   quantum expectations against classical targets on an identical mode
//!   truncation.
//!
//! All position/momentum data use the unitary symmetric Fourier convention,
//! discretized on a periodic box; see [`fourier`] for the exact scaling.

pub mod eigen;
pub mod fourier;
pub mod hartree;
pub mod linalg;
pub mod model;
pub mod qyukawa;
pub mod rng;
pub mod scatter;
pub mod skg;

pub use num_complex::Complex64 as C64;
