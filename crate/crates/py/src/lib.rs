//! Python bindings: the main types and operations of the workbench exposed
//! as a compiled extension module. Complex grid data crosses the boundary as
//! parallel (re, im) float lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use skgw_core::hartree;
use skgw_core::model;
use skgw_core::qyukawa;
use skgw_core::rng::CounterRng;
use skgw_core::scatter;
use skgw_core::skg;
use skgw_core::C64;

fn to_complex(re: Vec<f64>, im: Vec<f64>) -> PyResult<Vec<C64>> {
    if re.len() != im.len() {
        return Err(PyValueError::new_err("re/im length mismatch"));
    }
    Ok(re.into_iter().zip(im).map(|(r, i)| C64::new(r, i)).collect())
}

fn split_complex(v: &[C64]) -> (Vec<f64>, Vec<f64>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Grid-backed model: parameters, samples, transforms, and the classical
/// operations.
#[pyclass]
struct Model {
    grid: model::GridPair,
}

#[pymethods]
impl Model {
    #[new]
    #[pyo3(signature = (box_half_length=16.0, grid_size=256, mass=1.0, c0=1.0, nu=1.0, cutoff_radius=2.0, cutoff_amplitude=1.0))]
    fn new(
        box_half_length: f64,
        grid_size: usize,
        mass: f64,
        c0: f64,
        nu: f64,
        cutoff_radius: f64,
        cutoff_amplitude: f64,
    ) -> PyResult<Self> {
        let params = model::ModelParams {
            dimension: 1,
            box_half_length,
            grid_size,
            mass,
            potential: model::PotentialSpec { c0, nu },
            cutoff: model::CutoffSpec { radius: cutoff_radius, amplitude: cutoff_amplitude },
        };
        let grid = model::build_grids(&params)
            .map_err(|errs| PyValueError::new_err(format!("{errs:?}")))?;
        Ok(Self { grid })
    }

    fn position_nodes(&self) -> Vec<f64> {
        self.grid.x.clone()
    }

    fn momentum_nodes(&self) -> Vec<f64> {
        self.grid.k.clone()
    }

    fn potential(&self) -> Vec<f64> {
        self.grid.potential.clone()
    }

    fn dispersion(&self) -> Vec<f64> {
        self.grid.omega.clone()
    }

    fn cutoff(&self) -> Vec<f64> {
        self.grid.chi.clone()
    }

    /// Unitary transform to momentum space.
    fn to_momentum(&self, re: Vec<f64>, im: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let f = to_complex(re, im)?;
        let hat = skgw_core::fourier::transform(
            &self.grid.transform,
            &f,
            skgw_core::fourier::Direction::ToMomentum,
        )
        .map_err(value_err)?;
        Ok(split_complex(&hat))
    }

    /// Unitary transform to position space.
    fn to_position(&self, re: Vec<f64>, im: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let f = to_complex(re, im)?;
        let pos = skgw_core::fourier::transform(
            &self.grid.transform,
            &f,
            skgw_core::fourier::Direction::ToPosition,
        )
        .map_err(value_err)?;
        Ok(split_complex(&pos))
    }

    /// Gaussian nucleon packet scaled to the given norm.
    fn gaussian_state(
        &self,
        center: f64,
        width: f64,
        norm: f64,
        momentum: f64,
    ) -> (Vec<f64>, Vec<f64>) {
        let u = skg::normalized_to(
            &self.grid,
            &skg::gaussian_packet(&self.grid, center, width, 1.0, momentum),
            norm,
        );
        split_complex(&u)
    }

    /// (total, free, interaction, mass) of a state.
    fn energy(
        &self,
        u_re: Vec<f64>,
        u_im: Vec<f64>,
        z_re: Vec<f64>,
        z_im: Vec<f64>,
    ) -> PyResult<(f64, f64, f64, f64)> {
        let state =
            skg::ClassicalState::new(to_complex(u_re, u_im)?, to_complex(z_re, z_im)?);
        let e = skg::energy(&self.grid, &state);
        Ok((e.total, e.free, e.interaction, e.mass))
    }

    /// Evolves a state, returning (t, mass, energy, energy0, boundary_mass)
    /// rows and the final state.
    #[pyo3(signature = (u_re, u_im, z_re, z_im, dt=1e-3, horizon=1.0, stride=100))]
    #[allow(clippy::too_many_arguments)]
    fn evolve(
        &self,
        u_re: Vec<f64>,
        u_im: Vec<f64>,
        z_re: Vec<f64>,
        z_im: Vec<f64>,
        dt: f64,
        horizon: f64,
        stride: usize,
    ) -> PyResult<(Vec<(f64, f64, f64, f64, f64)>, (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>))>
    {
        let state =
            skg::ClassicalState::new(to_complex(u_re, u_im)?, to_complex(z_re, z_im)?);
        let cfg = skg::FlowConfig { dt, horizon, stride, snapshot_stride: 0 };
        let traj = skg::evolve(&self.grid, state, &cfg).map_err(runtime_err)?;
        let rows = traj
            .samples
            .iter()
            .map(|s| (s.t, s.mass, s.energy, s.energy0, s.boundary_mass))
            .collect();
        let (ur, ui) = split_complex(&traj.final_state.u);
        let (zr, zi) = split_complex(&traj.final_state.z);
        Ok((rows, (ur, ui, zr, zi)))
    }

    /// Constrained minimization; returns a result object.
    #[pyo3(signature = (delta, method="scf", tol=1e-10, starts=1, seed=42))]
    fn minimize(
        &self,
        delta: f64,
        method: &str,
        tol: f64,
        starts: usize,
        seed: u64,
    ) -> PyResult<HartreeResultPy> {
        let opts = hartree::MinimizeOpts {
            method: if method == "pg" {
                hartree::Method::ProjectedGradient
            } else {
                hartree::Method::Scf
            },
            tol,
            max_iter: 400,
            damping: 0.5,
        };
        let result = if starts > 1 {
            let rng = CounterRng::new(seed);
            hartree::multistart_minimize(&self.grid, delta, starts, &opts, &rng)
        } else {
            let mut rng = CounterRng::new(seed);
            hartree::minimize(&self.grid, delta, hartree::Init::LowestEigenmode, &opts, &mut rng)
        }
        .map_err(runtime_err)?;
        Ok(HartreeResultPy { inner: result })
    }

    /// Weak pairing with the forward/backward wave operator for each
    /// dictionary element; returns (label, value, tail_bound) triples.
    #[pyo3(signature = (u_re, u_im, z_re, z_im, annulus=(1.0, 2.0), count=4, forward=true, horizon=40.0))]
    #[allow(clippy::too_many_arguments)]
    fn wave_operator_pairings(
        &self,
        u_re: Vec<f64>,
        u_im: Vec<f64>,
        z_re: Vec<f64>,
        z_im: Vec<f64>,
        annulus: (f64, f64),
        count: usize,
        forward: bool,
        horizon: f64,
    ) -> PyResult<Vec<(String, (f64, f64), f64)>> {
        let state =
            skg::ClassicalState::new(to_complex(u_re, u_im)?, to_complex(z_re, z_im)?);
        let dict = model::make_test_dictionary(&self.grid, annulus, count).map_err(value_err)?;
        let refs: Vec<&model::TestFunction> = dict.elements.iter().collect();
        let direction = if forward {
            scatter::Direction::Forward
        } else {
            scatter::Direction::Backward
        };
        let opts = scatter::ScatterOpts {
            initial_horizon: horizon,
            max_horizon: horizon,
            ..Default::default()
        };
        let pairings = scatter::pair_dictionary(&self.grid, &state, &refs, direction, &opts)
            .map_err(runtime_err)?;
        Ok(pairings
            .into_iter()
            .map(|p| (p.label.clone(), (p.value_re, p.value_im), p.tail_bound))
            .collect())
    }

    /// Radiationless verdict over a dictionary in both directions.
    #[pyo3(signature = (u_re, u_im, z_re, z_im, annulus=(1.0, 2.0), count=4, horizon=40.0, threshold=None))]
    #[allow(clippy::too_many_arguments)]
    fn is_radiationless(
        &self,
        u_re: Vec<f64>,
        u_im: Vec<f64>,
        z_re: Vec<f64>,
        z_im: Vec<f64>,
        annulus: (f64, f64),
        count: usize,
        horizon: f64,
        threshold: Option<f64>,
    ) -> PyResult<(bool, f64, f64)> {
        let state =
            skg::ClassicalState::new(to_complex(u_re, u_im)?, to_complex(z_re, z_im)?);
        let dict = model::make_test_dictionary(&self.grid, annulus, count).map_err(value_err)?;
        let refs: Vec<&model::TestFunction> = dict.elements.iter().collect();
        let opts = scatter::ScatterOpts {
            initial_horizon: horizon,
            max_horizon: horizon,
            ..Default::default()
        };
        let verdict = scatter::is_radiationless(
            &self.grid,
            &state,
            &refs,
            &[scatter::Direction::Forward, scatter::Direction::Backward],
            threshold,
            &opts,
        )
        .map_err(runtime_err)?;
        Ok((verdict.radiationless, verdict.max_pairing, verdict.threshold))
    }

    /// Sector ground-state energy of the truncated quantum model.
    #[pyo3(signature = (sector, hslash, d_u=3, meson_ks=vec![1.2, 1.6], meson_cap=4, seed=42))]
    fn quantum_ground_energy(
        &self,
        sector: u8,
        hslash: f64,
        d_u: usize,
        meson_ks: Vec<f64>,
        meson_cap: u8,
        seed: u64,
    ) -> PyResult<(f64, usize)> {
        let mut rng = CounterRng::new(seed);
        let spec = qyukawa::FockSpec::build(
            &self.grid,
            d_u,
            &meson_ks,
            qyukawa::NucleonSector::Fixed(sector),
            meson_cap,
            hslash,
            &mut rng,
        )
        .map_err(value_err)?;
        let basis = qyukawa::FockBasis::new(spec).map_err(value_err)?;
        let ops = qyukawa::build_hamiltonian(&basis, &mut rng).map_err(value_err)?;
        let gs = qyukawa::ground_state(&ops.h, &mut rng).map_err(runtime_err)?;
        Ok((gs.energy, basis.dim()))
    }
}

/// Minimization result with the reconstructed field.
#[pyclass]
struct HartreeResultPy {
    inner: hartree::HartreeResult,
}

#[pymethods]
impl HartreeResultPy {
    #[getter]
    fn e_delta(&self) -> f64 {
        self.inner.e_delta
    }

    #[getter]
    fn lambda_multiplier(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q
    }

    fn u0(&self) -> (Vec<f64>, Vec<f64>) {
        split_complex(&self.inner.u0)
    }

    fn z0(&self) -> (Vec<f64>, Vec<f64>) {
        split_complex(&self.inner.z0)
    }

    fn multi_start_max_distance(&self) -> Option<f64> {
        self.inner.multi_start.as_ref().map(|m| m.max_distance)
    }
}

#[pymodule]
fn skgw(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_class::<HartreeResultPy>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
