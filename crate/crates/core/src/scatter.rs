//! Wave-operator pairings, dispersive-decay diagnostics, and radiationless
//! classification.
//!
//! The forward/backward wave operators are exposed only through weak pairings
//! with test functions supported away from k = 0:
//!
//! ```text
//! ⟨ξ, Λ±(u₀,z₀)⟩ = ⟨ξ, z₀⟩ − i ∫₀^{±T} ⟨ξ, e^{iτω} F(τ)⟩ dτ + tail,
//! ```
//!
//! accumulated by trapezoid quadrature along a single recorded trajectory
//! (every dictionary element shares the same flow). The tail is certified by
//! fitting the integrand magnitude against the C τ^{−(1+ν)} envelope over the
//! trailing half of the horizon; the horizon doubles until the certified tail
//! is below tolerance. A pointwise-in-k strong representative only exists as
//! a Cesàro average and is provided as a diagnostic.

use serde::Serialize;
use thiserror::Error;

use crate::linalg;
use crate::model::{GridPair, TestFunction};
use crate::skg::{ClassicalState, FlowError, Stepper};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(&self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Direction::Forward => "+",
            Direction::Backward => "-",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScatterOpts {
    /// Magnitude of the time step; the direction fixes its sign.
    pub dt: f64,
    /// First horizon checked; doubled until the tail certificate passes.
    pub initial_horizon: f64,
    pub max_horizon: f64,
    /// Target for the certified tail bound.
    pub tol: f64,
    /// Integrand profile recording stride (in steps).
    pub profile_stride: usize,
}

impl Default for ScatterOpts {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            initial_horizon: 10.0,
            max_horizon: 160.0,
            tol: 1e-6,
            profile_stride: 20,
        }
    }
}

/// One weak pairing with its error certificate.
#[derive(Debug, Clone, Serialize)]
pub struct WaveOperatorPairing {
    pub label: String,
    pub direction: Direction,
    pub value_re: f64,
    pub value_im: f64,
    pub horizon: f64,
    /// C_fit · T^{−ν}/ν from the fitted envelope.
    pub tail_bound: f64,
    /// Free-exponent fit of the integrand decay (+∞ when the integrand is
    /// numerically zero).
    pub fitted_exponent: f64,
    /// |P(T) − P(T/2)|.
    pub cauchy_gap: f64,
    /// Direct proxy ⟨ξ, e^{iTω} z(T)⟩ at the final horizon.
    pub proxy_re: f64,
    pub proxy_im: f64,
}

impl WaveOperatorPairing {
    pub fn value(&self) -> C64 {
        C64::new(self.value_re, self.value_im)
    }

    pub fn proxy(&self) -> C64 {
        C64::new(self.proxy_re, self.proxy_im)
    }
}

/// Sampled integrand magnitude profile with its power-law fit.
#[derive(Debug, Clone, Serialize)]
pub struct DecayProfile {
    pub tau: Vec<f64>,
    pub magnitude: Vec<f64>,
    pub fitted_exponent: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiationlessVerdict {
    pub max_pairing: f64,
    pub threshold: f64,
    pub radiationless: bool,
    pub pairings: Vec<WaveOperatorPairing>,
}

#[derive(Debug, Error)]
pub enum ScatterError {
    #[error("integrand for {label} decays with exponent {exponent}, below the dispersive floor {floor}")]
    DispersiveDecayViolation {
        label: String,
        exponent: f64,
        floor: f64,
        profile: DecayProfile,
    },
    #[error("flow failure: {0}")]
    Flow(#[from] FlowError),
    #[error("invalid scattering input: {0}")]
    BadInput(&'static str),
}

struct XiAccumulator {
    label: String,
    /// Indices where ξ is nonzero, with conj(ξ) · Δk prefolded.
    support: Vec<(usize, C64)>,
    base: C64,
    integral: C64,
    g_prev: C64,
    profile_t: Vec<f64>,
    profile_g: Vec<f64>,
    /// P(T) at each doubling checkpoint.
    checkpoints: Vec<(f64, C64)>,
}

impl XiAccumulator {
    fn new(grid: &GridPair, xi: &TestFunction, z0: &[C64]) -> Self {
        let support: Vec<(usize, C64)> = xi
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.norm_sqr() > 0.0)
            .map(|(j, s)| (j, s.conj() * grid.dk))
            .collect();
        let base = linalg::inner(&xi.samples, z0, grid.dk);
        Self {
            label: xi.label.clone(),
            support,
            base,
            integral: C64::new(0.0, 0.0),
            g_prev: C64::new(0.0, 0.0),
            profile_t: Vec::new(),
            profile_g: Vec::new(),
            checkpoints: Vec::new(),
        }
    }

    fn integrand(&self, phase: &[C64], source: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &(j, w) in &self.support {
            acc += w * phase[j] * source[j];
        }
        acc
    }

    fn value(&self) -> C64 {
        self.base - C64::i() * self.integral
    }
}

/// Shared trajectory engine: one flow, many pairings.
struct CookEngine<'g> {
    grid: &'g GridPair,
    stepper: Stepper<'g>,
    /// e^{i t ω} at the current time, refreshed periodically.
    phase: Vec<C64>,
    phase_step: Vec<C64>,
    steps: usize,
    accums: Vec<XiAccumulator>,
    profile_stride: usize,
}

impl<'g> CookEngine<'g> {
    fn new(
        grid: &'g GridPair,
        state0: &ClassicalState,
        dict: &[&TestFunction],
        direction: Direction,
        opts: &ScatterOpts,
    ) -> Result<Self, ScatterError> {
        if opts.dt <= 0.0 {
            return Err(ScatterError::BadInput("dt must be positive"));
        }
        let dt = opts.dt * direction.sign();
        let mut state = state0.clone();
        state.t = 0.0;
        let stepper = Stepper::new(grid, state, dt)?;
        let accums: Vec<XiAccumulator> = dict
            .iter()
            .map(|xi| XiAccumulator::new(grid, xi, &state0.z))
            .collect();
        let phase = vec![C64::new(1.0, 0.0); grid.len()];
        let phase_step: Vec<C64> = grid
            .omega
            .iter()
            .map(|&w| C64::from_polar(1.0, dt * w))
            .collect();
        let mut engine = Self {
            grid,
            stepper,
            phase,
            phase_step,
            steps: 0,
            accums,
            profile_stride: opts.profile_stride.max(1),
        };
        engine.record_initial();
        Ok(engine)
    }

    fn record_initial(&mut self) {
        let source = self.stepper.boundary_source().to_vec();
        for acc in &mut self.accums {
            let g = acc.integrand(&self.phase, &source);
            acc.g_prev = g;
            acc.profile_t.push(0.0);
            acc.profile_g.push(g.norm());
        }
    }

    fn refresh_phase(&mut self) {
        let t = self.stepper.state.t;
        for (p, &w) in self.phase.iter_mut().zip(&self.grid.omega) {
            *p = C64::from_polar(1.0, t * w);
        }
    }

    fn advance_to(&mut self, horizon: f64) -> Result<(), ScatterError> {
        let dt = self.stepper.dt;
        while (self.stepper.state.t + dt).abs() <= horizon + 0.25 * dt.abs() {
            self.stepper.step()?;
            self.stepper.check_boundary();
            self.steps += 1;
            if self.steps % 1024 == 0 {
                self.refresh_phase();
            } else {
                for (p, s) in self.phase.iter_mut().zip(&self.phase_step) {
                    *p *= s;
                }
            }
            let record = self.steps % self.profile_stride == 0;
            let t = self.stepper.state.t;
            let source = self.stepper.boundary_source().to_vec();
            for acc in &mut self.accums {
                let g = acc.integrand(&self.phase, &source);
                acc.integral += 0.5 * dt * (acc.g_prev + g);
                acc.g_prev = g;
                if record {
                    acc.profile_t.push(t.abs());
                    acc.profile_g.push(g.norm());
                }
            }
        }
        Ok(())
    }

    fn checkpoint(&mut self) {
        let t = self.stepper.state.t.abs();
        for acc in &mut self.accums {
            let v = acc.value();
            acc.checkpoints.push((t, v));
        }
    }

    fn proxy(&self, acc: &XiAccumulator) -> C64 {
        let mut out = C64::new(0.0, 0.0);
        for &(j, w) in &acc.support {
            out += w * self.phase[j] * self.stepper.state.z[j];
        }
        out
    }
}

/// Envelope fit over the window [t_min, t_max]: returns (free exponent,
/// fixed-exponent prefactor C with |g| ≤ C τ^{−(1+ν)} in the least-squares
/// sense). The integrand oscillates under its decay envelope, so both fits
/// use block maxima rather than raw samples. All-zero profiles return
/// (+∞, 0).
pub(crate) fn fit_power_envelope(
    tau: &[f64],
    g: &[f64],
    t_min: f64,
    t_max: f64,
    nu: f64,
) -> (f64, f64) {
    let peak = g.iter().cloned().fold(0.0, f64::max);
    if peak <= 0.0 {
        return (f64::INFINITY, 0.0);
    }
    let floor = peak * 1e-13;
    let in_window: Vec<(f64, f64)> = tau
        .iter()
        .zip(g)
        .filter(|(&t, _)| t >= t_min && t <= t_max && t > 0.0)
        .map(|(&t, &v)| (t, v))
        .collect();
    if in_window.is_empty() {
        return (f64::INFINITY, 0.0);
    }
    let blocks = 12usize.min(in_window.len());
    let per_block = in_window.len() / blocks;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * per_block;
        let hi = if b + 1 == blocks { in_window.len() } else { lo + per_block };
        if let Some(&(t, v)) = in_window[lo..hi]
            .iter()
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        {
            if v > floor {
                pts.push((t.ln(), v.ln()));
            }
        }
    }
    if pts.len() < 4 {
        // decayed to numerical zero inside the window
        return (f64::INFINITY, 0.0);
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let exponent = -slope;
    let log_c = pts
        .iter()
        .map(|&(lx, ly)| ly + (1.0 + nu) * lx)
        .sum::<f64>()
        / n;
    (exponent, log_c.exp())
}

fn build_pairing(
    engine: &CookEngine<'_>,
    acc: &XiAccumulator,
    direction: Direction,
    nu: f64,
) -> WaveOperatorPairing {
    let horizon = engine.stepper.state.t.abs();
    let (exponent, prefactor) =
        fit_power_envelope(&acc.profile_t, &acc.profile_g, 0.5 * horizon, horizon, nu);
    let tail_bound = if exponent.is_finite() {
        prefactor * horizon.powf(-nu) / nu
    } else {
        0.0
    };
    let value = acc.value();
    let half = acc
        .checkpoints
        .iter()
        .rev()
        .find(|(t, _)| *t <= 0.5 * horizon + 1e-9)
        .map(|(_, v)| *v);
    let cauchy_gap = half.map(|v| (value - v).norm()).unwrap_or(f64::NAN);
    let proxy = engine.proxy(acc);
    WaveOperatorPairing {
        label: acc.label.clone(),
        direction,
        value_re: value.re,
        value_im: value.im,
        horizon,
        tail_bound,
        fitted_exponent: exponent,
        cauchy_gap,
        proxy_re: proxy.re,
        proxy_im: proxy.im,
    }
}

/// Pairs every dictionary element against Λ± of one initial state along a
/// single trajectory, doubling the horizon until each certified tail falls
/// below tolerance (or the horizon cap is reached).
pub fn pair_dictionary(
    grid: &GridPair,
    state0: &ClassicalState,
    dict: &[&TestFunction],
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<Vec<WaveOperatorPairing>, ScatterError> {
    let nu = grid.params.potential.nu;
    let mut engine = CookEngine::new(grid, state0, dict, direction, opts)?;
    let mut horizon = opts.initial_horizon;
    loop {
        engine.advance_to(horizon)?;
        engine.checkpoint();
        let done = engine.accums.iter().all(|acc| {
            let (exp, pref) =
                fit_power_envelope(&acc.profile_t, &acc.profile_g, 0.5 * horizon, horizon, nu);
            let tail = if exp.is_finite() { pref * horizon.powf(-nu) / nu } else { 0.0 };
            tail < opts.tol
        });
        if done || 2.0 * horizon > opts.max_horizon {
            break;
        }
        horizon *= 2.0;
    }
    let pairings: Vec<WaveOperatorPairing> = engine
        .accums
        .iter()
        .map(|acc| build_pairing(&engine, acc, direction, nu))
        .collect();
    // Deliberate hypothesis violations surface as non-decaying integrands.
    // Short runs never trigger this (the fit window must reach the
    // asymptotic regime), and neither do integrands that already fell to
    // the integrator noise floor: the floor is a property of the run, so an
    // envelope several orders below the loudest dictionary element is
    // convergence noise, not missing dispersion.
    let dictionary_peak = engine
        .accums
        .iter()
        .flat_map(|a| a.profile_g.iter().cloned())
        .fold(0.0, f64::max);
    for (p, acc) in pairings.iter().zip(&engine.accums) {
        let floor = 1.0 + 0.5 * nu;
        let window_reached = p.horizon + 2.0 * opts.dt >= 40.0;
        let window_peak = acc
            .profile_t
            .iter()
            .zip(&acc.profile_g)
            .filter(|(&t, _)| t >= 0.5 * p.horizon)
            .map(|(_, &g)| g)
            .fold(0.0, f64::max);
        let signal_alive = window_peak > 1e-4 * dictionary_peak;
        if window_reached && signal_alive && p.fitted_exponent < floor && p.tail_bound > opts.tol {
            return Err(ScatterError::DispersiveDecayViolation {
                label: p.label.clone(),
                exponent: p.fitted_exponent,
                floor,
                profile: DecayProfile {
                    tau: acc.profile_t.clone(),
                    magnitude: acc.profile_g.clone(),
                    fitted_exponent: p.fitted_exponent,
                    prefactor: 0.0,
                },
            });
        }
    }
    Ok(pairings)
}

/// Single-element convenience wrapper around [`pair_dictionary`].
pub fn pair_wave_operator(
    grid: &GridPair,
    state0: &ClassicalState,
    xi: &TestFunction,
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<WaveOperatorPairing, ScatterError> {
    let mut v = pair_dictionary(grid, state0, &[xi], direction, opts)?;
    Ok(v.remove(0))
}

/// Integrand magnitude profile g(τ) = |⟨ξ_τ, F(τ)⟩| to a fixed horizon with
/// its log-log fit over the trailing window [T/4, T]. No decay-violation
/// check: the profile itself is the diagnostic.
pub fn decay_profile(
    grid: &GridPair,
    state0: &ClassicalState,
    xi: &TestFunction,
    horizon: f64,
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<DecayProfile, ScatterError> {
    decay_profiles(grid, state0, &[xi], horizon, (0.25 * horizon, horizon), direction, opts)
        .map(|mut v| v.remove(0))
}

/// Batch variant of [`decay_profile`] with an explicit fit window; all
/// profiles share one trajectory.
pub fn decay_profiles(
    grid: &GridPair,
    state0: &ClassicalState,
    dict: &[&TestFunction],
    horizon: f64,
    fit_window: (f64, f64),
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<Vec<DecayProfile>, ScatterError> {
    if horizon < 20.0 {
        return Err(ScatterError::BadInput("decay fits need horizon >= 20"));
    }
    let nu = grid.params.potential.nu;
    let mut engine = CookEngine::new(grid, state0, dict, direction, opts)?;
    engine.advance_to(horizon)?;
    Ok(engine
        .accums
        .iter()
        .map(|acc| {
            let (exponent, prefactor) =
                fit_power_envelope(&acc.profile_t, &acc.profile_g, fit_window.0, fit_window.1, nu);
            DecayProfile {
                tau: acc.profile_t.clone(),
                magnitude: acc.profile_g.clone(),
                fitted_exponent: exponent,
                prefactor,
            }
        })
        .collect())
}

/// e^{-itω} ξ as a derived test function (support unchanged).
pub fn twisted_test_function(grid: &GridPair, xi: &TestFunction, t: f64) -> TestFunction {
    let samples: Vec<C64> = xi
        .samples
        .iter()
        .zip(&grid.omega)
        .map(|(s, &w)| s * C64::from_polar(1.0, -t * w))
        .collect();
    TestFunction {
        label: format!("{}@t{:+.3}", xi.label, t),
        samples,
        annulus: xi.annulus,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntertwiningReport {
    pub deviation: f64,
    /// Sum of the two pairing tail bounds.
    pub combined_certificate: f64,
    pub evolved_side: WaveOperatorPairing,
    pub twisted_side: WaveOperatorPairing,
}

/// Checks ⟨ξ, Λ±(Φ_t(u₀,z₀))⟩ = ⟨e^{−itω} ξ, Λ±(u₀,z₀)⟩ by two independent
/// pairings.
pub fn intertwining_check(
    grid: &GridPair,
    state0: &ClassicalState,
    xi: &TestFunction,
    t: f64,
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<IntertwiningReport, ScatterError> {
    // evolve the state to time t (sign of t decides the stepping direction)
    let evolved = if t == 0.0 {
        state0.clone()
    } else {
        let dt = opts.dt * t.signum();
        let steps = (t / dt).round() as usize;
        let mut stepper = Stepper::new(grid, state0.clone(), dt)?;
        for _ in 0..steps {
            stepper.step()?;
        }
        stepper.state
    };
    let evolved_side = pair_wave_operator(grid, &evolved, xi, direction, opts)?;
    // Λ±(Φ_t s) = e^{-itω} Λ±(s), so the matching pairing on the original
    // state uses the conjugated twist: ⟨ξ, e^{-itω}Λ⟩ = ⟨e^{+itω}ξ, Λ⟩.
    let twisted = twisted_test_function(grid, xi, -t);
    let twisted_side = pair_wave_operator(grid, state0, &twisted, direction, opts)?;
    let deviation = (evolved_side.value() - twisted_side.value()).norm();
    let combined_certificate = evolved_side.tail_bound + twisted_side.tail_bound;
    Ok(IntertwiningReport { deviation, combined_certificate, evolved_side, twisted_side })
}

/// Classifies a state as radiationless by testing every dictionary pairing
/// in the requested directions against the threshold
/// (default 1e-6 · (‖u‖² + ‖z‖)).
pub fn is_radiationless(
    grid: &GridPair,
    state0: &ClassicalState,
    dict: &[&TestFunction],
    directions: &[Direction],
    threshold: Option<f64>,
    opts: &ScatterOpts,
) -> Result<RadiationlessVerdict, ScatterError> {
    let scale = linalg::norm_sq(&state0.u, grid.dx) + linalg::norm(&state0.z, grid.dk);
    let threshold = threshold.unwrap_or(1e-6 * scale);
    let mut pairings = Vec::new();
    for &dir in directions {
        pairings.extend(pair_dictionary(grid, state0, dict, dir, opts)?);
    }
    let max_pairing = pairings
        .iter()
        .map(|p| p.value().norm())
        .fold(0.0, f64::max);
    Ok(RadiationlessVerdict {
        max_pairing,
        threshold,
        radiationless: max_pairing <= threshold,
        pairings,
    })
}

/// Cesàro-averaged strong representative (1/T)∫₀^{±T} e^{iτω} z(τ) dτ.
/// Diagnostic only: pointwise-in-k time integrals oscillate without
/// converging, so no pairing logic relies on this vector.
pub fn cesaro_representative(
    grid: &GridPair,
    state0: &ClassicalState,
    horizon: f64,
    direction: Direction,
    opts: &ScatterOpts,
) -> Result<Vec<C64>, ScatterError> {
    let dt = opts.dt * direction.sign();
    let mut stepper = Stepper::new(grid, state0.clone(), dt)?;
    let steps = (horizon / opts.dt).round() as usize;
    let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); grid.len()];
    let mut phase: Vec<C64> = vec![C64::new(1.0, 0.0); grid.len()];
    let phase_step: Vec<C64> = grid
        .omega
        .iter()
        .map(|&w| C64::from_polar(1.0, dt * w))
        .collect();
    for (a, z) in acc.iter_mut().zip(&stepper.state.z) {
        *a += 0.5 * z;
    }
    for n in 1..=steps {
        stepper.step()?;
        for (p, s) in phase.iter_mut().zip(&phase_step) {
            *p *= s;
        }
        let w = if n == steps { 0.5 } else { 1.0 };
        for ((a, p), z) in acc.iter_mut().zip(&phase).zip(&stepper.state.z) {
            *a += w * p * z;
        }
    }
    let inv = 1.0 / steps as f64;
    for a in acc.iter_mut() {
        *a *= inv;
    }
    Ok(acc)
}
