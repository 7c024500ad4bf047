//! Experiment dispatch: builds the grids, runs the requested experiment,
//! writes its declared outputs, and finalizes the manifest.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as C64;
use thiserror::Error;

use skgw_core::hartree::{self, Init, Method, MinimizeOpts};
use skgw_core::model::{build_grids, make_test_dictionary, GridPair, ModelError, TestFunction};
use skgw_core::qyukawa::sweep::{
    ground_sweep, semiclassical_sweep, GroundSweepConfig, Observable, SemiclassicalSweepConfig,
    SweepError,
};
use skgw_core::rng::CounterRng;
use skgw_core::scatter::{
    self, decay_profiles, is_radiationless, Direction, ScatterOpts,
};
use skgw_core::skg::{self, ClassicalState, FlowConfig};

use crate::config::{ExperimentKind, InitialStateConfig, RunConfig};
use crate::io::{self, fmt_f64, CsvTable};
use crate::manifest::RunManifest;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("model rejected: {0:?}")]
    Model(Vec<ModelError>),
    #[error("flow failure: {0}")]
    Flow(#[from] skg::FlowError),
    #[error("scattering failure: {0}")]
    Scatter(#[from] scatter::ScatterError),
    #[error("minimization failure: {0}")]
    Hartree(#[from] hartree::HartreeError),
    #[error("sweep failure: {0}")]
    Sweep(#[from] SweepError),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
}

fn initial_state(
    grid: &GridPair,
    init: &InitialStateConfig,
    rng: &mut CounterRng,
) -> Result<ClassicalState, RunError> {
    match init.kind.as_str() {
        "minimizer" => {
            let result = hartree::minimize(
                grid,
                init.u_norm,
                Init::LowestEigenmode,
                &MinimizeOpts::default(),
                rng,
            )?;
            Ok(hartree::as_state(&result))
        }
        _ => {
            let u = skg::normalized_to(
                grid,
                &skg::gaussian_packet(grid, init.u_center, init.u_width, 1.0, init.u_momentum),
                init.u_norm,
            );
            let z: Vec<C64> = grid
                .k
                .iter()
                .map(|&k| {
                    let c = init.z_center;
                    C64::new(
                        init.z_amplitude * (-2.0 * (k - c) * (k - c)).exp(),
                        0.4 * init.z_amplitude * (-2.0 * (k + c) * (k + c)).exp(),
                    )
                })
                .collect();
            Ok(ClassicalState::new(u, z))
        }
    }
}

fn export_grids(grid: &GridPair, dir: &Path) -> std::io::Result<()> {
    let mut position = CsvTable::new(&["index", "x", "potential"]);
    for (i, (&x, &v)) in grid.x.iter().zip(&grid.potential).enumerate() {
        position.push_row(vec![i.to_string(), fmt_f64(x), fmt_f64(v)]);
    }
    io::write_atomic(&dir.join("grid_position.csv"), &position.to_bytes())?;
    let mut momentum = CsvTable::new(&["index", "k", "omega", "chi"]);
    for (i, ((&k, &w), &c)) in grid.k.iter().zip(&grid.omega).zip(&grid.chi).enumerate() {
        momentum.push_row(vec![i.to_string(), fmt_f64(k), fmt_f64(w), fmt_f64(c)]);
    }
    io::write_atomic(&dir.join("grid_momentum.csv"), &momentum.to_bytes())
}

fn run_flow(cfg: &RunConfig, grid: &GridPair, dir: &Path, manifest: &mut RunManifest) -> Result<(), RunError> {
    let mut rng = CounterRng::new(cfg.seed);
    let state = initial_state(grid, &cfg.flow.initial, &mut rng)?;
    let flow_cfg = FlowConfig {
        dt: cfg.flow.dt,
        horizon: cfg.flow.horizon,
        stride: cfg.flow.stride,
        snapshot_stride: cfg.flow.snapshot_stride,
    };
    let t0 = Instant::now();
    let traj = skg::evolve(grid, state, &flow_cfg)?;
    manifest.record_timing("evolve", t0.elapsed().as_secs_f64());
    for w in &traj.warnings {
        manifest.record_warning(format!("{w:?}"));
    }
    let mut table = CsvTable::new(&["t", "mass", "energy", "energy0", "boundary_mass"]);
    for s in &traj.samples {
        table.push_row(vec![
            fmt_f64(s.t),
            fmt_f64(s.mass),
            fmt_f64(s.energy),
            fmt_f64(s.energy0),
            fmt_f64(s.boundary_mass),
        ]);
    }
    io::write_atomic(&dir.join("trajectory.csv"), &table.to_bytes())?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        io::write_snapshot(
            &dir.join(format!("state_{i:04}.snp")),
            grid.params.dimension as u32,
            grid.len() as u64,
            grid.params.box_half_length,
            snap.t,
            &snap.u,
            &snap.z,
        )?;
    }
    Ok(())
}

fn parse_directions(text: &str) -> Vec<Direction> {
    match text {
        "backward" => vec![Direction::Backward],
        "both" => vec![Direction::Forward, Direction::Backward],
        _ => vec![Direction::Forward],
    }
}

fn run_scatter(
    cfg: &RunConfig,
    grid: &GridPair,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let sc = &cfg.scatter;
    let mut rng = CounterRng::new(cfg.seed);
    let state = initial_state(grid, &sc.initial, &mut rng)?;
    let dict = make_test_dictionary(grid, sc.annulus, sc.dictionary).map_err(|e| RunError::Model(vec![e]))?;
    let refs: Vec<&TestFunction> = dict.elements.iter().collect();
    let opts = ScatterOpts {
        dt: sc.dt,
        initial_horizon: sc.initial_horizon,
        max_horizon: sc.max_horizon,
        tol: sc.tol,
        profile_stride: 20,
    };
    let directions = parse_directions(&sc.direction);
    let t0 = Instant::now();
    let verdict = is_radiationless(grid, &state, &refs, &directions, sc.radiationless_threshold, &opts)?;
    manifest.record_timing("pairings", t0.elapsed().as_secs_f64());
    let report = serde_json::json!({
        "threshold": verdict.threshold,
        "max_pairing": verdict.max_pairing,
        "radiationless": verdict.radiationless,
        "pairings": verdict.pairings,
    });
    io::write_atomic(
        &dir.join("scatter_report.json"),
        &serde_json::to_vec_pretty(&report).expect("report serializes"),
    )?;

    let t1 = Instant::now();
    let profiles = decay_profiles(
        grid,
        &state,
        &refs,
        sc.profile_horizon.max(20.0),
        (sc.profile_horizon.max(20.0) * 0.25, sc.profile_horizon.max(20.0)),
        directions[0],
        &opts,
    )?;
    manifest.record_timing("decay_profiles", t1.elapsed().as_secs_f64());
    let mut table = CsvTable::new(&["xi", "tau", "magnitude", "fit"]);
    for (xi, profile) in dict.elements.iter().zip(&profiles) {
        for (&tau, &g) in profile.tau.iter().zip(&profile.magnitude) {
            let fit = if profile.fitted_exponent.is_finite() && tau > 0.0 {
                profile.prefactor * tau.powf(-profile.fitted_exponent)
            } else {
                0.0
            };
            table.push_row(vec![xi.label.clone(), fmt_f64(tau), fmt_f64(g), fmt_f64(fit)]);
        }
    }
    io::write_atomic(&dir.join("decay_profiles.csv"), &table.to_bytes())?;
    Ok(())
}

fn run_hartree(
    cfg: &RunConfig,
    grid: &GridPair,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let hc = &cfg.hartree;
    let opts = MinimizeOpts {
        method: if hc.method == "pg" { Method::ProjectedGradient } else { Method::Scf },
        tol: hc.tol,
        max_iter: hc.max_iter,
        damping: 0.5,
    };
    let rng = CounterRng::new(cfg.seed);
    let t0 = Instant::now();
    let result = hartree::multistart_minimize(grid, hc.delta, hc.starts, &opts, &rng)?;
    manifest.record_timing("minimize", t0.elapsed().as_secs_f64());
    let re = |v: &[C64]| v.iter().map(|c| c.re).collect::<Vec<f64>>();
    let im = |v: &[C64]| v.iter().map(|c| c.im).collect::<Vec<f64>>();
    let doc = serde_json::json!({
        "delta": result.delta,
        "e_delta": result.e_delta,
        "lambda": result.lambda,
        "lambda_unscaled_convention": result.lambda_unscaled_convention,
        "q": result.q,
        "residual": result.residual,
        "iterations": result.iterations,
        "method": hc.method,
        "multi_start": result.multi_start,
        "u0_re": re(&result.u0),
        "u0_im": im(&result.u0),
        "z0_re": re(&result.z0),
        "z0_im": im(&result.z0),
    });
    io::write_atomic(
        &dir.join("hartree_result.json"),
        &serde_json::to_vec_pretty(&doc).expect("result serializes"),
    )?;
    Ok(())
}

fn run_quantum_sweep(
    cfg: &RunConfig,
    grid: &GridPair,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let qc = &cfg.quantum_sweep;
    let observables: Vec<Observable> = qc
        .observables
        .iter()
        .map(|s| match s.as_str() {
            "field" => Observable::Field,
            "corr" => Observable::Corr,
            _ => Observable::Weyl,
        })
        .collect();
    let sweep_cfg = SemiclassicalSweepConfig {
        hslash_list: qc.hslash_list.clone(),
        delta: qc.delta,
        d_u: qc.d_u,
        annulus: qc.annulus,
        dictionary_count: qc.dictionary,
        horizon: qc.horizon,
        checkpoint_dt: qc.checkpoint_dt,
        observables,
        forward: true,
    };
    let rng = CounterRng::new(cfg.seed);
    let t0 = Instant::now();
    let report = semiclassical_sweep(grid, &sweep_cfg, &rng)?;
    manifest.record_timing("sweep", t0.elapsed().as_secs_f64());
    let mut table = CsvTable::new(&[
        "hslash",
        "observable_id",
        "quantum_value_re",
        "quantum_value_im",
        "classical_target_re",
        "classical_target_im",
        "gap",
        "tail_bound",
        "dims",
    ]);
    for r in &report.rows {
        table.push_row(vec![
            fmt_f64(r.hslash),
            r.observable_id.clone(),
            fmt_f64(r.quantum_value_re),
            fmt_f64(r.quantum_value_im),
            fmt_f64(r.classical_target_re),
            fmt_f64(r.classical_target_im),
            fmt_f64(r.gap),
            fmt_f64(r.tail_bound),
            r.dims.to_string(),
        ]);
    }
    io::write_atomic(&dir.join("sweep.csv"), &table.to_bytes())?;
    let doc = serde_json::json!({
        "monotone_gaps": report.monotone,
        "rows": report.rows,
    });
    io::write_atomic(
        &dir.join("sweep_summary.json"),
        &serde_json::to_vec_pretty(&doc).expect("sweep serializes"),
    )?;
    Ok(())
}

fn run_ground_sweep(
    cfg: &RunConfig,
    grid: &GridPair,
    dir: &Path,
    manifest: &mut RunManifest,
) -> Result<(), RunError> {
    let gc = &cfg.ground_sweep;
    let sweep_cfg = GroundSweepConfig {
        pairs: gc.pairs.clone(),
        d_u: gc.d_u,
        annulus: gc.annulus,
        dictionary_count: gc.dictionary,
        meson_cap: gc.meson_cap,
        horizon: gc.horizon,
        checkpoint_dt: gc.checkpoint_dt,
    };
    let rng = CounterRng::new(cfg.seed);
    let t0 = Instant::now();
    let report = ground_sweep(grid, &sweep_cfg, &rng)?;
    manifest.record_timing("ground_sweep", t0.elapsed().as_secs_f64());
    let mut table = CsvTable::new(&[
        "sector",
        "hslash",
        "delta",
        "quantum_energy",
        "classical_energy",
        "gap",
        "dims",
    ]);
    for r in &report.rows {
        table.push_row(vec![
            r.sector.to_string(),
            fmt_f64(r.hslash),
            fmt_f64(r.delta),
            fmt_f64(r.quantum_energy),
            fmt_f64(r.classical_energy),
            fmt_f64(r.gap),
            r.dims.to_string(),
        ]);
    }
    io::write_atomic(&dir.join("ground_sweep.csv"), &table.to_bytes())?;
    let doc = serde_json::json!({
        "gaps_strictly_decreasing": report.gaps_strictly_decreasing,
        "annihilators_within_certificates": report.annihilators_within_certificates,
        "rows": report.rows,
    });
    io::write_atomic(
        &dir.join("ground_sweep_summary.json"),
        &serde_json::to_vec_pretty(&doc).expect("ground sweep serializes"),
    )?;
    Ok(())
}

/// Runs the configured experiment. Outputs land in the configured directory;
/// the manifest is written last. On failure, partial outputs are retained
/// and no manifest is written.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunManifest, RunError> {
    let dir = cfg.output_directory.clone();
    std::fs::create_dir_all(&dir)?;
    let mut manifest = RunManifest::new(cfg);
    let t0 = Instant::now();
    let grid = build_grids(&cfg.model).map_err(RunError::Model)?;
    manifest.record_timing("build_grids", t0.elapsed().as_secs_f64());
    if cfg.export_grids {
        export_grids(&grid, &dir)?;
    }
    match cfg.kind {
        ExperimentKind::Flow => run_flow(cfg, &grid, &dir, &mut manifest)?,
        ExperimentKind::Scatter => run_scatter(cfg, &grid, &dir, &mut manifest)?,
        ExperimentKind::Hartree => run_hartree(cfg, &grid, &dir, &mut manifest)?,
        ExperimentKind::QuantumSweep => run_quantum_sweep(cfg, &grid, &dir, &mut manifest)?,
        ExperimentKind::GroundSweep => run_ground_sweep(cfg, &grid, &dir, &mut manifest)?,
    }
    manifest.finalize(&dir)?;
    crate::manifest::read_manifest(&dir).map_err(RunError::Io)
}
