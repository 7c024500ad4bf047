//! Workbench command line.
//!
//! Exit codes: 0 success, 2 configuration rejected, 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use skgw_harness::{config, report, run};

#[derive(Parser)]
#[command(name = "skgw", version, about = "Particle-field scattering workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Shortcuts {
    /// Nucleon norm constraint (maps to experiment.hartree.delta).
    #[arg(long)]
    delta: Option<f64>,
    /// Minimizer: scf or pg.
    #[arg(long)]
    method: Option<String>,
    /// Convergence tolerance for the active experiment.
    #[arg(long)]
    tol: Option<f64>,
    /// Multi-start count for minimization.
    #[arg(long)]
    starts: Option<usize>,
    /// Seed for every random draw in the run.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated ħ values for sweeps.
    #[arg(long)]
    hslash_list: Option<String>,
    /// Retained nucleon modes.
    #[arg(long)]
    du: Option<usize>,
    /// Retained meson modes (dictionary size).
    #[arg(long)]
    meson_modes: Option<usize>,
    /// Meson occupation cap for ground sweeps.
    #[arg(long)]
    cap: Option<u8>,
    /// Sweep observable: weyl, field, corr, or ground.
    #[arg(long)]
    observable: Option<String>,
    /// Proxy horizon for sweeps.
    #[arg(long)]
    horizon: Option<f64>,
}

impl Shortcuts {
    fn to_overrides(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(v) = self.delta {
            out.push(format!("experiment.hartree.delta={v}"));
            out.push(format!("experiment.quantum_sweep.delta={v}"));
        }
        if let Some(v) = &self.method {
            out.push(format!("experiment.hartree.method={v}"));
        }
        if let Some(v) = self.tol {
            out.push(format!("experiment.hartree.tol={v}"));
            out.push(format!("experiment.scatter.tol={v}"));
        }
        if let Some(v) = self.starts {
            out.push(format!("experiment.hartree.starts={v}"));
        }
        if let Some(v) = self.seed {
            out.push(format!("seed={v}"));
        }
        if let Some(v) = &self.hslash_list {
            out.push(format!("experiment.quantum_sweep.hslash_list={v}"));
        }
        if let Some(v) = self.du {
            out.push(format!("experiment.quantum_sweep.d_u={v}"));
            out.push(format!("experiment.ground_sweep.d_u={v}"));
        }
        if let Some(v) = self.meson_modes {
            out.push(format!("experiment.quantum_sweep.dictionary={v}"));
            out.push(format!("experiment.ground_sweep.dictionary={v}"));
        }
        if let Some(v) = self.cap {
            out.push(format!("experiment.ground_sweep.meson_cap={v}"));
        }
        if let Some(v) = &self.observable {
            if v == "ground" {
                out.push("experiment.kind=ground-sweep".to_string());
            } else {
                out.push("experiment.kind=quantum-sweep".to_string());
                out.push(format!("experiment.quantum_sweep.observables={v}"));
            }
        }
        if let Some(v) = self.horizon {
            out.push(format!("experiment.quantum_sweep.horizon={v}"));
            out.push(format!("experiment.ground_sweep.horizon={v}"));
        }
        out
    }
}

#[derive(Subcommand)]
enum Command {
    /// Validate a configuration and run its experiment.
    Run {
        config: PathBuf,
        /// key.path=value pairs applied before validation.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[command(flatten)]
        shortcuts: Shortcuts,
    },
    /// Validate a configuration without running anything.
    Validate {
        config: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Summarize a completed run directory and verify file hashes.
    Report { run_dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides, shortcuts } => {
            let mut all = overrides;
            all.extend(shortcuts.to_overrides());
            let cfg = match config::load(&config, &all) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(2);
                }
            };
            match run::run_experiment(&cfg) {
                Ok(manifest) => {
                    println!(
                        "run complete: kind={} files={} dir={}",
                        manifest.kind,
                        manifest.files.len(),
                        cfg.output_directory.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("run failed: {e}");
                    ExitCode::from(3)
                }
            }
        }
        Command::Validate { config, overrides } => match config::load(&config, &overrides) {
            Ok(cfg) => {
                println!("configuration ok: kind={}", cfg.kind.as_str());
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(2)
            }
        },
        Command::Report { run_dir } => match report::inspect(&run_dir) {
            Ok(outcome) => {
                print!("{}", report::render(&outcome));
                if outcome.hash_mismatches.is_empty() && outcome.unlisted_files.is_empty() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(3)
                }
            }
            Err(e) => {
                eprintln!("cannot read run directory: {e}");
                ExitCode::from(3)
            }
        },
    }
}
