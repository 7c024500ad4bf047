//! End-to-end harness behavior: dispatch, determinism, schema-stable
//! outputs, and the CLI surface.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use skgw_harness::io::CsvTable;
use skgw_harness::manifest::read_manifest;
use skgw_harness::{config, run};

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("skgw_cli_{tag}_{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn flow_config(out: &Path) -> String {
    format!(
        r#"
seed = 7
[model]
grid_size = 128
box_half_length = 16.0
[experiment]
kind = "flow"
[experiment.flow]
dt = 1e-3
horizon = 1.0
stride = 100
snapshot_stride = 1
[output]
directory = "{}"
export_grids = true
"#,
        out.display()
    )
}

#[test]
fn flow_run_writes_declared_outputs_with_manifest() {
    let dir = temp_dir("flow");
    let cfg = config::from_str(&flow_config(&dir), &[]).unwrap();
    let manifest = run::run_experiment(&cfg).unwrap();
    assert!(dir.join("trajectory.csv").exists());
    assert!(dir.join("manifest.json").exists());
    assert!(dir.join("grid_position.csv").exists());
    assert!(dir.join("grid_momentum.csv").exists());
    assert!(manifest.files.contains_key("trajectory.csv"));
    // trajectory has the documented columns and an energy value per sample
    let table =
        CsvTable::parse(&fs::read_to_string(dir.join("trajectory.csv")).unwrap()).unwrap();
    assert_eq!(table.header, vec!["t", "mass", "energy", "energy0", "boundary_mass"]);
    assert!(table.rows.len() >= 10);
    // every produced file is inventoried
    for entry in fs::read_dir(&dir).unwrap() {
        let name = entry.unwrap().file_name().to_string_lossy().into_owned();
        if name != "manifest.json" {
            assert!(manifest.files.contains_key(&name), "unlisted file {name}");
        }
    }
}

#[test]
fn identical_configs_give_identical_hashes() {
    let dir_a = temp_dir("det_a");
    let dir_b = temp_dir("det_b");
    let cfg_a = config::from_str(&flow_config(&dir_a), &[]).unwrap();
    let cfg_b = config::from_str(&flow_config(&dir_b), &[]).unwrap();
    let man_a = run::run_experiment(&cfg_a).unwrap();
    let man_b = run::run_experiment(&cfg_b).unwrap();
    assert_eq!(man_a.files, man_b.files, "outputs are not bit-identical");
}

#[test]
fn hartree_run_emits_schema_stable_json() {
    let dir = temp_dir("hartree");
    let text = format!(
        r#"
seed = 11
[experiment]
kind = "hartree"
[experiment.hartree]
delta = 0.3
starts = 2
[output]
directory = "{}"
"#,
        dir.display()
    );
    let cfg = config::from_str(&text, &[]).unwrap();
    run::run_experiment(&cfg).unwrap();
    let doc: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("hartree_result.json")).unwrap()).unwrap();
    for key in [
        "delta",
        "e_delta",
        "lambda",
        "lambda_unscaled_convention",
        "q",
        "residual",
        "iterations",
        "method",
        "u0_re",
        "u0_im",
        "z0_re",
        "z0_im",
    ] {
        assert!(doc.get(key).is_some(), "missing key {key}");
    }
    assert!(doc["residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn scatter_run_emits_report_and_profiles() {
    let dir = temp_dir("scatter");
    let text = format!(
        r#"
seed = 13
[model]
grid_size = 512
box_half_length = 32.0
[experiment]
kind = "scatter"
[experiment.scatter]
dictionary = 2
initial_horizon = 5.0
max_horizon = 10.0
profile_horizon = 20.0
[output]
directory = "{}"
"#,
        dir.display()
    );
    let cfg = config::from_str(&text, &[]).unwrap();
    run::run_experiment(&cfg).unwrap();
    let doc: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.join("scatter_report.json")).unwrap()).unwrap();
    let pairings = doc["pairings"].as_array().unwrap();
    assert_eq!(pairings.len(), 2);
    for p in pairings {
        for key in [
            "label",
            "direction",
            "value_re",
            "value_im",
            "horizon",
            "tail_bound",
            "fitted_exponent",
            "cauchy_gap",
        ] {
            assert!(p.get(key).is_some(), "missing pairing key {key}");
        }
    }
    let table =
        CsvTable::parse(&fs::read_to_string(dir.join("decay_profiles.csv")).unwrap()).unwrap();
    assert_eq!(table.header, vec!["xi", "tau", "magnitude", "fit"]);
}

#[test]
fn sweep_csv_parses_back_to_the_in_memory_table() {
    let dir = temp_dir("sweep");
    let text = format!(
        r#"
seed = 17
[experiment]
kind = "quantum-sweep"
[experiment.quantum_sweep]
hslash_list = [0.5]
delta = 0.3
d_u = 2
dictionary = 2
annulus = [1.0, 1.8]
horizon = 2.0
checkpoint_dt = 0.1
observables = ["field"]
[output]
directory = "{}"
"#,
        dir.display()
    );
    let cfg = config::from_str(&text, &[]).unwrap();
    run::run_experiment(&cfg).unwrap();
    let raw = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let table = CsvTable::parse(&raw).unwrap();
    assert_eq!(
        table.header,
        vec![
            "hslash",
            "observable_id",
            "quantum_value_re",
            "quantum_value_im",
            "classical_target_re",
            "classical_target_im",
            "gap",
            "tail_bound",
            "dims"
        ]
    );
    assert_eq!(table.rows.len(), 2);
    // parse-back equals re-serialization
    let rebuilt = CsvTable { header: table.header.clone(), rows: table.rows.clone() };
    assert_eq!(raw.as_bytes(), rebuilt.to_bytes().as_slice());
}

fn skgw_binary() -> PathBuf {
    let mut path = PathBuf::from(env!("CARGO_BIN_EXE_skgw"));
    if !path.exists() {
        path = PathBuf::from("target/debug/skgw");
    }
    path
}

#[test]
fn cli_exit_codes_follow_the_contract() {
    let dir = temp_dir("cli");
    let good = dir.join("good.toml");
    fs::write(&good, flow_config(&dir.join("out"))).unwrap();
    let bad = dir.join("bad.toml");
    fs::write(&bad, "[model]\nmasss = 2.0\n").unwrap();

    let ok = Command::new(skgw_binary())
        .args(["validate", good.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0), "{:?}", ok);

    let rejected = Command::new(skgw_binary())
        .args(["validate", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(rejected.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&rejected.stderr);
    assert!(stderr.contains("masss"), "{stderr}");

    let run_out = Command::new(skgw_binary())
        .args([
            "run",
            good.to_str().unwrap(),
            "--override",
            "experiment.flow.horizon=0.5",
        ])
        .output()
        .unwrap();
    assert_eq!(run_out.status.code(), Some(0), "{:?}", run_out);

    let report_out = Command::new(skgw_binary())
        .args(["report", dir.join("out").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(report_out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&report_out.stdout);
    assert!(stdout.contains("integrity: ok"), "{stdout}");
}

#[test]
fn manifest_detects_modified_outputs() {
    let dir = temp_dir("tamper");
    let cfg = config::from_str(&flow_config(&dir), &[]).unwrap();
    run::run_experiment(&cfg).unwrap();
    // corrupt one output after the run
    let victim = dir.join("trajectory.csv");
    let mut data = fs::read(&victim).unwrap();
    let last = data.len() - 2;
    data[last] = b'9';
    fs::write(&victim, data).unwrap();
    let outcome = skgw_harness::report::inspect(&dir).unwrap();
    assert!(!outcome.hash_mismatches.is_empty());
    let _ = read_manifest(&dir).unwrap();
}
