use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn faraday(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_faraday-ct"))
        .args(args)
        .env_remove("FARADAY_PRESET_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn phases_at_standard_tuning() {
    let out = faraday(&["phases", "--preset", "standard-tuning"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["phi"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);
    assert!((v["phi0"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert_eq!(v["admitted"], true);
}

#[test]
fn phases_without_coupling_coincide_and_loss_warns() {
    let v = json(&faraday(&["phases", "--lambda", "0"]));
    assert!((v["phi"].as_f64().unwrap() - v["phi0"].as_f64().unwrap()).abs() < 1e-12);

    let out = faraday(&["phases", "--gamma", "0.01"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["admitted"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn singular_cavity_is_a_config_error() {
    let out = faraday(&["phases", "--kappa", "0", "--omega-p", "0", "--lambda", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn single_control_run_has_eight_perfect_branches() {
    let out = faraday(&[
        "run",
        "--protocol",
        "ct-superposition",
        "--alpha",
        "0.6",
        "--beta",
        "0.8i",
    ]);
    assert_eq!(code(&out), 0);
    let branches = json(&out)["branches"].as_array().unwrap().clone();
    assert_eq!(branches.len(), 8);
    for b in branches {
        assert!((b["corrected_payload_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn two_photon_run_with_two_controls_has_64_branches() {
    let v = json(&faraday(&[
        "run",
        "--protocol",
        "ct-entangled",
        "--controls",
        "2",
    ]));
    assert_eq!(v["branches"].as_array().unwrap().len(), 64);
}

#[test]
fn basis_payload_is_delivered_as_zero() {
    let v = json(&faraday(&[
        "run",
        "--protocol",
        "ct-superposition",
        "--alpha",
        "1",
        "--beta",
        "0",
    ]));
    for b in v["branches"].as_array().unwrap() {
        let amps = b["residual"]["amplitudes"].as_array().unwrap();
        let mag = |i: usize| {
            amps[i][0]
                .as_f64()
                .unwrap()
                .hypot(amps[i][1].as_f64().unwrap())
        };
        // Before correction the residual is |0> or |1>; the correction flips
        // it exactly when it contains X.
        let flips = b["correction"].as_str().unwrap().contains('X');
        let (on, off) = if flips { (1, 0) } else { (0, 1) };
        assert!((mag(on) - 1.0).abs() < 1e-12 && mag(off) < 1e-12, "{b}");
    }
}

#[test]
fn output_files_are_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let out = faraday(&[
            "run",
            "--protocol",
            "cpt-entangled",
            "--controls",
            "2",
            "--alpha",
            "random",
            "--seed",
            "42",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
    assert_eq!(
        std::fs::read(&paths[0]).unwrap(),
        std::fs::read(&paths[1]).unwrap()
    );
}

#[test]
fn sampling_is_deterministic() {
    let args = [
        "sample",
        "--protocol",
        "ct-entangled",
        "--alpha",
        "random",
        "--seed",
        "7",
        "--samples",
        "5",
    ];
    let (a, b) = (faraday(&args), faraday(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["samples"].as_array().unwrap().len(), 5);
}

#[test]
fn bad_run_configs_exit_with_two() {
    assert_eq!(code(&faraday(&["run", "--protocol", "teleport"])), 2);
    assert_eq!(
        code(&faraday(&[
            "run",
            "--protocol",
            "ct-superposition",
            "--alpha",
            "2"
        ])),
        2
    );
    assert_eq!(
        code(&faraday(&[
            "run",
            "--protocol",
            "ct-entangled",
            "--controls",
            "3"
        ])),
        2
    );
    assert_eq!(
        code(&faraday(&[
            "run",
            "--protocol",
            "ct-superposition",
            "--controls",
            "0"
        ])),
        2
    );
}

#[test]
fn verify_tables_defaults_to_green() {
    let out = faraday(&["verify-tables"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out).as_array().unwrap().len(), 6);

    let one = json(&faraday(&[
        "verify-tables",
        "--table",
        "ct-superposition-1",
    ]));
    assert_eq!(one[0]["rows_matched"], 8);
}

#[test]
fn verify_tables_without_errata_fails() {
    let out = faraday(&["verify-tables", "--no-errata"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 7"));
}

#[test]
fn corrupted_table_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, "{\"id\": \"x\", \"rows\": [").unwrap();
    let out = faraday(&["verify-tables", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(faraday(&["verify-tables", "--table", "nope"]).status.code() == Some(2));
}

#[test]
fn resources_for_one_and_two_paths() {
    let one = json(&faraday(&["resources"]));
    assert!((one["success_probability"].as_f64().unwrap() - 7.125e-5).abs() < 1e-18);
    assert!((one["expected_event_period_s"].as_f64().unwrap() - 0.187).abs() < 5e-4);

    let two = json(&faraday(&["resources", "--paths", "2"]));
    assert!((two["success_probability"].as_f64().unwrap() - 2.030625e-8).abs() < 1e-20);
    assert_eq!(
        two["expected_event_period_min"].as_f64().unwrap().round(),
        11.0
    );
}

fn write_model(dir: &Path, name: &str, p_bell: f64) -> std::path::PathBuf {
    let path = dir.join(format!("{name}.json"));
    let model = serde_json::json!({
        "t_fiber": 1.0, "t_optics": 1.0, "p_pol": 1.0, "eta_det": 1.0, "solid_angle": 1.0,
        "p_bell": p_bell, "source_rate": 1000.0, "n_photon_paths": 1
    });
    std::fs::write(&path, model.to_string()).unwrap();
    path
}

#[test]
fn lossless_model_reduces_to_bell_probability() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_model(dir.path(), "ideal", 0.25);
    let v = json(&faraday(&[
        "resources",
        "--model",
        path.to_str().unwrap(),
        "--monte-carlo",
        "1000",
    ]));
    assert_eq!(v["success_probability"], 0.25);
    assert!((v["expected_event_period_s"].as_f64().unwrap() - 1.0 / 250.0).abs() < 1e-15);
    assert!(v["monte_carlo"]["successes"].as_u64().unwrap() > 150);
}

#[test]
fn preset_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    write_model(dir.path(), "lab", 0.5);
    let out = Command::new(env!("CARGO_BIN_EXE_faraday-ct"))
        .args(["resources", "--preset", "lab"])
        .env("FARADAY_PRESET_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["success_probability"], 0.5);
    assert_eq!(code(&faraday(&["resources", "--preset", "lab"])), 2);
}
