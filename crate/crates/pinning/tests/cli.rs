use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pinning::output::decode_field;
use serde_json::Value;

const SUBCOMMANDS: [&str; 6] = ["map", "sweep", "phase", "crossing", "nlse", "ed"];

fn pinning(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pinning"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            let bytes = if e.path().is_dir() { Vec::new() } else { fs::read(e.path()).unwrap() };
            (e.file_name().into_string().unwrap(), bytes)
        })
        .collect()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Small enough to keep the suite quick, large enough to exercise every path.
const SMALL: &str = r#"{
  "sweep": {"delta_p_range": {"min": 10, "max": 90, "count": 9}, "omega_range": {"min": 0.5, "max": 3, "count": 11}},
  "nlse": {"n_periods": 4, "grid_points": 64, "steps": 500, "record_every": 50},
  "ed": {"sizes": [4, 6], "ratios": [1, 2, 3, 4, 5, 6, 7, 8]},
  "output": {"emit_plot_script": true}
}"#;

#[test]
fn every_subcommand_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for sub in SUBCOMMANDS {
        let a = tmp.path().join(format!("{sub}_a"));
        let b = tmp.path().join(format!("{sub}_b"));
        let ra = pinning(&[sub, "--config", &cfg, "--out", a.to_str().unwrap()], &[("RAYON_NUM_THREADS", "1")]);
        let rb = pinning(&[sub, "--config", &cfg, "--out", b.to_str().unwrap()], &[("RAYON_NUM_THREADS", "4")]);
        assert!(ra.status.code() == rb.status.code(), "{sub}");
        let (sa, sb) = (snapshot(&a), snapshot(&b));
        assert!(!sa.is_empty());
        assert_eq!(sa, sb, "{sub} outputs differ");
    }
}

#[test]
fn outputs_carry_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    for sub in SUBCOMMANDS {
        assert!(pinning(&[sub, "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.success(), "{sub}");
    }
    let hash = read_json(&out.join("map_provenance.json"))["config_sha256"].as_str().unwrap().to_owned();
    assert_eq!(hash.len(), 64);
    for (name, bytes) in snapshot(&out) {
        let text = String::from_utf8_lossy(&bytes);
        if name.ends_with(".csv") {
            assert_eq!(text.lines().next().unwrap(), format!("# config_sha256={hash}"), "{name}");
        } else if name.ends_with(".json") {
            assert_eq!(read_json(&out.join(&name))["config_sha256"], hash.as_str(), "{name}");
        } else if name.ends_with(".bin") {
            assert!(snapshot(&out).contains_key("nlse_state.json"));
        }
    }
}

#[test]
fn nothing_is_written_outside_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let work = tmp.path().join("work");
    fs::create_dir(&work).unwrap();
    let before = snapshot(tmp.path()).into_keys().collect::<Vec<_>>();
    for sub in SUBCOMMANDS {
        let r = Command::new(env!("CARGO_BIN_EXE_pinning"))
            .args([sub, "--config", &cfg, "--out", "results"])
            .current_dir(&work)
            .output()
            .unwrap();
        assert!(r.status.success());
    }
    assert_eq!(snapshot(tmp.path()).into_keys().collect::<Vec<_>>(), before);
    assert_eq!(fs::read_dir(&work).unwrap().count(), 1);
}

#[test]
fn crossing_reproduces_the_anchor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"optics": {"delta_p": 50}}"#);
    let out = tmp.path().join("out");
    assert!(pinning(&["crossing", "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.success());
    let root = &read_json(&out.join("crossing_root.json"))["root"];
    assert!((root["omega_over_gamma"].as_f64().unwrap() - 1.03388).abs() < 5e-4);
    assert!((root["u_over_j"].as_f64().unwrap() - 3.85).abs() < 0.01);
    let curves = fs::read_to_string(out.join("crossing_curves.csv")).unwrap();
    assert_eq!(curves.lines().nth(1).unwrap(), "omega_over_gamma,j_over_er,u_over_er,u_over_j");
    assert_eq!(curves.lines().count(), 2 + 251);
}

#[test]
fn map_without_two_photon_detuning_has_no_lattice() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"optics": {"delta_small": 0}}"#);
    let out = tmp.path().join("out");
    let r = pinning(&["map", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let map = &read_json(&out.join("map.json"))["map"];
    assert_eq!(map["effective_params"]["v1"].as_f64().unwrap(), 0.0);
    assert_eq!(map["v1_over_er"].as_f64().unwrap(), 0.0);
}

#[test]
fn provenance_lists_applied_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"optics": {"delta_p": 50}}"#);
    let out = tmp.path().join("out");
    let r = pinning(&["map", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    let stderr = String::from_utf8(r.stderr).unwrap();
    assert!(stderr.contains("optics.omega = 1 (baseline default)"));
    assert!(!stderr.contains("optics.delta_p"));
    let p = &read_json(&out.join("map_provenance.json"))["provenance"];
    assert_eq!(p["defaults_applied"].as_array().unwrap().iter().filter(|l| l.as_str().unwrap().starts_with("optics.")).count(), 11);
    assert_eq!(p["config"]["optics"]["delta_p"], 50.0);
}

#[test]
fn json_format_and_plot_scripts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert!(pinning(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--format", "json"], &[]).status.success());
    let rows = read_json(&out.join("sweep.json"))["rows"].as_array().unwrap().clone();
    assert_eq!(rows.len(), 99);
    assert!(rows[0]["phase"].is_string());
    assert!(!out.join("sweep.gp").exists());

    let csv = tmp.path().join("csv");
    assert!(pinning(&["ed", "--config", &cfg, "--out", csv.to_str().unwrap()], &[]).status.success());
    let script = fs::read_to_string(csv.join("ed.gp")).unwrap();
    assert!(script.contains("'ed_results.csv'") && script.contains("L = 6"));
}

#[test]
fn state_dump_matches_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert!(pinning(&["nlse", "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.success());
    let psi = decode_field(&fs::read(out.join("nlse_state.bin")).unwrap()).unwrap();
    let side = &read_json(&out.join("nlse_state.json"))["state"];
    assert_eq!(psi.len() as u64, side["grid_points"].as_u64().unwrap());
    assert_eq!(side["n_periods"], 4);
    assert!((side["time"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let traj = fs::read_to_string(out.join("nlse_trajectory.csv")).unwrap();
    assert_eq!(traj.lines().nth(1).unwrap(), "tau,norm,energy,contrast");
    assert_eq!(traj.lines().count(), 2 + 11);
}

#[test]
fn sweep_header_and_row_order() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    assert!(pinning(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()], &[]).status.success());
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = text.lines().skip(1);
    assert_eq!(
        lines.next().unwrap(),
        "delta_p_over_gamma,omega_over_gamma,gamma_signed,gamma_abs,v1_over_er,k_luttinger,j_over_er,u_over_er,u_over_j,v_g_m_per_s,kappa_per_s,phase,flags"
    );
    let coords: Vec<(f64, f64)> = lines
        .map(|l| {
            let mut f = l.split(',');
            (f.next().unwrap().parse().unwrap(), f.next().unwrap().parse().unwrap())
        })
        .collect();
    assert_eq!(coords.len(), 99);
    assert!(coords.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let out = out.to_str().unwrap();
    let run = |text: &str, sub: &str| {
        let cfg = write_config(tmp.path(), text);
        pinning(&[sub, "--config", &cfg, "--out", out], &[])
    };

    let r = run(r#"{"optics": {"n1_fraction": 1.5}}"#, "map");
    assert_eq!(r.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8(r.stderr).unwrap().lines().last().unwrap()).unwrap();
    assert_eq!(err["class"], "domain");

    assert_eq!(run(r#"{"optics": {"omgea": 1}}"#, "map").status.code(), Some(2));
    assert_eq!(run("{\"optics\": {", "map").status.code(), Some(2));
    assert_eq!(run(r#"{"sweep": {"crossing": {"bracket": [2.0, 3.0]}}}"#, "crossing").status.code(), Some(2));
    assert_eq!(run(r#"{"optics": {"n1_fraction": 0}}"#, "phase").status.code(), Some(2));
    assert_eq!(run(r#"{"ed": {"sizes": [4], "ratios": [1, 2, 3, 4, 5]}}"#, "ed").status.code(), Some(2));
    let slow = r#"{"nlse": {"n_periods": 4, "grid_points": 64, "ground_state": {"max_iter": 20, "tol": 1e-300}}}"#;
    assert_eq!(run(slow, "nlse").status.code(), Some(3));

    let missing = pinning(&["map", "--config", "/nonexistent/config.json", "--out", out], &[]);
    assert_eq!(missing.status.code(), Some(1));
}
