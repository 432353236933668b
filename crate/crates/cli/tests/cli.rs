use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vbg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vbg")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn strip_timestamp(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("generated_unix_s");
    v
}

fn stdout_json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn selection_report_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = strip_timestamp(stdout_json(&vbg(&["selection", "--seed", "7"], dir.path())));
    let b = strip_timestamp(stdout_json(&vbg(&["selection", "--seed", "7"], dir.path())));
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    let ro = &a["result"]["read_out"];
    assert!((ro["output_nm"].as_f64().unwrap() - 1346.9).abs() < 0.5);
    for w in ro["windows"].as_array().unwrap() {
        let want = if w["direction"] == "cw" { -1 } else { 1 };
        assert_eq!(w["ells"], serde_json::json!([want]));
    }
    assert_eq!(a["result"]["write_in"]["guided_orders"], serde_json::json!([21, 25]));
    assert_eq!(a["scenario"]["seed"], 7);
}

#[test]
fn farfield_files_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for stem in ["a", "b"] {
        let o = vbg(&["farfield", "--out", stem], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let p = dir.path();
    assert_eq!(std::fs::read(p.join("a.csv")).unwrap(), std::fs::read(p.join("b.csv")).unwrap());
    assert_eq!(std::fs::read(p.join("a.meta.json")).unwrap(), std::fs::read(p.join("b.meta.json")).unwrap());
    let ra = strip_timestamp(read_json(&p.join("a.report.json")));
    let rb = strip_timestamp(read_json(&p.join("b.report.json")));
    assert_eq!(ra, rb);
    assert_eq!(ra["result"]["on_axis_bright"], true);
    let meta = read_json(&p.join("a.meta.json"));
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["csv_header"], "theta_deg,phi_rad,intensity");
}

#[test]
fn farfield_json_format_and_isotropic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let o = vbg(&["farfield", "--mode", "isotropic", "--format", "json", "--out", "iso.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = read_json(&dir.path().join("iso.json"));
    assert_eq!(data["sidecar"]["metadata"]["model"], "isotropic");
    let n = data["intensity"].as_array().unwrap().len();
    assert_eq!(n, 121 * 360);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(vbg(&["budget", "--format", "csv"], p).status.code(), Some(2));
    assert_eq!(vbg(&["farfield"], p).status.code(), Some(2));
    assert_eq!(vbg(&["selection", "--preset", "nope"], p).status.code(), Some(2));
    assert_eq!(vbg(&["validate", "--config", "missing.toml"], p).status.code(), Some(4));
    assert_eq!(vbg(&["farfield", "--out", "no/such/dir/grid"], p).status.code(), Some(4));
    assert_eq!(vbg(&["feasibility", "--out", "f", "--sites", "5:2"], p).status.code(), Some(2));

    std::fs::write(p.join("typo.toml"), "name = \"x\"\nresonatr = 1\n").unwrap();
    let o = vbg(&["validate", "--config", "typo.toml"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resonatr"));

    let o = vbg(&["sweep", "--param", "pump.sitez", "--values", "1", "--out", "s"], p);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown parameter path"));
    assert!(vbg(&["validate"], p).status.success());
}

#[test]
fn echoed_scenario_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let first = stdout_json(&vbg(&["budget", "--preset", "high-q", "--seed", "3"], p));
    std::fs::write(p.join("echo.json"), serde_json::to_string(&first["scenario"]).unwrap()).unwrap();
    let second = stdout_json(&vbg(&["budget", "--config", "echo.json"], p));
    assert_eq!(strip_timestamp(first.clone()), strip_timestamp(second));
    let eta = first["result"]["efficiency"]["eta_tot"].as_f64().unwrap();
    assert!((eta - 0.069).abs() < 0.05 * 0.069, "{eta}");

    // the echo also survives as TOML once nulls are absent
    let toml_text = "name = \"t\"\n[resonator]\nradius_um = 1.6\nwidth_nm = 200.0\ndiamond_thickness_nm = 100.0\n\
linbo3_thickness_nm = 280.0\nn_core = 2.4\nn_out = 1.0\nquality_factor = 1000.0\n\
[mode]\nazimuthal_order = 21\nradial_order = 1\nlongitudinal_order = 2\nwavelength_nm = 736.0\n\
[pump]\nsites = 23\nharmonic = 1\nqplate_charge = 5\ninput_helicity = 1\nannulus_radius_um = 1.3\n\
waist_um = 0.6\ntotal_power_mw = 45.0\nlambda_scaling = 230.0\n";
    std::fs::write(p.join("min.toml"), toml_text).unwrap();
    let o = vbg(&["validate", "--config", "min.toml"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn budget_defaults_carry_warnings() {
    let dir = tempfile::tempdir().unwrap();
    let r = stdout_json(&vbg(&["budget"], dir.path()));
    let eta = r["result"]["efficiency"]["eta_tot"].as_f64().unwrap();
    assert!((eta - 1.5e-8).abs() < 0.1 * 1.5e-8);
    let ids: Vec<&str> = r["warnings"].as_array().unwrap().iter().map(|w| w["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"OQ-SPATIAL"), "{ids:?}");
}

#[test]
fn zero_population_override_gives_zero_grid() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vbg(&["selection"], p);
    let mut s = stdout_json(&o)["scenario"].clone();
    s["farfield"]["populations"] = serde_json::json!([0.0, 0.0, 0.0, 0.0]);
    std::fs::write(p.join("zero.json"), serde_json::to_string(&s).unwrap()).unwrap();
    let o = vbg(&["farfield", "--config", "zero.json", "--out", "z"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(p.join("z.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn sweep_over_sites_reproduces_fringe_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vbg(&["sweep", "--param", "pump.sites", "--values", "19,20,21,22,23,25,27", "--out", "sw"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&p.join("sw/manifest.json"));
    let entries = m["entries"].as_array().unwrap();
    let fringes: Vec<u64> = entries.iter().map(|e| e["summary"]["fringe_count"].as_u64().unwrap()).collect();
    assert_eq!(fringes, vec![4, 2, 0, 2, 4, 8, 12]);
    let on_axis: Vec<bool> = entries.iter().map(|e| e["summary"]["on_axis_bright"].as_bool().unwrap()).collect();
    assert_eq!(on_axis, vec![true, false, false, false, true, false, false]);
    assert!(p.join("sw/sweep_pump_sites_25.csv").exists());
    assert!(p.join("sw/sweep_pump_sites_25.meta.json").exists());
}

#[test]
fn single_value_sweep_matches_single_run() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(vbg(&["sweep", "--param", "pump.sites", "--values", "23", "--out", "one"], p).status.success());
    assert!(vbg(&["farfield", "--out", "single"], p).status.success());
    assert_eq!(
        std::fs::read(p.join("one/sweep_pump_sites_23.csv")).unwrap(),
        std::fs::read(p.join("single.csv")).unwrap()
    );
    let a = strip_timestamp(read_json(&p.join("one/sweep_pump_sites_23.report.json")));
    let b = strip_timestamp(read_json(&p.join("single.report.json")));
    assert_eq!(a["result"], b["result"]);
}

#[test]
fn power_sweep_scales_coupling_by_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vbg(
        &["sweep", "--param", "pump.total_power_mw", "--values", "45,180", "--command", "budget", "--out", "pw"],
        p,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&p.join("pw/manifest.json"));
    let g: Vec<f64> = m["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["summary"]["g_eff_power_scaling_rad_s"].as_f64().unwrap())
        .collect();
    assert!((g[1] / g[0] - 2.0).abs() < 1e-12);
    assert!(p.join("pw/sweep_pump_total_power_mw_180.report.json").exists());
}

#[test]
fn feasibility_map_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = vbg(&["feasibility", "--out", "map", "--sites", "20:26", "--ells", "-2:2"], p);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(p.join("map.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("N,ell,m_primes,radiative,eta_pump,delta_m_pm2"));
    assert_eq!(lines.count(), 7 * 5);
    let r = read_json(&p.join("map.report.json"));
    let hl = r["result"]["highlighted"].as_array().unwrap();
    assert!(hl.contains(&serde_json::json!([23, 1])));
    assert_eq!(read_json(&p.join("map.meta.json"))["kind"], "feasibility");
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let one = Command::new(env!("CARGO_BIN_EXE_vbg"))
        .args(["farfield", "--out", "t1"])
        .env("VBG_THREADS", "1")
        .current_dir(p)
        .output()
        .unwrap();
    assert!(one.status.success());
    assert!(vbg(&["farfield", "--out", "t4"], p).status.success());
    assert_eq!(std::fs::read(p.join("t1.csv")).unwrap(), std::fs::read(p.join("t4.csv")).unwrap());
    let bad = Command::new(env!("CARGO_BIN_EXE_vbg"))
        .arg("validate")
        .env("VBG_THREADS", "0")
        .current_dir(p)
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
