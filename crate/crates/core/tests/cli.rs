use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use symred::oracle::bessel_zero;

fn symred(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symred")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn spectrum_rows(dir: &Path) -> Vec<(f64, f64)> {
    let text = fs::read_to_string(dir.join("spectrum.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,eigenvalue,residual"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn planar_spectrum_matches_bessel() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"system":"planar","sector":0,"grid":{"rho_max":1.0,"n_rho":2000},"solver":{"k":5}}"#,
    );
    let out = tmp.path().join("out");
    let o = symred(&["spectrum", "--config", &cfg, "--out", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = spectrum_rows(&out);
    assert_eq!(rows.len(), 5);
    let exact = bessel_zero(0, 1).unwrap().powi(2);
    assert!((rows[0].0 - exact).abs() / exact < 1e-3);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["tool"], "symred");
    assert_eq!(meta["config"]["grid"]["n_rho"], 2000);
    assert!(meta["timings"]["solve_seconds"].is_number());
    assert!(meta["version"].is_string());
}

#[test]
fn rigid_body_symmetric_top() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", r#"{"system":"rigid-body","sector":2,"inertia":[1,1,2]}"#);
    let o = symred(&["spectrum", "--config", &cfg, "--out", "o"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let got: Vec<f64> = spectrum_rows(&tmp.path().join("o")).iter().map(|r| r.0).collect();
    for (a, b) in got.iter().zip([4.0, 4.0, 5.5, 5.5, 6.0]) {
        assert!((a - b).abs() < 1e-12, "{got:?}");
    }
}

#[test]
fn triatomic_small_grid_converges() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"system":"triatomic","sector":0,"grid":{"rho_max":1.0,"n_rho":8,"n_chi":6,"n_phi":8},"solver":{"k":3,"method":"iterative","tol":1e-10}}"#,
    );
    let o = symred(&["spectrum", "--config", &cfg, "--out", "o", "--threads", "2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for (l, r) in spectrum_rows(&tmp.path().join("o")) {
        assert!(r <= 1e-10 * l.max(1.0), "residual {r} for {l}");
    }
}

#[test]
fn outputs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"system":"triatomic","sector":1,"grid":{"rho_max":1.0,"n_rho":6,"n_chi":5,"n_phi":6},"solver":{"k":4,"method":"iterative"}}"#,
    );
    for d in ["a", "b"] {
        let o = symred(&["spectrum", "--config", &cfg, "--out", d, "--seed", "7"], tmp.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let read = |d: &str, f: &str| fs::read_to_string(tmp.path().join(d).join(f)).unwrap();
    assert_eq!(read("a", "spectrum.csv"), read("b", "spectrum.csv"));
    let strip = |t: String| {
        let mut v: serde_json::Value = serde_json::from_str(&t).unwrap();
        v.as_object_mut().unwrap().remove("timings");
        v
    };
    assert_eq!(strip(read("a", "meta.json")), strip(read("b", "meta.json")));
}

#[test]
fn config_and_assembly_errors_map_to_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "u.json", r#"{"system":"planar","solver":{"tolerance":1e-9}}"#);
    assert_eq!(symred(&["spectrum", "--config", &unknown], tmp.path()).status.code(), Some(2));
    let negative = write(tmp.path(), "n.json", r#"{"system":"triatomic","sector":-1}"#);
    assert_eq!(symred(&["spectrum", "--config", &negative], tmp.path()).status.code(), Some(2));
    let small = write(tmp.path(), "s.json", r#"{"system":"triatomic","grid":{"n_rho":1}}"#);
    assert_eq!(symred(&["spectrum", "--config", &small, "--out", "o"], tmp.path()).status.code(), Some(3));
    let singular = write(tmp.path(), "r.json", r#"{"system":"rigid-body","sector":1,"inertia":[0,0,1]}"#);
    assert_eq!(symred(&["spectrum", "--config", &singular, "--out", "o"], tmp.path()).status.code(), Some(3));
    assert_eq!(symred(&["spectrum", "--config", "missing.json"], tmp.path()).status.code(), Some(2));
}

fn geometry(tmp: &Path, masses: &str, positions: &str) -> (Option<i32>, serde_json::Value) {
    let input = write(tmp, "g.json", &format!(r#"{{"masses":{masses},"positions":{positions}}}"#));
    let o = symred(&["geometry", "--input", &input], tmp);
    let v = serde_json::from_slice(&o.stdout).unwrap_or(serde_json::Value::Null);
    (o.status.code(), v)
}

#[test]
fn geometry_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, v) = geometry(tmp.path(), "[1,1,16]", "[[-1,0,0],[1,0,0],[0,0,0]]");
    assert_eq!(code, Some(0));
    assert_eq!(v["stratum"], "Collinear");
    assert_eq!(v["inertia"]["rank"], 2);

    let (code, v) = geometry(tmp.path(), "[1,2,3]", "[[0,0,0],[0,0,0],[0,0,0]]");
    assert_eq!(code, Some(0));
    assert_eq!(v["stratum"], "Collision");
    for key in ["q1", "q2", "q3"] {
        assert_eq!(v["shape_invariants"][key], 0.0);
    }
    assert_eq!(v["dragt"]["rho"], 0.0);
    assert!(v["inertia"]["eigenvalues"].as_array().unwrap().iter().all(|x| x == 0.0));

    let h = 3f64.sqrt() / 2.0;
    let pos = format!("[[-0.5,{},0],[0.5,{},0],[0,{},0]]", -h / 3.0, -h / 3.0, 2.0 * h / 3.0);
    let (code, v) = geometry(tmp.path(), "[1,1,1]", &pos);
    assert_eq!(code, Some(0));
    assert!(v["shape_invariants"]["q1"].as_f64().unwrap().abs() < 1e-14);
    assert_eq!(v["stratum"], "Planar");

    let (code, _) = geometry(tmp.path(), "[1,2]", "[[1,0,0],[0,0,0]]");
    assert_eq!(code, Some(2));
    let (code, _) = geometry(tmp.path(), "[1,2", "[]");
    assert_eq!(code, Some(2));
}

fn projection(tmp: &Path, cfg: &str) -> (Option<i32>, Vec<(usize, usize, f64)>, serde_json::Value) {
    let c = write(tmp, "p.json", cfg);
    let o = symred(&["project", "--config", &c, "--out", "p"], tmp);
    if o.status.code() != Some(0) {
        return (o.status.code(), Vec::new(), serde_json::Value::Null);
    }
    let csv = fs::read_to_string(tmp.join("p/projection.csv")).unwrap();
    let rows = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    (o.status.code(), rows, serde_json::from_slice(&o.stdout).unwrap())
}

#[test]
fn projection_norms() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, rows, _) = projection(
        tmp.path(),
        r#"{"projection":{"band_limit":2,"max_ell":1,"function":{"kind":"matrix-element","ell":1,"i":0,"j":0}}}"#,
    );
    assert_eq!(code, Some(0));
    for (ell, i, n) in rows {
        if (ell, i) == (1, 0) {
            assert!((n - 1.0 / 3.0).abs() < 1e-12);
        } else {
            assert!(n < 1e-24);
        }
    }

    let (_, rows, _) = projection(tmp.path(), r#"{"projection":{"band_limit":2,"function":{"kind":"constant"}}}"#);
    assert!((rows[0].2 - 1.0).abs() < 1e-12);
    assert!(rows[1..].iter().all(|r| r.2 < 1e-24));

    let (_, _, summary) =
        projection(tmp.path(), r#"{"projection":{"band_limit":4,"function":{"kind":"random","band":2}}}"#);
    let total = summary["norm_squared"].as_f64().unwrap();
    assert!(summary["completeness_defect"].as_f64().unwrap() < 1e-10 * total);

    let (code, _, _) =
        projection(tmp.path(), r#"{"projection":{"band_limit":4,"function":{"kind":"random","band":3}}}"#);
    assert_eq!(code, Some(3));
}

#[test]
fn verify_list_and_controlled_failure() {
    let tmp = tempfile::tempdir().unwrap();
    let o = symred(&["verify", "--list"], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 12);

    let cfg = write(tmp.path(), "v.json", r#"{"verify":{"criteria":[1,5],"tolerance_scale":1e-9}}"#);
    let o = symred(&["verify", "--config", &cfg, "--out", "v"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    let verdicts: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let first = &verdicts[0];
    assert_eq!(first["name"], "planar-bessel-spectrum");
    assert_eq!(first["passed"], false);
    assert!(tmp.path().join("v/verify.json").exists());

    let cfg = write(tmp.path(), "w.json", r#"{"verify":{"criteria":[5,6,8,11]}}"#);
    assert_eq!(symred(&["verify", "--config", &cfg], tmp.path()).status.code(), Some(0));
}
