use std::path::Path;
use std::process::{Command, Output};

fn glcint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_glcint"))
        .args(args)
        .env("GLC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

#[test]
fn predict_reproduces_brownian_means() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.csv");
    let o = glcint(&["predict", "--scenario", "preset:brownian2d", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out);
    assert!(text.starts_with("t,mean,variance,std,mgf_beta=0.5\n"));
    assert!(!text.contains('\r'));
    let means = column(&text, "mean");
    for (got, want) in means.iter().zip([0.2201, 0.0463, 0.0233, 0.0047]) {
        assert!((got - want).abs() < 5e-4, "{got} vs {want}");
    }
}

#[test]
fn predict_methods_and_empty_grid() {
    let o = glcint(&["predict", "--scenario", "preset:brownian2d", "--t", "", "--beta", ""]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap(), "t,mean,variance,std\n");
    let closed = glcint(&["predict", "--scenario", "preset:brownian2d", "--t", "10", "--beta", "", "--method", "closed"]);
    let quad = glcint(&["predict", "--scenario", "preset:brownian2d", "--t", "10", "--beta", "", "--method", "quadrature"]);
    let a = column(&String::from_utf8(closed.stdout).unwrap(), "mean")[0];
    let b = column(&String::from_utf8(quad.stdout).unwrap(), "mean")[0];
    assert!(((a - b) / b).abs() < 1e-8);
    let o = glcint(&["predict", "--scenario", "preset:brownian2d", "--t", "10", "--method", "closed"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let o = glcint(&["predict", "--scenario", "preset:ucm2d", "--t", "5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("divergent"));
    let o = glcint(&["validate", "--scenario", "/nonexistent/x.scn"]);
    assert_eq!(o.status.code(), Some(4));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("two_refs.scn");
    let text = glcint_preset("brownian2d").replacen("role = \"interferer\"", "role = \"reference\"", 1);
    std::fs::write(&bad, text).unwrap();
    let o = glcint(&["validate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = glcint(&["simulate", "--scenario", "preset:brownian2d", "--realizations", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = glcint(&["predict", "--scenario", "preset:brownian2d", "--t", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

fn glcint_preset(name: &str) -> String {
    read(&Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../core/presets/{name}.scn")))
}

#[test]
fn simulate_is_deterministic_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let trace = dir.path().join("trace.csv");
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--scenario".into(),
            "preset:brownian2d".into(),
            "--t".into(),
            "10".into(),
            "--realizations".into(),
            "4000".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let run = |out: &Path, extra: &[&str]| {
        let mut v = args(out);
        v.extend(extra.iter().map(|s| s.to_string()));
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        let o = glcint(&refs);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run(&a, &["--trace", trace.to_str().unwrap()]);
    run(&b, &[]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let text = read(&a);
    let mean = column(&text, "mean_hat")[0];
    let se = column(&text, "std_error")[0];
    assert!((mean - 0.2201).abs() < 4.0 * se, "{mean} ± {se}");
    assert_eq!(read(&trace).lines().count(), 4001);
}

#[test]
fn bpp_check_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("v.json");
    let o = glcint(&["bpp-check", "--scenario", "preset:brownian2d", "--out", json.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("BPP approximation: satisfied"));
    let v: serde_json::Value = serde_json::from_str(&read(&json)).unwrap();
    assert_eq!(v["satisfied"], true);
    assert_eq!(v["zero_limit_satisfied"], true);

    let o = glcint(&["bpp-check", "--scenario", "preset:inertia2d", "--gap-tol", "0.1"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("BPP approximation: violated"));
    let o = glcint(&["bpp-check", "--scenario", "preset:inertia2d_equal", "--horizon", "20"]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("BPP approximation: satisfied"));
}

#[test]
fn validate_presets() {
    for name in ["brownian2d", "inertia2d", "inertia2d_equal", "ucm2d", "ucm3d"] {
        let o = glcint(&["validate", "--scenario", &format!("preset:{name}")]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
