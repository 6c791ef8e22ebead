use std::path::Path;
use std::process::Command;

use embedvqe_cli::config::RunConfig;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_embedvqe"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(dir: &Path, config: &str, args: &[&str]) -> std::process::Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    bin().arg("--config").arg(&cfg).args(args).output().unwrap()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn config_round_trip() {
    let mut cfg = RunConfig::default();
    cfg.lattice.n_c = 2;
    cfg.lattice.u_values = Some(vec![0.5, 1.0]);
    cfg.noise.mode = "calibrated".into();
    cfg.noise.scale = 0.5;
    cfg.landscape.scales = vec![0.0, 0.25];
    let back = RunConfig::parse(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, back);
}

#[test]
fn unknown_keys_are_rejected() {
    assert!(RunConfig::parse("[lattice]\nbogus = 1\n").is_err());
    assert!(RunConfig::parse("[ansatz]\nkind = \"mrep\"\n").is_ok());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let config = "[lattice]\nu_values = [0.0, 1.0]\n[ansatz]\nkind = \"mr\"\n[optimizer]\nn_seeds = 2\n";
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let out = run(tmp.path(), config, &["--out", d.to_str().unwrap(), "vqe"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 6);
    assert_eq!(fa, fb);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "bogus = 1\n", &["show-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(tmp.path(), "[lattice]\nu_values = []\n", &["show-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(tmp.path(), "", &["--noise", "loud", "show-config"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(tmp.path(), "[lattice]\nn_c = 2\n", &["--out", tmp.path().join("o").to_str().unwrap(), "landscape"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(tmp.path(), "", &["show-config"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ed_reference_starts_at_unit_weight() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    let out = run(tmp.path(), "[lattice]\nu_values = [0.0, 0.5, 1.0]\n", &["--out", o.to_str().unwrap(), "ed-reference"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(o.join("ed_reference.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# embedvqe"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let zi = header.iter().position(|h| *h == "Z_plus").unwrap();
    let z: Vec<f64> = lines.map(|l| l.split(',').nth(zi).unwrap().parse().unwrap()).collect();
    assert_eq!(z.len(), 3);
    assert!((z[0] - 1.0).abs() < 1e-10);
    assert!(z[1] < 1.0 && z[2] < z[1]);
}

#[test]
fn single_node_landscape() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().join("o");
    let config = "[lattice]\nu_values = [0.1]\n[ansatz]\nkind = \"mr\"\n[landscape]\nhalf_width = 0\nscales = [0.0, 1.0]\n";
    let out = run(tmp.path(), config, &["--out", o.to_str().unwrap(), "landscape"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(o.join("landscape_U0.1000.csv")).unwrap();
    assert_eq!(text.lines().count(), 4);
    let json = std::fs::read_to_string(o.join("landscape_U0.1000.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let minima = v["minima"].as_array().unwrap();
    assert_eq!(minima.len(), 2);
    assert!(minima[0]["cost"].as_f64().unwrap() < 1e-8);
    assert!(minima[1]["cost"].as_f64().unwrap() > minima[0]["cost"].as_f64().unwrap());
}
