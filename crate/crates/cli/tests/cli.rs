use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn parashear(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_parashear"));
    c.args(args).env_remove("PARASHEAR_PRECISION");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn cq_verify_passes_with_full_windows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cq");
    let o = parashear(
        &["cq-verify", "--algebra", "sl2sl2", "--epsilon", "0.1", "--N", "100", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], 1);
    assert_eq!(r["pass"], true);
    for w in r["result"]["report"]["windows"].as_array().unwrap() {
        assert_eq!(w["fraction"], 1.0);
    }
    let csv = std::fs::read_to_string(out.join("windows.csv")).unwrap();
    assert!(csv.starts_with("L,fraction,max_dist\n"));
    assert_eq!(csv.lines().count(), 21);
    assert_eq!(r["series"][0]["columns"][1], "fraction");
}

#[test]
fn missing_epsilon_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = parashear(&["cq-verify", "--N", "100", "--out", tmp.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("epsilon") && err.contains("Usage"));
    assert!(!tmp.path().join("report.json").exists());
}

#[test]
fn schema_violations_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.conf");
    std::fs::write(&cfg, "[cq-verify]\nepsilon = 0.1\nwidth = 3\n").unwrap();
    let out = tmp.path().to_str().unwrap();
    let o = parashear(&["cq-verify", "--config", cfg.to_str().unwrap(), "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = parashear(&["cq-verify", "--epsilon", "zero", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = parashear(&["heis-shear", "--epsilon", "0.3", "--roof", "constant:1", "--dy", "1e-9", "--out", out], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("constant"));
    let o = parashear(&["cf", "--out", out], &[("PARASHEAR_PRECISION", "quad")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_file_and_config_is_embedded() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.conf");
    let text = "# shared\nseed = 11\n\n[horo-shear]\nepsilon = 0.1\nb = 1e-4\nt-max = 100\nsamples = 11\n";
    std::fs::write(&cfg, text).unwrap();
    let out = tmp.path().join("h");
    let o = parashear(
        &["horo-shear", "--config", cfg.to_str().unwrap(), "--samples", "21", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["config"]["file"], text);
    assert_eq!(r["config"]["effective"]["samples"], 21);
    assert_eq!(r["config"]["effective"]["t-max"], 100.0);
    assert_eq!(r["seed"], 11);
    let csv = std::fs::read_to_string(out.join("divergence.csv")).unwrap();
    assert!(csv.starts_with("t,D_raw,D_comp,f\n"));
    assert_eq!(csv.lines().count(), 22);
}

fn run_sweep(dir: &Path, cfg: &Path, seed: &str) -> Output {
    parashear(
        &["witness", "--config", cfg.to_str().unwrap(), "--seed", seed, "--out", dir.to_str().unwrap()],
        &[],
    )
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.conf");
    std::fs::write(&cfg, "[witness]\nepsilon = 0.3\npairs = 3\ndy-min = 2e-3\ndy-max = 5e-3\n").unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    for (dir, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        let o = run_sweep(dir, &cfg, seed);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["report.json", "pairs.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_ne!(std::fs::read(a.join("pairs.csv")).unwrap(), std::fs::read(c.join("pairs.csv")).unwrap());
}

#[test]
fn heis_shear_lift_and_its_halved_variant() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["heis-shear", "--epsilon", "0.3", "--dy", "1e-3", "--delta", "2e-3"];
    let out = tmp.path().join("lift");
    let mut args = base.to_vec();
    args.extend(["--out", out.to_str().unwrap()]);
    let o = parashear(&args, &[("PARASHEAR_PRECISION", "extended")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["precision"], "extended");
    assert!(r["result"]["M_prime"].as_u64().unwrap() > 0);
    assert!(std::fs::read_to_string(out.join("shear.csv")).unwrap().starts_with("n,a_n\n"));

    let half = tmp.path().join("half");
    let mut args = base.to_vec();
    args.extend(["--halve-m", "--out", half.to_str().unwrap()]);
    let o = parashear(&args, &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&half);
    assert_eq!(r["pass"], false);
    assert!(r["failure"].as_str().unwrap().contains("terminal shift"));
}

#[test]
fn cf_and_gr_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("cf");
    let o = parashear(&["cf", "--alpha", "silver", "--depth", "12", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["continued_fraction"]["partial_quotients"], serde_json::json!(vec![2; 12]));
    assert_eq!(r["result"]["bounded_type"], true);

    let out = tmp.path().join("gr");
    let o = parashear(&["gr", "--algebra", "sl3", "--samples", "8", "--seed", "2", "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["GR"], 13);
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(csv.starts_with("sample,GR,"));
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn sigma_model_emits_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let o = parashear(
        &["sigma-model", "--a", "1e-31", "--epsilon", "0.1", "--model", "perturbed", "--out", out.to_str().unwrap()],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&out);
    assert_eq!(r["result"]["model"]["kind"], "perturbed");
    assert!(r["result"]["axioms"]["points"].as_u64().unwrap() > 0);
}
