use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn coxcell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coxcell")).args(args).output().expect("binary runs")
}

fn read_column(path: &Path, col: usize) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn empty_grid_exits_with_config_code() {
    let out = coxcell(&["coverage", "--sweep", "t-db="]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn negative_intensity_exits_with_config_code() {
    let out = coxcell(&["assoc", "--lambda-b", "-1"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn unknown_flag_exits_with_config_code() {
    let out = coxcell(&["coverage", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_cleanly() {
    let out = coxcell(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("coverage"));
}

#[test]
fn manhattan_with_analytic_engine_is_rejected() {
    let out = coxcell(&["coverage", "--angular", "manhattan"]);
    assert_eq!(out.status.code(), Some(3));
    let out =
        coxcell(&["coverage", "--angular", "manhattan", "--engine", "mc", "--trials", "200", "--sweep", "t-db=0"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn rerun_with_same_seed_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = coxcell(&[
            "coverage",
            "--engine",
            "both",
            "--trials",
            "1500",
            "--seed",
            "9",
            "--sweep",
            "t-db=-5,0,5",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(sidecar["rows_written"], 3);
    assert!(sidecar["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn thread_count_does_not_change_results() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_coxcell"))
            .env("COXCELL_THREADS", threads)
            .args(["coverage", "--engine", "mc", "--trials", "1000", "--seed", "4", "--sweep", "t-db=0,3"])
            .output()
            .unwrap()
            .stdout
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn bad_thread_count_is_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_coxcell"))
        .env("COXCELL_THREADS", "zero")
        .args(["coverage", "--sweep", "t-db=0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn compare_without_cox_layer_passes() {
    let out = coxcell(&["compare", "coverage", "--mu-b", "0", "--trials", "3000", "--sweep", "t-db=-5,0,5,10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("PASS"));
}

#[test]
fn compare_with_few_trials_still_passes() {
    let out = coxcell(&["compare", "assoc", "--trials", "10", "--sweep", "mu-b=1,5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# network\nlambda_b = 1\nmu-b = 2\nsweep = t-db=0\n").unwrap();
    let from_file = coxcell(&["coverage", "--config", cfg.to_str().unwrap()]);
    let overridden = coxcell(&["coverage", "--config", cfg.to_str().unwrap(), "--mu-b", "20"]);
    let explicit = coxcell(&["coverage", "--lambda-b", "1", "--mu-b", "20", "--sweep", "t-db=0"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_ne!(from_file.stdout, overridden.stdout);
    assert_eq!(overridden.stdout, explicit.stdout);
}

#[test]
fn malformed_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "lambda_b = 1\nlambda_b = 2\n").unwrap();
    assert_eq!(coxcell(&["coverage", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
    fs::write(&cfg, "colour = blue\n").unwrap();
    assert_eq!(coxcell(&["coverage", "--config", cfg.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn fig5_3gpp_vehicular_curve_dominates() {
    let dir = tempfile::tempdir().unwrap();
    let out = coxcell(&["figure", "fig5", "--preset", "3gpp", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let planar = read_column(&dir.path().join("fig5_3gpp_planar-bs.csv"), 1);
    let vehicular = read_column(&dir.path().join("fig5_3gpp_vehicular-bs.csv"), 1);
    assert_eq!(planar.len(), vehicular.len());
    for (p, v) in planar.iter().zip(&vehicular) {
        assert!(v > p, "planar {p} vehicular {v}");
    }
}

#[test]
fn fig3_curves_are_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let out = coxcell(&["figure", "fig3", "--lambda-l", "10", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut low_density = Vec::new();
    for lb in ["1", "10", "100"] {
        let path = dir.path().join(format!("fig3_lambda-b-{lb}.csv"));
        let mu = read_column(&path, 0);
        let p = read_column(&path, 1);
        assert!(mu.windows(2).all(|w| w[0] < w[1]));
        assert!(p.windows(2).all(|w| w[0] < w[1]), "lambda_b={lb}: {p:?}");
        low_density.push(p[0]);
    }
    assert!(low_density.windows(2).all(|w| w[0] > w[1]));
}

#[test]
fn fig3_requires_line_intensity() {
    let dir = tempfile::tempdir().unwrap();
    let out = coxcell(&["figure", "fig3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn links_without_out_prints_all_four() {
    let out = coxcell(&["links", "--sweep", "t-db=0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["v2v", "i2v", "v2i", "i2i"] {
        assert!(text.contains(&format!("# {name}")), "{text}");
    }
}
