use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use clap::Parser;
use vanspec::cli::{distribution, Cli};
use vanspec::table::config_line;
use vanspec::Experiment;
use vanspec_core::scenarios::DistributionSpec;

fn vanspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vanspec")).args(args).output().expect("run vanspec")
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn body(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn uniform_moments_column() {
    let out = vanspec(&["moments", "--dist", "uniform", "--d", "1", "--beta", "1", "--max-p", "4", "--trials", "0"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows = body(&csv);
    assert_eq!(rows[0], "p,M_analytic,M_montecarlo,rel_err");
    let m: Vec<f64> = rows[1..].iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(m[..3], [1.0, 2.0, 5.0]);
    assert!((m[3] - 44.0 / 3.0).abs() < 1e-12);
}

#[test]
fn metadata_header() {
    let out = vanspec(&["partitions", "--p", "4", "--k", "2", "--seed", "5"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let head: Vec<&str> = csv.lines().take(4).collect();
    assert!(head[0].starts_with("# vanspec "));
    assert!(head[1].starts_with("# config_hash: sha256:"));
    assert_eq!(head[2], "# seed: 5");
    assert!(head[3].starts_with("# config: {"));
    assert!(csv.contains("\"{1,3}{2,4}\",2,false,2/3,0.6666666666666666"));
    assert_eq!(body(&csv).len(), 1 + 7);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["partitions", "--p", "12"],
        vec!["moments", "--beta", "-1", "--trials", "0"],
        vec!["reproduce", "fig4"],
        vec!["mse", "--gamma-db", "10:-1:0"],
        vec!["spectrum", "--dist", "gauss", "--beta", "1"],
        vec!["scenario", "holes", "--c", "1.5", "--beta", "0.5"],
        vec!["spectrum", "--beta", "1", "--bins", "0"],
        vec!["frobnicate"],
    ] {
        let out = vanspec(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn same_seed_same_bytes_and_rerun_round_trips() {
    let dir = scratch("cli-rerun");
    let a = dir.join("a.csv");
    let b = dir.join("b.csv");
    let svg = dir.join("a.svg");
    let args = ["spectrum", "--dist", "hole:0.7", "--n", "24", "--beta", "0.5", "--trials", "6", "--seed", "3"];
    assert!(vanspec(&[&args[..], &["--out", a.to_str().unwrap(), "--svg", svg.to_str().unwrap()]].concat()).status.success());
    assert!(vanspec(&[&args[..], &["--out", b.to_str().unwrap(), "--threads", "2"]].concat()).status.success());
    let first = std::fs::read_to_string(&a).unwrap();
    assert_eq!(first, std::fs::read_to_string(&b).unwrap());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let c = dir.join("c.csv");
    assert!(vanspec(&["rerun", a.to_str().unwrap(), "--out", c.to_str().unwrap()]).status.success());
    assert_eq!(first, std::fs::read_to_string(&c).unwrap());

    let exp = Experiment::from_json(config_line(&first).unwrap()).unwrap();
    assert_eq!(exp.seed, 3);
}

#[test]
fn eta_table_cache_is_reused() {
    let dir = scratch("cli-eta");
    let table = dir.join("eta.json");
    let run = |out: &Path| {
        let o = vanspec(&[
            "mse", "--dist", "uniform", "--n", "6", "--beta", "0.5,1", "--gamma-db", "0:10:20", "--trials", "5",
            "--table-trials", "4", "--eta-table", table.to_str().unwrap(), "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read_to_string(out).unwrap()
    };
    let first = run(&dir.join("a.csv"));
    assert!(table.exists());
    assert_eq!(first, run(&dir.join("b.csv")));
    assert!(first.lines().next().unwrap().starts_with("# vanspec"));
    assert_eq!(body(&first)[0], "beta,gamma_db,mse_mc,mse_trace,mse_asymptotic,mse_lossless,stderr,m,ill_conditioned");
    assert_eq!(body(&first).len(), 1 + 6);

    // a cache built for other parameters is refused rather than silently reused
    let o = vanspec(&[
        "mse", "--n", "6", "--beta", "0.5", "--gamma-db", "0", "--trials", "2", "--table-trials", "3", "--eta-table",
        table.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn csma_hierarchy_file() {
    let dir = scratch("cli-csma");
    let hier = dir.join("hier.json");
    std::fs::write(
        &hier,
        r#"{"L":2,"H":2,"areas":[0.5,0.5],"m":[[5,3],[5,3]],"lambda1":[0.002,0.0002],
            "collision":{"type":"fixed","params":{"probability":0.1}}}"#,
    )
    .unwrap();
    let o = vanspec(&[
        "scenario", "csma", "--config", hier.to_str().unwrap(), "--n", "4", "--beta", "0.5", "--gamma-db", "10",
        "--trials", "3", "--table-trials", "3",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert!(csv.contains("# success: 0.81 0.81"));
    std::fs::write(&hier, r#"{"L":2}"#).unwrap();
    let o = vanspec(&["scenario", "csma", "--config", hier.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn svg_does_not_change_csv() {
    let dir = scratch("cli-svg");
    let args = ["scenario", "dense", "--beta", "0.5,0.1", "--trials", "2", "--seed", "9"];
    let plain = vanspec(&args);
    let with_svg = vanspec(&[&args[..], &["--svg", dir.join("d.svg").to_str().unwrap()]].concat());
    assert_eq!(plain.stdout, with_svg.stdout);
    assert!(dir.join("d.svg").exists());
}

#[test]
fn flags_parse() {
    let cli = Cli::try_parse_from(["vanspec", "--seed", "7", "scenario", "fading", "--a-db", "-3", "--gamma-db", "-10:5:0"]).unwrap();
    assert_eq!(cli.seed, 7);
    assert!(Cli::try_parse_from(["vanspec", "reproduce"]).is_err());
    assert_eq!(distribution("uniform", Some(3)).unwrap(), DistributionSpec::Uniform { d: 3 });
    assert_eq!(distribution("hole:0.5", Some(2)).unwrap(), DistributionSpec::Hole { c: 0.5, d: 2 });
    assert_eq!(distribution("fading:5", Some(3)).unwrap_err().exit_code(), 2);
    assert_eq!(distribution("fading:5", Some(2)).unwrap(), DistributionSpec::Fading { a_db: 5.0 });
}
