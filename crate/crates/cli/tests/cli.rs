//! The `d2d-coopnet` binary end to end.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use d2d_coopnet_cli::SystemConfig;

const HOTSPOT: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/hotspot.conf");

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2d-coopnet")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, cfg: &SystemConfig) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, cfg.emit()).unwrap();
    path
}

fn csv_rows(out: &Output) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(out.stdout.as_slice()).records().map(|r| r.unwrap()).collect()
}

fn column(out: &Output, name: &str) -> Vec<String> {
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    let i = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[i].to_string()).collect()
}

fn small(beta: f64) -> SystemConfig {
    SystemConfig {
        zipf_beta: beta,
        drops: 60,
        fading_draws: 2,
        seed: 42,
        ..SystemConfig::hotspot_defaults()
    }
}

#[test]
fn analyze_hotspot_config() {
    let out = bin(&["analyze", "--config", HOTSPOT]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert!(text.starts_with("beta,K,B,pc,na_avg,nc_avg,nn_avg,n_cellular_avg,"));
    assert_eq!(csv_rows(&out).len(), 13);
}

#[test]
fn analyze_uniform_popularity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SystemConfig {
        users_per_cluster: Some(3),
        ..small(0.0)
    };
    let out = bin(&["analyze", "--config", write_config(dir.path(), "a.conf", &cfg).to_str().unwrap()]);
    assert_eq!(column(&out, "n_cellular_avg"), vec!["162"]);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(HOTSPOT).unwrap().replace("zipf_beta = 1", "zipf_beta = -1");
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, &text).unwrap();
    let out = bin(&["analyze", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let line = text.lines().position(|l| l.starts_with("zipf_beta")).unwrap() + 1;
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(&format!("line {line}")) && err.contains("zipf_beta"), "{err}");

    let out = bin(&["analyze", "--config", dir.path().join("missing.conf").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&["sweep", "--config", HOTSPOT, "--sweep-key", "colour", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn infeasible_optimize_exits_3_with_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SystemConfig {
        rate_floor_bps: 1e11,
        ..small(1.0)
    };
    let path = write_config(dir.path(), "inf.conf", &cfg);
    let out = bin(&["optimize", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(csv_rows(&out).len(), 13);
    assert!(column(&out, "best").iter().all(|b| b == "false"));
    assert_eq!(bin(&["simulate", "--config", path.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn eta_star_grows_with_skew() {
    let dir = tempfile::tempdir().unwrap();
    let star = |beta: f64| {
        let path = write_config(dir.path(), &format!("b{beta}.conf"), &small(beta));
        let out = bin(&["optimize", "--config", path.to_str().unwrap()]);
        let best = column(&out, "best").iter().position(|b| b == "true").unwrap();
        column(&out, "eta")[best].parse::<f64>().unwrap()
    };
    assert!(star(1.0) > star(0.0));
}

#[test]
fn simulate_is_repeatable_and_writes_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "s.conf", &small(1.0));
    let path = path.to_str().unwrap();
    let a = bin(&["simulate", "--config", path]);
    let b = bin(&["simulate", "--config", path]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let header = String::from_utf8(a.stdout.clone()).unwrap();
    assert!(header.starts_with(
        "beta,K,B,eta,pc_analytic,pc_sim,na_avg,nc_analytic,nc_sim,nn_analytic,nn_sim,nb_analytic,nb_sim,\
         throughput_analytic_bps,throughput_sim_bps,throughput_ci_bps,coop_user_rate_bps,ncoop_user_rate_bps,\
         baseline_eta0_bps,baseline_tdma_bps\n"
    ));
    let file = dir.path().join("out.csv");
    let c = bin(&["simulate", "--config", path, "--out", file.to_str().unwrap()]);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(file).unwrap(), a.stdout);
}

#[test]
fn sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "w.conf", &small(0.5));
    let path = path.to_str().unwrap();
    let out = bin(&["sweep", "--config", path, "--sweep-key", "zipf_beta", "--values", "0,0.2,0.4,0.6,0.8,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&out).len(), 6);

    let ks = "1,2,3,4,5,6,9,10,12,15,18,20,30";
    let out = bin(&["sweep", "--config", path, "--sweep-key", "users_per_cluster", "--values", ks]);
    let pc: Vec<f64> = column(&out, "pc_analytic").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(pc.len(), 13);
    assert!(pc.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn validate_exit_status() {
    let out = bin(&["validate", "--config", HOTSPOT]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let names = column(&out, "check_name");
    assert!(names.iter().any(|n| n == "intra_pdf_mass") && names.iter().any(|n| n == "inter_pdf_mass"));
    assert!(names.iter().any(|n| n == "ncoop_se_rel"));

    // The first-order closed forms drift away from simulation at steep path loss.
    let dir = tempfile::tempdir().unwrap();
    let cfg = SystemConfig {
        alpha: 6.0,
        users_per_cluster: Some(9),
        ..SystemConfig::hotspot_defaults()
    };
    let path = write_config(dir.path(), "steep.conf", &cfg);
    let out = bin(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}
