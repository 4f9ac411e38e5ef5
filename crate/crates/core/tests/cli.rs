use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use esdg_mhd::cli::{run_config, RunSummary, AUDIT_HEADER, STATE_HEADER};
use esdg_mhd::config::{RunConfig, OUTPUT_DIR_ENV};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esdg-mhd"))
        .args(args)
        .env(OUTPUT_DIR_ENV, dir)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn audit_of_closed_walls_balances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("walls_conservative.json");
    let out = run(dir.path(), &["audit", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("balanced"));

    let (header, rows) = read_csv(&dir.path().join("conservative_audit.csv"));
    assert_eq!(header, AUDIT_HEADER);
    assert_eq!(rows.len(), 101);
    let cols = header.split(',').count();
    for r in &rows {
        assert_eq!(r.len(), cols);
        let scale = r[2].abs().max(r[3].abs()).max(1.0);
        assert!((r[4] / scale).abs() < 1e-11);
    }

    let (header, rows) = read_csv(&dir.path().join("conservative_final.csv"));
    assert_eq!(header, STATE_HEADER);
    assert_eq!(rows.len(), 16 * 4);
    assert!(rows.iter().all(|r| r[3] > 0.0 && r[7] > 0.0));
}

#[test]
fn open_channel_audit_checks_the_breakdown() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("channel.json");
    let out = run(dir.path(), &["audit", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("open domain"), "{stdout}");
}

#[test]
fn converge_writes_one_row_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("manufactured.json");
    let out = run(dir.path(), &["converge", cfg.to_str().unwrap(), "--levels", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("manufactured_convergence.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,elements,h,error_u,rate_u,error_v2,rate_v2,error_b2,rate_b2"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][4], "NaN");
    let elements: Vec<&str> = rows.iter().map(|r| r[1]).collect();
    assert_eq!(elements, ["8", "16", "32"]);
    for r in &rows[1..] {
        let rate: f64 = r[4].parse().unwrap();
        assert!((3.7..=4.5).contains(&rate), "rate {rate}");
    }
}

#[test]
fn refsol_commands_write_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["refsol", "pipe", "--ha", "5", "--c", "0", "--nr", "16", "--ntheta", "8"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("pipe.csv"));
    assert_eq!(header, "r,theta,u,b");
    assert_eq!(rows.len(), 16 * 8);
    let u_max = rows.iter().map(|r| r[2].abs()).fold(0.0, f64::max);
    assert!((u_max - 1.0).abs() < 1e-12);
    assert!(rows.iter().filter(|r| r[0] == 1.0).all(|r| r[2].abs() < 1e-10 && r[3].abs() < 1e-10));

    let out = run(dir.path(), &["refsol", "wire", "--nx", "9", "--nz", "5", "--output", "w.csv"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("w.csv"));
    assert_eq!(header, "x,z,Bx,By,Bz,Bz_mirror_sum");
    assert_eq!(rows.len(), 45);
    assert!(rows.iter().all(|r| r[5].abs() < 1e-12));

    let out = run(dir.path(), &["refsol", "loop", "--nr", "4", "--nz", "5", "--r-max", "1.5", "--z-min=-1", "--z-max=1"]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&dir.path().join("loop.csv"));
    assert_eq!(header, "r,z,Br,Bz,Bz_axis");
    // (r, z) = (1, 0) lies on the filament and is skipped
    assert_eq!(rows.len(), 4 * 5 - 1);
    for r in rows.iter().filter(|r| r[0] == 0.0) {
        assert!((r[3] - r[4]).abs() < 1e-12);
    }
}

#[test]
fn bad_configurations_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("walls_conservative.json")).unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"t_end\"", "\"t_final\": 1, \"t_end\"")).unwrap();
    let out = run(dir.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("t_final"));

    let out = run(dir.path(), &["audit", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_config_honours_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::load(&config("walls_dissipative.json")).unwrap();
    cfg.output.dir = dir.path().to_path_buf();
    cfg.t_end = 0.01;
    let (summary, u) = run_config(&cfg).unwrap();
    assert!(summary.steps > 0 && !summary.closed && summary.dissipation_enabled);
    assert!(summary.balanced());
    assert_eq!(u.len(), 16);
    assert!(dir.path().join("dissipative_audit.csv").exists());
}

#[test]
fn closed_summaries_are_judged_by_their_balance() {
    let base = RunSummary {
        steps: 1,
        max_scaled_abs_balance: 1e-3,
        max_balance: -1e-3,
        max_scaled_breakdown: 1e-15,
        dissipation_enabled: true,
        closed: true,
    };
    assert!(base.balanced());
    assert!(!RunSummary { max_balance: 1e-9, ..base.clone() }.balanced());
    assert!(!RunSummary { dissipation_enabled: false, ..base.clone() }.balanced());
    assert!(!RunSummary { max_scaled_breakdown: 1e-9, closed: false, ..base }.balanced());
}
