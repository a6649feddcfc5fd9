use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fpfn_cli::output::num;
use fpfn_cli::ScenarioConfig;
use fpfn_market::{equilibrium_split, Segment};

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_duopoly"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn symmetric_equilibrium_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("symmetric_split"), dir.path(), &["equilibrium"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("prices       (0.1, 0.1)"));
    let rows = csv_rows(&dir.path().join("equilibrium.csv"));
    assert_eq!(rows[1][column(&rows, "p1")], "0.1");
    assert_eq!(rows[1][column(&rows, "p2")], "0.1");
}

#[test]
fn csv_values_match_library_calls() {
    let dir = tempfile::tempdir().unwrap();
    let path = scenario("narrow_split");
    run(&path, dir.path(), &["equilibrium"]);
    let rows = csv_rows(&dir.path().join("equilibrium.csv"));
    let cfg = ScenarioConfig::load(&path).unwrap();
    let eq = equilibrium_split(&cfg.duopoly).unwrap();
    let expect = [
        ("p1", eq.prices.p1),
        ("p2", eq.prices.p2),
        ("alpha_negative", eq.indifferent_alpha(Segment::Negative).unwrap()),
        ("R1", eq.revenue1),
        ("R2", eq.revenue2),
    ];
    for (name, value) in expect {
        assert_eq!(rows[1][column(&rows, name)], num(value), "{name}");
    }
}

#[test]
fn strict_leader_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("close_leader"), dir.path(), &["equilibrium"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("StrictDominationFirm1"));
    assert!(out.contains("prices       (0.025, 0)"));
}

#[test]
fn tied_rates_are_reported_not_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("tied_fp"), dir.path(), &["equilibrium"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("TiedOrDegenerate"));
    let rows = csv_rows(&dir.path().join("equilibrium.csv"));
    assert!(rows[1][column(&rows, "status")].starts_with("tied/degenerate"));
}

#[test]
fn invalid_config_exits_one_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[duopoly]\nfp1 = 0.2\nfn1 = 0.2\nfp2 = -0.1\nfn2 = 0.3\n").unwrap();
    let o = run(&cfg, dir.path(), &["equilibrium"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.toml:4:"), "{err}");
    assert!(!dir.path().join("equilibrium.csv").exists());
}

#[test]
fn missing_config_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_duopoly")).arg("equilibrium").current_dir(dir.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_has_101_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("narrow_split"), dir.path(), &["sweep-zeta"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("sweep_zeta.csv"));
    assert_eq!(rows[0], ["zeta", "p1", "p2", "R1", "R2", "status"]);
    assert_eq!(rows.len(), 1 + 101 + 1);
    assert_eq!(rows[1][0], "0");
    assert_eq!(rows[101][0], "1");
    assert_eq!(rows[102][0], "max_second_diff");
    assert_eq!(rows[1][1], num(0.2 / 3.0));
    assert_eq!(rows[1][2], num(0.25 / 3.0));
    // totals 0.35 and 0.3: the correlated-only market prices at (0.05/3, 0.1/3)
    assert_eq!(rows[101][1], num(0.05 / 3.0));
    assert_eq!(rows[101][2], num(0.1 / 3.0));
}

#[test]
fn sweep_rejects_strict_market() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("close_leader"), dir.path(), &["sweep-zeta"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_passes_on_split_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("narrow_split"), dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows.len(), 1 + 1 + 8);
    assert!(rows[1..].iter().all(|r| r[column(&rows, "status")] == "PASS"));
}

#[test]
fn verify_entry_revenues() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("entered"), dir.path(), &["equilibrium"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("equilibrium.csv"));
    let r1: f64 = rows[1][column(&rows, "R1")].parse().unwrap();
    let r2: f64 = rows[1][column(&rows, "R2")].parse().unwrap();
    assert!((r1 - 0.1389).abs() < 1e-3 && (r2 - 0.0056).abs() < 1e-3);
    let o = run(&scenario("entered"), dir.path(), &["verify", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn verify_rejects_half_gap_monopoly_price() {
    // the half-gap price is not a best response: the leader can charge the
    // whole smaller lead and still keep every consumer
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("far_leader"), dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(2));
    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows[1][column(&rows, "status")], "FAIL");
    assert_eq!(rows[1][column(&rows, "grid_p1")], "0.3");
}

#[test]
fn tied_correlated_market_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("tied_totals_correlated"), dir.path(), &["verify"]);
    assert_eq!(o.status.code(), Some(2));
    let rows = csv_rows(&dir.path().join("verify.csv"));
    assert_eq!(rows[1][column(&rows, "status")], "INCONCLUSIVE");
    assert!(rows[1][column(&rows, "note")].contains("undercutting"));
}

#[test]
fn verify_is_byte_deterministic() {
    let (a, b, c) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = scenario("symmetric_split");
    run(&cfg, a.path(), &["verify", "--seed", "11"]);
    run(&cfg, b.path(), &["verify", "--seed", "11"]);
    run(&cfg, c.path(), &["verify", "--seed", "12"]);
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("verify.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert!(!read(&a).contains(&b'\r'));
}

#[test]
fn invest_and_entry_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("narrow_split"), dir.path(), &["invest"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("invest.csv"));
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][column(&rows, "dimension")], "FN");
    let residual: f64 = rows[1][column(&rows, "rate_residual")].parse().unwrap();
    assert!(residual < 1e-6);

    let o = run(&scenario("far_leader"), dir.path(), &["invest"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("entry.csv"));
    assert_eq!(rows[1][column(&rows, "recommended")], "FP");
    assert_eq!(rows[1][column(&rows, "fp_condition")], "true");
    let net: f64 = rows[1][column(&rows, "net_profit")].parse().unwrap();
    assert!((net - 0.0056).abs() < 1e-4);
}

#[test]
fn welfare_report_rows() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&scenario("narrow_split"), dir.path(), &["welfare"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&dir.path().join("welfare.csv"));
    assert_eq!(rows.len(), 1 + 5);
    let consumers = column(&rows, "consumers");
    for r in &rows[2..] {
        let expect = if r[0] == "superior" { "worse" } else { "better" };
        assert_eq!(r[consumers], expect);
    }
}
