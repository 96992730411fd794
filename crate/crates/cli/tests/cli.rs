use std::io::Write;
use std::process::{Command, Output};

use ofdmim_relay::{from_db, to_db};
use ofdmim_relay_cli::commands::{BenchReport, OptimizeReport, SweepRow, ValidationReport};
use ofdmim_relay_cli::config::{RunConfig, SolverKind};
use proptest::prelude::*;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ofdmim-relay"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn check_csv(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    assert!(header.iter().all(|h| h.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')));
    lines
        .map(|l| {
            let f: Vec<String> = l.split(',').map(str::to_string).collect();
            assert_eq!(f.len(), header.len(), "row `{l}`");
            f
        })
        .collect()
}

fn significant_digits(field: &str) -> Option<usize> {
    let mantissa = field.split('e').next()?;
    field.contains('e').then(|| mantissa.chars().filter(|c| c.is_ascii_digit()).count())
}

#[test]
fn optimize_default_profile_json_round_trips() {
    let o = cli(&["optimize"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let rep: OptimizeReport = serde_json::from_str(&text).unwrap();
    assert_eq!(rep.config, RunConfig::default());
    assert_eq!(rep.results.len(), 1);
    let r = &rep.results[0];
    assert_eq!(r.solver, SolverKind::Proposed);
    let res = r.result.unwrap();
    assert!((r.pt_dbw.unwrap() - to_db(res.alloc.pt)).abs() < 1e-12);
    assert!((r.total_dbw.unwrap() - to_db(res.total_power_w)).abs() < 1e-12);
    assert!(res.converged && res.feasible);
    let again = serde_json::to_string_pretty(&rep).unwrap() + "\n";
    assert_eq!(again, text);
}

#[test]
fn optimize_csv_all_solvers() {
    let o = cli(&["optimize", "--solvers", "proposed,oracle,baseline", "--output", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("solver,pt_dbw,pr_dbw,total_dbw,"));
    let rows = check_csv(&text);
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["proposed", "oracle", "baseline"]);
    for r in &rows {
        for f in &r[1..7] {
            assert_eq!(significant_digits(f), Some(12), "{f}");
        }
    }
    let total = |i: usize| rows[i][3].parse::<f64>().unwrap();
    assert!(total(2) > total(0));
    assert!(total(2) > total(1));
}

#[test]
fn infeasible_box_exits_2() {
    let o = cli(&["optimize", "--ptmax-dbw", "20", "--prmax-dbw", "20", "--output", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    let rows = check_csv(&stdout(&o));
    assert_eq!(rows[0][8], "false");
    let o = cli(&["oracle", "--ptmax-dbw", "20", "--prmax-dbw", "20"]);
    assert_eq!(o.status.code(), Some(2));
    let rep: OptimizeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep.results[0].result.is_none());
    let o = cli(&["optimize", "--solvers", "baseline", "--ptmax-dbw", "20", "--prmax-dbw", "20"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn iteration_cap_exits_3() {
    let o = cli(&["optimize", "--max-iterations", "1"]);
    assert_eq!(o.status.code(), Some(3));
    let rep: OptimizeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!rep.results[0].result.unwrap().converged);
}

#[test]
fn config_errors_exit_4() {
    for args in [
        vec!["optimize", "--psi-th", "1.5"],
        vec!["optimize", "--T", "4", "--N", "3"],
        vec!["optimize", "--bogus"],
        vec!["optimize", "--config", "/nonexistent/profile.cfg"],
        vec!["bench", "--epsilons="],
        vec!["bench", "--epsilons", "1e-3,1e-2"],
        vec!["sweep", "--points", "0"],
    ] {
        let o = cli(&args);
        assert_eq!(o.status.code(), Some(4), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn config_file_and_overrides() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "[system]\nT = 8\nN = 16\n\n[target]\ns_db = 3 # threshold\npsi_th = 1e-2\n[run]\noutput = csv").unwrap();
    let path = f.path().to_str().unwrap().to_string();
    let o = cli(&["optimize", "--config", &path]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("solver,"));

    let o = cli(&["optimize", "--config", &path, "--output", "json", "--psi-th", "1e-3"]);
    let rep: OptimizeReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.config.system.t, 8);
    assert_eq!(rep.config.system.n, 16);
    assert_eq!(rep.config.target.psi_th, 1e-3);
    assert!((rep.config.target.s - from_db(3.0)).abs() < 1e-15);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "[system]\nT = 4\n\nmu2 = fast").unwrap();
    let o = cli(&["optimize", "--config", bad.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let msg = stderr(&o);
    assert!(msg.contains(":4") && msg.contains("system.mu2"), "{msg}");
}

#[test]
fn validate_passes_and_is_repeatable() {
    let args = ["validate", "--trials", "200000", "--seed", "7", "--output", "csv"];
    let a = cli(&args);
    let b = cli(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let rows = check_csv(&stdout(&a));
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(
        names,
        ["mc_outage_fixed_sap", "mc_outage_random_sap", "mc_mean_snr", "jensen_gap_bound", "markov_bound", "sap_n_independence"]
    );
    assert!(rows.iter().all(|r| r[1] == "true"));
}

#[test]
fn validate_detects_injected_fault() {
    let o = cli(&["validate", "--trials", "200000", "--fault-phi-scale", "1.05"]);
    assert_eq!(o.status.code(), Some(5));
    let rep: ValidationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(!rep.passed);
    assert!(!rep.checks[0].passed);
    assert!(rep.checks[2..].iter().all(|c| c.passed));
    let help = stdout(&cli(&["validate", "--help"]));
    assert!(!help.contains("phi-scale"));
}

#[test]
fn sweep_psi_default_grid() {
    let o = cli(&["sweep", "--solvers", "proposed,baseline"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("psi_th,solver,pt_dbw,pr_dbw,total_dbw,achieved_outage,iterations,"));
    let rows = check_csv(&text);
    assert_eq!(rows.len(), 50);
    let psi: Vec<f64> = rows.iter().step_by(2).map(|r| r[0].parse().unwrap()).collect();
    assert!((psi[0] - 1e-4).abs() < 1e-15 && (psi[24] - 1e-1).abs() < 1e-13);
    let ratio = psi[1] / psi[0];
    assert!(psi.windows(2).all(|w| (w[1] / w[0] / ratio - 1.0).abs() < 1e-9));
    let proposed: Vec<f64> = rows.iter().filter(|r| r[1] == "proposed").map(|r| r[4].parse().unwrap()).collect();
    assert!(proposed.windows(2).all(|w| w[1] <= w[0]));
    for pair in rows.chunks(2) {
        assert_eq!((pair[0][1].as_str(), pair[1][1].as_str()), ("proposed", "baseline"));
        assert!(pair[0][4].parse::<f64>().unwrap() < pair[1][4].parse::<f64>().unwrap());
    }
}

#[test]
fn sweep_s_json() {
    let o = cli(&["sweep", "--axis", "s-db", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<SweepRow> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r.axis == "s_db"));
    assert_eq!(rows[0].value, 0.0);
    assert_eq!(rows[20].value, 10.0);
    let totals: Vec<f64> = rows.iter().map(|r| r.total_dbw.unwrap()).collect();
    assert!(totals.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(cli(&["sweep", "--axis", "s-db", "--output", "json"]).stdout, o.stdout);
}

#[test]
fn bench_table_and_fits() {
    let o = cli(&["bench", "--output", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let rep: BenchReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rep.rows.len(), 7);
    let naive: Vec<u64> = rep.rows.iter().filter_map(|r| r.evaluations_naive_oracle).collect();
    assert_eq!(naive, [151 * 151 + 1, 301 * 301 + 1, 601 * 601 + 1]);
    let fit = rep.naive_exponent_fit.unwrap();
    assert!((fit.slope - 2.0).abs() < 0.02, "{fit:?}");
    assert!(rep.iterations_fit.is_some());

    let o = cli(&["bench", "--epsilons", "1e-2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(check_csv(&stdout(&o)).len(), 1);
    assert!(stderr(&o).contains("not enough points"));
    let o = cli(&["bench", "--epsilons", "1e-2", "--output", "json"]);
    let rep: BenchReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(rep.iterations_fit.is_none() && rep.naive_exponent_fit.is_none());
}

#[test]
fn oracle_naive_mode() {
    let o = cli(&["oracle", "--mode", "naive", "--step-dbw", "1", "--output", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = check_csv(&stdout(&o));
    assert_eq!(rows[0][0], "oracle");
    let pt: f64 = rows[0][1].parse().unwrap();
    assert!((pt - pt.round()).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn db_fields_convert_once(db in -50.0f64..100.0) {
        let mut c = RunConfig::default();
        c.apply_text(&format!("[system]\nptmax_dbw = {db}\n[target]\ns_db = {db}\n"), "p").unwrap();
        prop_assert!((to_db(c.system.pt_max) - db).abs() <= 1e-12 * db.abs().max(1.0));
        prop_assert!((to_db(c.target.s) - db).abs() <= 1e-12 * db.abs().max(1.0));
    }
}
