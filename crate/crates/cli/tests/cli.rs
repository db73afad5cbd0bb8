use std::path::Path;
use std::process::{Command, Output};

use relp::regex::build_ellul_bnk;

fn relp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relp")).args(args).env_remove("RELP_CONFIG").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(args: &[&str]) -> String {
    let o = relp(args);
    assert!(o.status.success(), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn gen_families() {
    assert_eq!(ok(&["gen", "binomial", "3", "1"]), "{001,010,100}\n");
    assert_eq!(ok(&["gen", "threshold", "3", "1"]), "{001,010,011,100,101,110,111}\n");
    assert_eq!(ok(&["gen", "sigma", "2"]), "{00,01,10,11}\n");
    assert_eq!(relp(&["gen", "cubes", "2"]).status.code(), Some(3));
}

#[test]
fn lp_solve_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("weak.lp");
    let sol = dir.path().join("weak.sol");
    let out = ok(&["lp", "weak", "--lang", "{00,000}", "-o", p(&lp)]);
    assert_eq!(out, "3 vars, 5 rows\n");
    assert!(std::fs::read_to_string(&lp).unwrap().starts_with("relp-lp v1"));
    let out = ok(&["solve", p(&lp), "-o", p(&sol)]);
    assert!(out.contains("objective 4 (4.0000)"), "{out}");
    let out = ok(&["check", p(&lp), p(&sol)]);
    assert!(out.contains("feasible"));
    assert!(ok(&["check", p(&lp), p(&sol), "--float"]).contains("feasible"));

    // A tampered solution fails the check with status 1.
    let text = std::fs::read_to_string(&sol).unwrap();
    let bad = dir.path().join("bad.sol");
    std::fs::write(&bad, text.replace("x[000] = ", "x[000] = 7+")).unwrap();
    assert_eq!(relp(&["check", p(&lp), p(&bad)]).status.code(), Some(3));
    std::fs::write(&bad, format!("{text}x[0000] = 1\n")).unwrap();
    let o = relp(&["check", p(&lp), p(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown variable x[0000]"));
}

#[test]
fn solve_prints_solution_files() {
    let dir = tempfile::tempdir().unwrap();
    let lp = dir.path().join("single.lp");
    ok(&["lp", "strong", "--lang", "{a}", "-o", p(&lp)]);
    let out = ok(&["solve", p(&lp)]);
    assert!(out.starts_with("status optimal\nobjective 1\n"), "{out}");

    let relaxed = dir.path().join("relaxed.lp");
    let out = ok(&["lp", "relaxed", "--n", "8", "--k", "1", "-o", p(&relaxed)]);
    assert!(out.ends_with("rows\n"));
    let dual = dir.path().join("relaxed.dual");
    let out = ok(&["solve", p(&relaxed), "--dual", p(&dual)]);
    assert!(out.contains("objective 32\n"));
    assert!(std::fs::read_to_string(&dual).unwrap().contains("objective 32"));
    let out = ok(&["solve", p(&relaxed), "--exact-only", "--orientation", "primal"]);
    assert!(out.contains("objective 32\n"));
    assert_eq!(relp(&["solve", p(&relaxed), "--max-iterations", "0"]).status.code(), Some(2));
}

#[test]
fn certify_commands() {
    let out = ok(&["certify", "(0+00)0", "--lang", "{00,000}"]);
    assert!(out.contains("objective 4 (4.0000)\nfeasible"), "{out}");
    let out = ok(&["certify", "(0+1)(0+1)(0+1)(0+1)(0+1)", "--lang", "sigma 5", "--sparse"]);
    assert!(out.contains("objective 10 "));

    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("single.cert");
    ok(&["certify", "0110", "--lang", "{0110}", "-o", p(&cert)]);
    let text = std::fs::read_to_string(&cert).unwrap();
    assert!(text.contains("w[0110] = 1"));
    assert!(!text.contains("y["));

    let r8 = build_ellul_bnk(8, 1).render();
    let out = ok(&["certify-relaxed", &r8, "--n", "8", "--k", "1"]);
    assert!(out.contains("objective 32 (32.0000)\nfeasible"), "{out}");
    let o = relp(&["certify-relaxed", &build_ellul_bnk(3, 1).render(), "--n", "3", "--k", "1", "--rule", "spread"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("violated row x[100]"));
    assert_eq!(relp(&["certify", "(0+1)0", "--lang", "{00}"]).status.code(), Some(3));
}

#[test]
fn oracle_command() {
    assert!(ok(&["oracle", "{00,000}"]).starts_with("length 4\n"));
    assert!(ok(&["oracle", "{a}"]).starts_with("length 1\nwitness a\n"));
    assert!(ok(&["oracle", "sigma 2"]).starts_with("length 4\nwitness (0+1)(0+1)\n"));
    assert_eq!(relp(&["oracle", "sigma 4"]).status.code(), Some(2));
}

#[test]
fn sweeps() {
    let out = ok(&["sweep", "b1-conjecture", "--nmax", "6"]);
    assert_eq!(out.lines().filter(|l| l.contains(" yes ")).count(), 6, "{out}");
    let out = ok(&["sweep", "bnk-conjecture", "--nmin", "6", "--nmax", "6", "--kmax", "2"]);
    assert!(out.lines().any(|l| l.starts_with("  6  2  38 ")), "{out}");
    let out = ok(&["sweep", "caveat", "--nmax", "2"]);
    assert!(out.contains("<= 8"));
}

#[test]
fn calibrate_and_alpha_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("alphas.txt");
    ok(&["calibrate", "--kmax", "3", "--nmax", "12", "-o", p(&table)]);
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.contains("nmax 12") && text.contains("alpha2 "));
    let out = ok(&["sweep", "alphas", "--table", p(&table)]);
    assert!(!out.contains("NO"));
}

#[test]
fn config_file_applies() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("relp.toml");
    std::fs::write(&cfg, "closure_cap = 3\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_relp"))
        .args(["lp", "weak", "--lang", "{00,000}"])
        .env("RELP_CONFIG", &cfg)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_relp")).args(["gen", "sigma", "1"]).env("RELP_CONFIG", &cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn deterministic_output() {
    let a = ok(&["lp", "strong", "--lang", "threshold 2 1"]);
    let b = ok(&["lp", "strong", "--lang", "threshold 2 1"]);
    assert_eq!(a, b);
}
