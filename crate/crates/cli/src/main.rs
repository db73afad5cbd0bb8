mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use config::Config;
use relp::certificates::{
    calibrate_alphas, certify_relaxed_dual, certify_relaxed_dual_with, certify_weak_dual, check_certificate,
    check_relaxed_dual_cert, check_weak_dual_cert, check_weak_dual_sparse, g_ratio, sigma_closure_member, AlphaTable,
    RelaxedRule, RATIO_NMAX,
};
use relp::closure::compute_closure;
use relp::lang::{gen_family, Family};
use relp::lp::{
    build_reduced_weak_primal_b_n1, build_relaxed_binomial, build_relaxed_binomial_dual, build_strong_dual,
    build_strong_primal, build_weak_dual, build_weak_primal, check_feasible, parse_lp, parse_solution, write_lp,
    write_solution, FeasibilityReport, LinearProgram, Value,
};
use relp::oracle::Oracle;
use relp::solver::{solve_with, Orientation, Status};
use relp::sweep::{b1_conjecture, bnk_conjecture, caveat, grid, SweepRow, SWEEP_HEADER};
use relp::{Error, Language, Rational, Regex};

#[derive(Parser)]
#[command(name = "relp", version, about = "Linear programming lower bounds on regular expression size")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print a generated language: `sigma N`, `binomial N K`, `threshold N K`.
    Gen {
        family: String,
        n: usize,
        k: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Build a linear program and write it in `relp-lp v1` format.
    Lp {
        kind: LpKind,
        /// Target language, `{s1,s2,..}` or a family like `sigma 2`.
        #[arg(long)]
        lang: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an LP file exactly.
    Solve {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write dual values, named by the transposed program.
        #[arg(long)]
        dual: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OrientationArg::Auto)]
        orientation: OrientationArg,
        /// Skip the floating-point warm start.
        #[arg(long)]
        exact_only: bool,
        #[arg(long)]
        max_iterations: Option<usize>,
    },
    /// Check a solution file against an LP file.
    Check {
        lp: PathBuf,
        solution: PathBuf,
        /// Accept violations up to this size; exact check when omitted.
        #[arg(long)]
        tol: Option<f64>,
        /// Floating-point check at the configured `tolerance`.
        #[arg(long, conflicts_with = "tol")]
        float: bool,
    },
    /// Turn a regular expression into a certificate for the weak dual.
    Certify {
        regex: String,
        #[arg(long)]
        lang: String,
        /// Check without building the closure (Σⁿ targets only).
        #[arg(long)]
        sparse: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn a regular expression into a certificate for the relaxed binomial dual.
    CertifyRelaxed {
        regex: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value_t = RuleArg::Auto)]
        rule: RuleArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Optimal regular expression by exhaustive search.
    Oracle {
        lang: String,
        #[arg(long)]
        max_members: Option<usize>,
    },
    /// Run a numeric experiment and print a table.
    Sweep {
        experiment: Experiment,
        #[arg(long)]
        nmin: Option<usize>,
        #[arg(long)]
        nmax: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        /// Existing α table for `alphas`; calibrates when omitted.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Search the α constants of g and write the table.
    Calibrate {
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 24)]
        nmax: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LpKind {
    Weak,
    Strong,
    WeakDual,
    StrongDual,
    Relaxed,
    RelaxedDual,
    ReducedB1,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Auto,
    Primal,
    Dual,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Auto,
    Spread,
    Complete,
}

#[derive(Clone, Copy, ValueEnum)]
enum Experiment {
    B1Conjecture,
    BnkConjecture,
    Caveat,
    Alphas,
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    msg: String,
}

const VERIFY: u8 = 1;
const RESOURCE: u8 = 2;
const INPUT: u8 = 3;

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_resource() { RESOURCE } else { INPUT }, msg: e.to_string() }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure { code: INPUT, msg: msg.into() }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = Config::from_env().map_err(input).and_then(|cfg| run(cli.command, &cfg));
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("relp: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command, cfg: &Config) -> Outcome {
    match cmd {
        Command::Gen { family, n, k, output } => {
            let fam: Family = family.parse()?;
            let l = gen_family(fam, n, k.unwrap_or(0))?;
            emit(output.as_deref(), format!("{l}\n"))
        }
        Command::Lp { kind, lang, n, k, output } => {
            let lp = build(kind, lang.as_deref(), n, k, cfg)?;
            let summary = format!("{} vars, {} rows\n", lp.vars().len(), lp.rows().len());
            match output {
                Some(p) => {
                    write_file(&p, &write_lp(&lp))?;
                    Ok(summary)
                }
                None => {
                    eprint!("{summary}");
                    Ok(write_lp(&lp))
                }
            }
        }
        Command::Solve { file, output, dual, orientation, exact_only, max_iterations } => {
            let lp = parse_lp(&read_file(&file)?)?;
            let mut opts = cfg.solver_options();
            opts.float_presolve = !exact_only;
            opts.orientation = match orientation {
                OrientationArg::Auto => Orientation::Auto,
                OrientationArg::Primal => Orientation::Primal,
                OrientationArg::Dual => Orientation::Dual,
            };
            if let Some(m) = max_iterations {
                opts.max_iterations = m;
            }
            let r = solve_with(&lp, &opts);
            if r.status == Status::Resource {
                return Err(Failure { code: RESOURCE, msg: format!("iteration cap {} reached", opts.max_iterations) });
            }
            let obj = r.objective.clone().map(Value::Exact);
            let text = write_solution(&r.status.to_string(), obj.as_ref(), r.primal.as_ref());
            if let Some(p) = dual {
                let dual_obj = obj.as_ref().filter(|_| r.dual.is_some());
                write_file(&p, &write_solution(&r.status.to_string(), dual_obj, r.dual.as_ref()))?;
            }
            match output {
                Some(p) => {
                    write_file(&p, &text)?;
                    let mut s = format!("status {}\n", r.status);
                    if let Some(v) = &r.objective {
                        s += &format!("objective {}\n", render(v));
                    }
                    Ok(s)
                }
                None => Ok(text),
            }
        }
        Command::Check { lp, solution, tol, float } => {
            let lp = parse_lp(&read_file(&lp)?)?;
            let sol = parse_solution(&read_file(&solution)?)?;
            let report = match tol.or(float.then_some(cfg.tolerance)) {
                Some(t) => {
                    let mut r = check_certificate(&lp, &sol.values.to_float());
                    let unknown: Vec<_> = r.violations.drain(..).filter(|v| v.what.starts_with("unknown")).collect();
                    let mut r2 = check_feasible(&lp, &sol.values.to_float(), t);
                    r2.violations.extend(unknown);
                    r2
                }
                None => check_certificate(&lp, &sol.values),
            };
            verdict(&report, "")
        }
        Command::Certify { regex, lang, sparse, output } => {
            let l = target(&lang)?;
            let r = Regex::parse(&regex, l.alphabet())?;
            let cert = certify_weak_dual(&r, &l)?;
            let header = format!("length {}\n", r.length());
            if let Some(p) = &output {
                let obj = Value::Exact(cert.objective());
                write_file(p, &write_solution("certificate", Some(&obj), Some(&cert.to_assignment())))?;
            }
            if sparse {
                let n = l.max_len();
                if !(l.is_uniform() && l.len() == l.alphabet().len().pow(n as u32)) {
                    return Err(input("--sparse needs a Σⁿ target"));
                }
                let check = check_weak_dual_sparse(&cert, &sigma_closure_member(n));
                let mut out = header + &format!("objective {}\n", render(&check.objective));
                if check.is_feasible() {
                    out += "feasible\n";
                    return Ok(out);
                }
                for v in check.violations.iter().take(20) {
                    let _ = writeln!(out, "violated {v}");
                }
                return Err(Failure { code: VERIFY, msg: format!("{out}infeasible") });
            }
            let closure = compute_closure(&l, cfg.closure_cap)?;
            verdict(&check_weak_dual_cert(&cert, &closure)?, &header)
        }
        Command::CertifyRelaxed { regex, n, k, rule, output } => {
            let r = Regex::parse(&regex, &relp::Alphabet::binary())?;
            let cert = match rule {
                RuleArg::Auto => certify_relaxed_dual(&r, n, k)?,
                RuleArg::Spread => certify_relaxed_dual_with(&r, n, k, RelaxedRule::Spread)?,
                RuleArg::Complete => certify_relaxed_dual_with(&r, n, k, RelaxedRule::Complete)?,
            };
            if let Some(p) = &output {
                let obj = Value::Exact(cert.objective());
                write_file(p, &write_solution("certificate", Some(&obj), Some(&cert.to_assignment())))?;
            }
            verdict(&check_relaxed_dual_cert(&cert)?, &format!("length {}\n", r.length()))
        }
        Command::Oracle { lang, max_members } => {
            let l = target(&lang)?;
            let mut caps = cfg.oracle_caps();
            if let Some(m) = max_members {
                caps.max_members = m;
            }
            let res = Oracle::new(caps).optimal_regex(&l)?;
            Ok(format!("length {}\nwitness {}\nexplored {}\n", res.length, res.witness.render(), res.explored))
        }
        Command::Sweep { experiment, nmin, nmax, kmax, table } => sweep(experiment, nmin, nmax, kmax, table, cfg),
        Command::Calibrate { kmax, nmax, output } => {
            let t = calibrate_alphas(kmax, nmax)?;
            emit(output.as_deref(), t.to_text())
        }
    }
}

fn build(kind: LpKind, lang: Option<&str>, n: Option<usize>, k: Option<usize>, cfg: &Config) -> Result<LinearProgram, Failure> {
    let need_n = || n.ok_or_else(|| input("--n is required"));
    let need_k = || k.ok_or_else(|| input("--k is required"));
    let lp = match kind {
        LpKind::Relaxed => build_relaxed_binomial(need_n()?, need_k()?)?,
        LpKind::RelaxedDual => build_relaxed_binomial_dual(need_n()?, need_k()?)?,
        LpKind::ReducedB1 => build_reduced_weak_primal_b_n1(need_n()?)?,
        _ => {
            let l = target(lang.ok_or_else(|| input("--lang is required"))?)?;
            let closure = compute_closure(&l, cfg.closure_cap)?;
            match kind {
                LpKind::Weak => build_weak_primal(&l, &closure)?,
                LpKind::Strong => build_strong_primal(&l, &closure)?,
                LpKind::WeakDual => build_weak_dual(&l, &closure)?,
                _ => build_strong_dual(&l, &closure)?,
            }
        }
    };
    Ok(lp)
}

fn sweep(exp: Experiment, nmin: Option<usize>, nmax: Option<usize>, kmax: Option<usize>, table: Option<PathBuf>, cfg: &Config) -> Outcome {
    let opts = cfg.solver_options();
    let rows: Vec<SweepRow> = match exp {
        Experiment::B1Conjecture => b1_conjecture(nmin.unwrap_or(1)..=nmax.unwrap_or(8), &opts)?,
        Experiment::BnkConjecture => {
            let lo = nmin.unwrap_or(1);
            let pairs = grid(nmax.unwrap_or(6), kmax.unwrap_or(2)).into_iter().filter(|p| p.0 >= lo);
            bnk_conjecture(pairs, &opts)?
        }
        Experiment::Caveat => caveat(nmin.unwrap_or(2)..=nmax.unwrap_or(3), cfg.closure_cap, &opts)?,
        Experiment::Alphas => {
            let t = match table {
                Some(p) => AlphaTable::parse(&read_file(&p)?)?,
                None => calibrate_alphas(kmax.unwrap_or(3), nmax.unwrap_or(24))?,
            };
            return alpha_report(&t);
        }
    };
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        let _ = writeln!(out, "{r}");
    }
    if rows.iter().any(|r| r.status == Status::Resource) {
        return Err(Failure { code: RESOURCE, msg: format!("{out}solver iteration cap reached") });
    }
    if rows.iter().all(SweepRow::holds) {
        Ok(out)
    } else {
        Err(Failure { code: VERIFY, msg: format!("{out}some rows do not hold") })
    }
}

fn alpha_report(t: &AlphaTable) -> Outcome {
    let mut out = t.to_text();
    let _ = writeln!(out, "  k    n  ratio    within");
    let mut ok = true;
    for k in 1..=t.kmax {
        let Some((lo, hi)) = t.ratio_interval(k) else {
            return Err(input(format!("table has no ratio interval for k={k}")));
        };
        for n in [8, 16, 24, 32, 64].into_iter().filter(|&n| n >= k.max(2) && n <= t.nmax.max(RATIO_NMAX)) {
            let r = g_ratio(n, k, t)?;
            let inside = lo <= r && r <= hi;
            ok &= inside;
            let _ = writeln!(out, "{k:>3} {n:>4}  {r:.4}   {}", if inside { "yes" } else { "NO" });
        }
    }
    if ok {
        Ok(out)
    } else {
        Err(Failure { code: VERIFY, msg: out })
    }
}

fn verdict(report: &FeasibilityReport, header: &str) -> Outcome {
    let mut out = header.to_string();
    let _ = writeln!(out, "objective {}", render_value(&report.objective));
    if report.is_feasible() {
        out += "feasible\n";
        return Ok(out);
    }
    for v in report.violations.iter().take(20) {
        let _ = writeln!(out, "violated {} by {}", v.what, render_value(&v.excess));
    }
    if report.violations.len() > 20 {
        let _ = writeln!(out, "... {} violations in total", report.violations.len());
    }
    Err(Failure { code: VERIFY, msg: format!("{out}infeasible") })
}

fn render(v: &Rational) -> String {
    format!("{v} ({})", v.to_decimal(4))
}

fn render_value(v: &Value) -> String {
    match v {
        Value::Exact(r) => render(r),
        Value::Float(x) => format!("{x:.4}"),
    }
}

/// `{s1,s2,..}`, `sigma N`, `binomial N K` or `threshold N K`.
fn target(text: &str) -> Result<Language, Failure> {
    let t = text.trim();
    if t.starts_with('{') {
        return Ok(Language::parse(t)?);
    }
    let parts: Vec<&str> = t.split_whitespace().collect();
    let num = |i: usize| -> Result<usize, Failure> {
        parts.get(i).map_or(Ok(0), |p| p.parse().map_err(|_| input(format!("bad number `{p}` in `{t}`"))))
    };
    match parts.first() {
        Some(f) if f.parse::<Family>().is_ok() && parts.len() <= 3 => Ok(gen_family(f.parse()?, num(1)?, num(2)?)?),
        _ => Ok(Language::parse(t)?),
    }
}

fn read_file(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| input(format!("{}: {e}", p.display())))
}

fn write_file(p: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display())))
}

fn emit(output: Option<&Path>, text: String) -> Outcome {
    match output {
        Some(p) => {
            write_file(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}
