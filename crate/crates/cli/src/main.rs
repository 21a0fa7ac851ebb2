#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use escape_atlas::cover::{annulus_image_covers, check_corollary, log_uniform_targets, BranchAnnuli, BranchVerdict};
use escape_atlas::efun::FunctionSpec;
use escape_atlas::escape::{build_interval_chain, classify_grid, classify_point, construct_fast_orbit, GridResult};
use escape_atlas::hardy::{
    alpha0_inclusion_check, figure1, fixed_points_real, gsize_check, hardy_locus_check, sector_bounds_check,
};
use escape_atlas::maxmod::{
    build_ladder, check_growth_lemmas, dtau_report, epsilon_r, max_modulus, max_modulus_sampled, min_modulus,
    min_modulus_sampled, psi_c, trace_maxmod_locus,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_DOMAIN: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
enum Failure {
    Domain(String),
    Io(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Domain(e.to_string())
    }
}

/// What a command produced: a JSON report and whether its checks passed.
struct Report {
    result: Value,
    verified: bool,
}

fn report<T: Serialize>(value: &T, verified: bool) -> Result<Report, Failure> {
    let result = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
    Ok(Report { result, verified })
}

fn domain(msg: impl Into<String>) -> Failure {
    Failure::Domain(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), Failure> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be positive and finite (got {v})")))
    }
}

fn main() -> ExitCode {
    let mut cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    cli.command.resolve();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_DOMAIN);
        }
    }
    match run(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("{}: verification failed", cli.command.name());
            ExitCode::from(EXIT_VERIFY)
        }
        Err(Failure::Domain(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_DOMAIN)
        }
    }
}

/// Wraps a result with the run configuration that produced it.
fn document(cmd: &Command, result: Value) -> Value {
    json!({ "config": cmd, "result": result })
}

fn to_pretty(v: &Value) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Failure::Io(e.to_string()))?;
    s.push(b'\n');
    Ok(s)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn emit(out: &Option<PathBuf>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => write_file(p, bytes),
        None => std::io::stdout().lock().write_all(bytes).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn run(cmd: &Command) -> Result<bool, Failure> {
    match cmd {
        Command::ClassifyGrid(a) => {
            let f = a.f.spec()?;
            let cfg = a.classifier.config();
            cfg.validate()?;
            let g = classify_grid(&f, a.window.0, a.res.width, a.res.height, &cfg)?;
            write_file(&a.out, &g.to_pgm())?;
            let legend = json!({
                "pgm": a.out,
                "width": g.width,
                "height": g.height,
                "window": g.window,
                "ladder_r": g.ladder_r,
                "legend": GridResult::legend(),
                "histogram": g.histogram,
            });
            write_file(&sidecar(&a.out), &to_pretty(&document(cmd, legend))?)?;
            Ok(true)
        }
        other => {
            let out = out_path(other);
            let r = dispatch(other)?;
            emit(&out, &to_pretty(&document(cmd, r.result))?)?;
            Ok(r.verified)
        }
    }
}

fn out_path(cmd: &Command) -> Option<PathBuf> {
    match cmd {
        Command::ClassifyGrid(a) => Some(a.out.clone()),
        Command::Figure1(a) => Some(sidecar(&a.out)),
        Command::ClassifyPoint(a) => a.out.out.clone(),
        Command::Maxmod(a) | Command::Minmod(a) => a.out.out.clone(),
        Command::Ladder(a) => a.out.out.clone(),
        Command::PsiC(a) => a.out.out.clone(),
        Command::EpsilonR(a) => a.out.out.clone(),
        Command::Dtau(a) => a.out.out.clone(),
        Command::LemmaCheck(a) => a.out.out.clone(),
        Command::Locus(a) => a.out.out.clone(),
        Command::CoverCheck(a) => a.out.out.clone(),
        Command::CorollaryCheck(a) => a.out.out.clone(),
        Command::FastOrbit(a) => a.out.out.clone(),
        Command::IntervalChain(a) => a.out.out.clone(),
        Command::HardyFixedPoints(a) => a.out.out.clone(),
        Command::HardyLocus(a) => a.out.out.clone(),
        Command::SectorCheck(a) => a.out.out.clone(),
        Command::GsizeCheck(a) => a.out.out.clone(),
    }
}

fn dispatch(cmd: &Command) -> Result<Report, Failure> {
    match cmd {
        Command::ClassifyGrid(_) => unreachable!("handled in run"),
        Command::ClassifyPoint(a) => {
            let f = a.f.spec()?;
            let cfg = a.classifier.config();
            cfg.validate()?;
            let c = classify_point(&f, Complex64::new(a.z.re, a.z.im), &cfg)?;
            report(&c, true)
        }
        Command::Maxmod(a) | Command::Minmod(a) => {
            let f = a.f.spec()?;
            let is_max = matches!(cmd, Command::Maxmod(_));
            let mut rows = Vec::new();
            for r in a.r.values() {
                positive("r", r)?;
                let m = match (is_max, a.sampled) {
                    (true, false) => max_modulus(&f, r),
                    (true, true) => max_modulus_sampled(&f, r),
                    (false, false) => min_modulus(&f, r),
                    (false, true) => min_modulus_sampled(&f, r),
                };
                rows.push(json!({ "r": r, "logmod": m.logmod, "angles": m.angles, "closed_form": m.closed_form }));
            }
            report(&json!({ "function": f, "rows": rows }), true)
        }
        Command::Ladder(a) => {
            let f = a.f.spec()?;
            positive("r", a.r)?;
            report(&build_ladder(&f, a.r, a.n)?, true)
        }
        Command::PsiC(a) => {
            let f = a.f.spec()?;
            let rows = a.r.values().into_iter().map(|r| psi_c(&f, a.c, r, a.n_max)).collect::<Result<Vec<_>, _>>()?;
            report(&json!({ "function": f, "rows": rows }), true)
        }
        Command::EpsilonR(a) => {
            let f = a.f.spec()?;
            let rows = a
                .r
                .values()
                .into_iter()
                .map(|r| epsilon_r(&f, a.lambda, a.lambda_p, a.lambda_pp, r, a.c_param))
                .collect::<Result<Vec<_>, _>>()?;
            report(&json!({ "function": f, "rows": rows }), true)
        }
        Command::Dtau(a) => report(&dtau_report(a.tau)?, true),
        Command::LemmaCheck(a) => {
            let f = a.f.spec()?;
            let lemmas: Vec<_> = a.lemma.iter().map(|l| l.lemma()).collect();
            let grid = a.r.values();
            for &r in &grid {
                positive("r", r)?;
            }
            if a.n_max == 0 {
                return Err(domain("n_max must be at least 1"));
            }
            let rep = check_growth_lemmas(&f, &lemmas, &grid, &a.c.0, &a.d.0, a.n_max)?;
            // an inequality that fails only below some radius is the expected shape
            let ok = rep.thresholds.iter().all(|t| t.holds_from.is_some());
            report(&rep, ok)
        }
        Command::Locus(a) => {
            let f = a.f.spec()?;
            positive("r", a.r.start)?;
            let curves = trace_maxmod_locus(&f, a.r.start, a.r.stop, a.r.step);
            let ok = curves.iter().all(|c| c.invariant_holds());
            report(&json!({ "function": f, "curves": curves }), ok)
        }
        Command::CoverCheck(a) => {
            let f = a.f.spec()?;
            positive("r", a.r)?;
            positive("w_min", a.w_min)?;
            if !(a.w_max >= a.w_min) || !(a.lambda_pp > 1.0) || a.n == 0 {
                return Err(domain("cover-check needs w_max >= w_min, lambda_pp > 1 and n >= 1"));
            }
            let targets = log_uniform_targets(a.w_min, a.w_max, a.targets);
            let rep = annulus_image_covers(&f, a.n, a.r, a.lambda_pp, &targets)?;
            if let Some(p) = &a.csv {
                let mut w = csv::Writer::from_path(p).map_err(|e| Failure::Io(e.to_string()))?;
                w.write_record(["re", "im", "modulus"]).map_err(|e| Failure::Io(e.to_string()))?;
                for t in &rep.uncovered_targets {
                    w.write_record([t.re.to_string(), t.im.to_string(), t.norm().to_string()])
                        .map_err(|e| Failure::Io(e.to_string()))?;
                }
                w.flush().map_err(|e| Failure::Io(e.to_string()))?;
            }
            report(&rep, true)
        }
        Command::CorollaryCheck(a) => {
            let f = a.f.spec()?;
            positive("r", a.r)?;
            let annuli = BranchAnnuli { s: a.s, s_p: a.s_p, t: a.t, t_p: a.t_p };
            let rep = check_corollary(&f, a.n, a.r, annuli, a.targets)?;
            let ok = rep.branch_verdict != Some(BranchVerdict::Neither);
            report(&rep, ok)
        }
        Command::FastOrbit(a) => {
            let f = a.f.spec()?;
            positive("r1", a.r1)?;
            let orbit = construct_fast_orbit(&f, a.r1, a.k_max)?;
            let ok = orbit.failure.is_none();
            report(&orbit, ok)
        }
        Command::IntervalChain(a) => {
            let f = FunctionSpec::hardy_g(a.alpha)?;
            let choices = a.choices.clone().unwrap_or_else(|| "0".repeat(a.depth));
            let chain = build_interval_chain(&f, a.mode.mode(), a.depth, &choices, a.k0)?;
            let ok = chain.certified && chain.nested;
            report(&chain, ok)
        }
        Command::HardyFixedPoints(a) => report(&fixed_points_real(a.alpha)?, true),
        Command::HardyLocus(a) => {
            let rep = hardy_locus_check(a.alpha, &a.r.values())?;
            let ok = rep.failed == 0;
            report(&rep, ok)
        }
        Command::Figure1(a) => {
            positive("alpha", a.alpha)?;
            let curves = figure1(a.x_start, a.x_max, a.step, a.curves)?;
            let mut w = csv::Writer::from_path(&a.out).map_err(|e| Failure::Io(e.to_string()))?;
            w.write_record(["curve", "theta", "x", "y", "log_abs_y", "residual"])
                .map_err(|e| Failure::Io(e.to_string()))?;
            for (i, c) in curves.iter().enumerate() {
                for p in &c.points {
                    w.write_record([
                        i.to_string(),
                        c.theta_target.to_string(),
                        p.x.to_string(),
                        p.y.to_string(),
                        p.log_abs_y.to_string(),
                        p.residual.to_string(),
                    ])
                    .map_err(|e| Failure::Io(e.to_string()))?;
                }
            }
            w.flush().map_err(|e| Failure::Io(e.to_string()))?;
            let summary: Vec<Value> = curves
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    json!({
                        "curve": i,
                        "theta": c.theta_target,
                        "points": c.points.len(),
                        "max_residual": c.max_residual(),
                        "halted": c.halted,
                    })
                })
                .collect();
            report(&json!({ "csv": a.out, "curves": summary }), true)
        }
        Command::SectorCheck(a) => {
            let rep = sector_bounds_check(a.alpha, a.k, a.samples)?;
            let inclusion = a.inclusion_k.map(|k| alpha0_inclusion_check(a.alpha, k)).transpose()?;
            let ok = rep.holds_for_k && inclusion.as_ref().is_none_or(|i| i.holds);
            report(&json!({ "sector": rep, "inclusion": inclusion }), ok)
        }
        Command::GsizeCheck(a) => {
            let rep = gsize_check(a.alpha, a.x, a.n_max)?;
            let ok = rep.all_hold;
            report(&rep, ok)
        }
    }
}
