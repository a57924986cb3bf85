//! `graphnls solve | sweep | verify`.
//!
//! Exit codes: 0 success, 1 usage or file error, 2 the run finished but the
//! mass is outside the regime where a localized state exists or certifies
//! (localization lost, edge too short, bounds not met, nothing certified),
//! 3 the numerics failed (no convergence, step collapse, failed checks of a
//! property suite).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use graphnls_core::solver::{Problem, SolverConfig};
use graphnls_core::Error;
use serde::Serialize;

use crate::format::{GraphDocument, LoadedGraph};
use crate::output::{
    profile_csv, write_json, write_text, DistanceRecord, FamilyFile, Manifest, MeshRecord, ResultFile,
    SolverRecord, StateRecord, Status, Timings,
};
use crate::suites::{default_trials, run_suite, SuiteReport, SUITES};
use crate::sweep::{parallel_sweep, solve_and_certify, thread_budget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REGIME: i32 = 2;
pub const EXIT_NUMERICS: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "graphnls", version, about = "Localized NLS bound states on metric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the energy among states peaked on one bounded edge.
    Solve(SolveArgs),
    /// Solve on every bounded edge and compare the states.
    Sweep(SweepArgs),
    /// Run a property suite on random inputs.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Graph document (JSON).
    #[arg(long)]
    graph: PathBuf,
    /// Mass.
    #[arg(long)]
    mu: f64,
    /// Nonlinearity exponent in (2, 6); defaults to the document's `p`.
    #[arg(long)]
    p: Option<f64>,
    /// Largest cell size.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    /// Share of the soliton mass allowed beyond a halfline cut.
    #[arg(long)]
    tail_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Slack of the upper energy bound.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Id of the bounded edge carrying the maximum.
    #[arg(long)]
    edge: String,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Continuation masses below `--mu`, comma separated.
    #[arg(long, value_delimiter = ',')]
    mu_ladder: Vec<f64>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// One of soliton, gn, rearrangement, bounds, gradient.
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 4.0)]
    p: f64,
    /// Random inputs per suite (suite-specific default).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Parse `args` (program name first) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Verify(a) => verify(a),
    };
    outcome.unwrap_or_else(|msg| {
        eprintln!("error: {msg}");
        EXIT_USAGE
    })
}

/// Exit code of a finished localized solve.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Certified => EXIT_OK,
        Status::Uncertified | Status::LocalizationLost | Status::EdgeTooShortForMass => EXIT_REGIME,
        Status::NotConverged | Status::StepCollapse | Status::Failed => EXIT_NUMERICS,
    }
}

struct Prepared {
    loaded: LoadedGraph,
    cfg: SolverConfig,
}

fn prepare(a: &RunArgs) -> Result<Prepared, String> {
    let loaded = GraphDocument::load(&a.graph)?.build()?;
    let p = a.p.or(loaded.p).ok_or("no exponent: pass --p or set \"p\" in the graph document")?;
    let mut cfg = SolverConfig::new(p, a.mu);
    cfg.resolution = a.resolution;
    cfg.seed = a.seed;
    if let Some(t) = a.tail_tol {
        cfg.tail_tol = t;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    if !(a.epsilon >= 0.0 && a.epsilon < 1.0) {
        return Err(format!("--epsilon must lie in [0, 1), got {}", a.epsilon));
    }
    Ok(Prepared { loaded, cfg })
}

fn solve(a: SolveArgs) -> Result<i32, String> {
    let mut clock = Timings::default();
    let Prepared { loaded, cfg } = prepare(&a.run)?;
    let g = &loaded.graph;
    let e = g.edge_index(&a.edge).ok_or_else(|| format!("no edge {:?} in {}", a.edge, a.run.graph.display()))?;
    if !g.edges()[e].is_bounded() {
        return Err(Error::NotBounded { edge: a.edge.clone() }.to_string());
    }
    let problem = Problem::new(g, &loaded.potential, cfg.clone()).map_err(|e| e.to_string())?;
    clock.lap("setup");
    let outcome = solve_and_certify(&problem, e, &[], a.run.epsilon);
    clock.lap("solve");

    let out = &a.run.out;
    let profile = match &outcome {
        Ok((r, _)) => {
            write_text(&out.join("profile.csv"), &profile_csv(g, &r.state))?;
            Some("profile.csv".to_string())
        }
        Err(_) => None,
    };
    let manifest = Manifest::new(
        "solve",
        Some(&a.run.graph),
        SolverRecord::new(&cfg, a.run.epsilon, &[]),
        Some(MeshRecord::new(g, problem.mesh())),
    );
    let state = StateRecord::new(g, e, cfg.mu, &outcome, profile);
    summarize(&state);
    write_json(&out.join("result.json"), &ResultFile { manifest, state })?;
    clock.lap("write");
    clock.write(out)?;
    Ok(exit_code(Status::of(&outcome)))
}

fn summarize(s: &StateRecord) {
    match (&s.energy, &s.error) {
        (Some(en), _) => println!(
            "{}: {} E={:.10} lambda={:.6} sup_gap={:.4e} residual={:.2e}",
            s.edge,
            s.status,
            en.total,
            s.lambda.unwrap_or(f64::NAN),
            s.sup_gap.unwrap_or(f64::NAN),
            s.residuals.as_ref().map_or(f64::NAN, |r| r.pde_residual),
        ),
        (None, err) => println!("{}: {} ({})", s.edge, s.status, err.as_deref().unwrap_or("")),
    }
}

fn sweep(a: SweepArgs) -> Result<i32, String> {
    let mut clock = Timings::default();
    let Prepared { loaded, cfg } = prepare(&a.run)?;
    let g = &loaded.graph;
    if let Some(bad) = a.mu_ladder.iter().find(|m| !(**m > 0.0) || !m.is_finite()) {
        return Err(format!("--mu-ladder entries must be positive, got {bad}"));
    }
    clock.lap("setup");
    let result = match parallel_sweep(g, &loaded.potential, &cfg, &a.mu_ladder, a.run.epsilon, thread_budget()) {
        Err(Error::NoBoundedEdge) => {
            return Err(format!("{} has no bounded edge: nothing to sweep", a.run.graph.display()))
        }
        other => other.map_err(|e| e.to_string())?,
    };
    clock.lap("solve");

    let out = &a.run.out;
    let mut entries = Vec::new();
    for (e, outcome) in result.outcomes() {
        let name = &g.edges()[e].name;
        let profile = match &outcome {
            Ok((r, _)) => {
                let file = format!("profile_{name}.csv");
                write_text(&out.join(&file), &profile_csv(g, &r.state))?;
                Some(file)
            }
            Err(_) => None,
        };
        let state = StateRecord::new(g, e, cfg.mu, &outcome, profile);
        summarize(&state);
        entries.push(state);
    }
    let mesh = Some(MeshRecord::new(g, &result.mesh));
    let certified = result.certified_count();
    let file = FamilyFile {
        manifest: Manifest::new("sweep", Some(&a.run.graph), SolverRecord::new(&cfg, a.run.epsilon, &a.mu_ladder), mesh),
        mu: cfg.mu,
        certified,
        entries,
        distances: result
            .family
            .distances
            .iter()
            .map(|&(x, y, d)| DistanceRecord {
                a: g.edges()[x].name.clone(),
                b: g.edges()[y].name.clone(),
                distance: d,
            })
            .collect(),
        distinct: result.family.distinct,
    };
    println!("{certified} of {} bounded edges certified", file.entries.len());
    write_json(&out.join("family.json"), &file)?;
    clock.lap("write");
    clock.write(out)?;
    Ok(if certified > 0 { EXIT_OK } else { EXIT_REGIME })
}

#[derive(Debug, Serialize)]
struct VerifyConfig<'a> {
    suite: &'a str,
    p: f64,
    trials: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct VerifyFile<'a> {
    manifest: Manifest<VerifyConfig<'a>>,
    #[serde(flatten)]
    report: SuiteReport,
}

fn verify(a: VerifyArgs) -> Result<i32, String> {
    let mut clock = Timings::default();
    let trials = a.trials.unwrap_or_else(|| default_trials(&a.suite));
    let report = run_suite(&a.suite, a.p, trials, a.seed)
        .ok_or_else(|| format!("unknown suite {:?}; expected one of {}", a.suite, SUITES.join(", ")))??;
    clock.lap("run");
    println!(
        "{}: {} checks, {} failed, worst margin {:e}",
        report.suite,
        report.checks.len(),
        report.failures,
        report.worst_margin
    );
    for c in report.checks.iter().filter(|c| !c.passed).take(10) {
        println!("  FAIL {} value={:e} bound={:e}", c.name, c.value, c.bound);
    }
    let passed = report.all_passed;
    let config = VerifyConfig { suite: &a.suite, p: a.p, trials, seed: a.seed };
    let file = VerifyFile { manifest: Manifest::new("verify", None::<&Path>, config, None), report };
    write_json(&a.out.join("verify.json"), &file)?;
    clock.lap("write");
    clock.write(&a.out)?;
    Ok(if passed { EXIT_OK } else { EXIT_NUMERICS })
}
