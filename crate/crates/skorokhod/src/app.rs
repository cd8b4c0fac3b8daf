//! Command implementations behind the `skorokhod` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use skorokhod_core::regulated::RegulatedPath;
use skorokhod_core::sde::{solve, SdeSolution};
use skorokhod_core::semimartingale::{quadratic_variation, simulate_driver, total_variation, SemimartingalePath};
use skorokhod_core::two_sided::{check_rp_conditions, reflect, sup_distance, ReflectionSolution, Route};

use crate::config::LoadedConfig;
use crate::csv_io::{self, format_f64};
use crate::error::{classify, CliError};
use crate::manifest::{OutputDir, RunManifest};
use crate::verify::{self, Suite, SuiteReport};

pub const OUT_DIR_ENV: &str = "SKOROKHOD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "skorokhod", version, about = "Two-barrier reflection of regulated paths and reflected SDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflect a path between two barriers.
    Reflect(ReflectArgs),
    /// Solve a reflected SDE from a config file, for one seed or a batch.
    Solve(SolveArgs),
    /// Run a randomized invariant suite.
    Verify(VerifyArgs),
    /// Simulate the driver of a config file without solving.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RouteChoice {
    Explicit,
    Recursive,
    Composed,
    All,
}

impl RouteChoice {
    fn routes(self) -> Vec<Route> {
        match self {
            RouteChoice::Explicit => vec![Route::Explicit],
            RouteChoice::Recursive => vec![Route::Recursive],
            RouteChoice::Composed => vec![Route::Composed],
            RouteChoice::All => Route::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ReflectArgs {
    /// CSV of the input path.
    #[arg(long)]
    pub y: PathBuf,
    /// CSV of the lower barrier.
    #[arg(long)]
    pub l: PathBuf,
    /// CSV of the upper barrier.
    #[arg(long)]
    pub u: PathBuf,
    #[arg(long, value_enum, default_value = "recursive")]
    pub route: RouteChoice,
    /// Residual tolerance of the condition check.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub config: PathBuf,
    /// First seed (defaults to `solver.seed`).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 1)]
    pub batch: u64,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    /// Trials per suite (suite default when absent).
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance (suite default when absent).
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "out")]
    pub out_dir: PathBuf,
}

/// Runs a parsed command line; human-readable output goes to stdout.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reflect(a) => cmd_reflect(&a).map(drop),
        Command::Solve(a) => cmd_solve(&a).map(drop),
        Command::Verify(a) => cmd_verify(&a).map(drop),
        Command::Simulate(a) => cmd_simulate(&a).map(drop),
    }
}

fn write_solution(out: &mut OutputDir, dir: &str, sol: &ReflectionSolution) -> Result<(), CliError> {
    for (name, p) in [("x", &sol.x), ("k", &sol.k), ("phi1", &sol.phi1), ("phi2", &sol.phi2)] {
        out.write(format!("{dir}/{name}.csv"), |f| csv_io::write_path(f, p))?;
    }
    Ok(())
}

pub fn cmd_reflect(a: &ReflectArgs) -> Result<RunManifest, CliError> {
    let read = |p: &Path| csv_io::read_path(p).map_err(CliError::input);
    let (y, l, u) = (read(&a.y)?, read(&a.l)?, read(&a.u)?);
    let mut out = OutputDir::create(&a.out)?;
    let mut sols = Vec::new();
    let mut failed = Vec::new();
    for route in a.route.routes() {
        let sol = reflect(route, &y, &l, &u).map_err(classify)?;
        // the check runs on the common grid of the solution
        let [yy, ll, uu] = [&y, &l, &u].map(|p| p.resample(sol.x.times()));
        let report = check_rp_conditions(&sol, &yy, &ll, &uu, a.tol).map_err(classify)?;
        write_solution(&mut out, route.name(), &sol)?;
        let text = format!("route {}\ntol {}\n{report}", route.name(), a.tol);
        out.write_text(format!("{}/report.txt", route.name()), &text)?;
        print!("{text}");
        if !report.all_pass() {
            failed.push(route.name());
        }
        sols.push((route, sol));
    }
    if sols.len() > 1 {
        let mut rows = Vec::new();
        let mut text = String::from("pairwise route distances (x, k)\n");
        for i in 0..sols.len() {
            for j in i + 1..sols.len() {
                let dx = sup_distance(&sols[i].1.x, &sols[j].1.x);
                let dk = sup_distance(&sols[i].1.k, &sols[j].1.k);
                let _ =
                    writeln!(text, "{} {} {} {}", sols[i].0.name(), sols[j].0.name(), format_f64(dx), format_f64(dk));
                rows.push(vec![
                    sols[i].0.name().to_string(),
                    sols[j].0.name().to_string(),
                    format_f64(dx),
                    format_f64(dk),
                ]);
            }
        }
        out.write("distances.csv", |f| {
            csv_io::write_records(f, &["route_a", "route_b", "x_distance", "k_distance"], rows)
        })?;
        print!("{text}");
    }
    let manifest = out.finish("reflect", None, vec![])?;
    if failed.is_empty() {
        Ok(manifest)
    } else {
        Err(CliError::Condition(format!("route(s) {} fail the reflection conditions", failed.join(", "))))
    }
}

/// Result of one seed of a solve batch.
struct SeedRun {
    seed: u64,
    outcome: Result<SdeSolution, skorokhod_core::Error>,
}

#[derive(Debug, Serialize)]
pub struct BatchSummary {
    pub seeds: Vec<u64>,
    pub solved: usize,
    /// `(seed, error)` for every seed the solver gave up on.
    pub solver_failures: Vec<(u64, String)>,
    /// Seeds whose solution failed a condition check.
    pub condition_failures: Vec<u64>,
    /// Slots with `X` outside `[L, U]`, over all seeds.
    pub containment_violations: usize,
    pub identity_residual_max: f64,
    pub halvings_max: u32,
    pub iterations_max: usize,
}

fn solve_seeds(cfg: &LoadedConfig, seeds: &[u64]) -> Vec<SeedRun> {
    let one = |seed: u64| SeedRun {
        seed,
        outcome: simulate_driver(&cfg.config.driver, seed).and_then(|d| cfg.problem(d)).and_then(|p| solve(&p)),
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(seeds.len().max(1));
    if threads <= 1 {
        return seeds.iter().map(|&s| one(s)).collect();
    }
    let chunk = seeds.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> =
            seeds.chunks(chunk).map(|c| scope.spawn(move || c.iter().map(|&s| one(s)).collect::<Vec<_>>())).collect();
        handles.into_iter().flat_map(|h| h.join().expect("solver thread panicked")).collect()
    })
}

fn containment_violations(sol: &SdeSolution, cfg: &LoadedConfig) -> usize {
    let Ok(pair) = cfg.barriers(sol.x.times()) else { return 0 };
    let (l, u) = (pair.lower().resample(sol.x.times()), pair.upper().resample(sol.x.times()));
    sol.x.slots().zip(l.slots().zip(u.slots())).filter(|(x, (lo, hi))| x < lo || x > hi).count()
}

fn write_seed(out: &mut OutputDir, run: &SeedRun, sol: &SdeSolution) -> Result<(), CliError> {
    let dir = format!("seed_{}", run.seed);
    for (name, p) in [("x", &sol.x), ("k", &sol.k), ("y", &sol.y)] {
        out.write(format!("{dir}/{name}.csv"), |f| csv_io::write_path(f, p))?;
    }
    out.write(format!("{dir}/tau.csv"), |f| csv_io::write_table(f, &["tau"], sol.tau_times.iter().map(|&t| vec![t])))?;
    let rows = sol.intervals.iter().enumerate().map(|(i, iv)| {
        vec![
            i.to_string(),
            format_f64(iv.start_time),
            format_f64(iv.end_time),
            iv.iterations.to_string(),
            format_f64(iv.ratio),
            format_f64(iv.residuals.last().copied().unwrap_or(0.0)),
            u8::from(iv.monotone).to_string(),
        ]
    });
    let header = ["interval", "start", "end", "iterations", "ratio", "final_residual", "monotone"];
    out.write(format!("{dir}/picard.csv"), |f| csv_io::write_records(f, &header, rows))?;
    let text =
        format!("seed {}\nm_used {}\nhalvings {}\n{}", run.seed, format_f64(sol.m_used), sol.halvings, sol.report);
    out.write_text(format!("{dir}/report.txt"), &text)
}

pub fn cmd_solve(a: &SolveArgs) -> Result<(RunManifest, BatchSummary), CliError> {
    let cfg = LoadedConfig::load(&a.config).map_err(CliError::Input)?;
    if a.batch == 0 {
        return Err(CliError::input(anyhow::anyhow!("--batch must be at least 1")));
    }
    let first = a.seed.unwrap_or(cfg.config.solver.seed);
    let seeds: Vec<u64> = (0..a.batch).map(|i| first.wrapping_add(i)).collect();
    // reject bad barriers or coefficients before any work
    let grid = cfg.config.driver.grid();
    cfg.problem(SemimartingalePath::zero(&grid).map_err(CliError::input)?).map_err(CliError::input)?;

    let runs = solve_seeds(&cfg, &seeds);
    let mut out = OutputDir::create(&a.out_dir)?;
    let mut summary = BatchSummary {
        seeds: seeds.clone(),
        solved: 0,
        solver_failures: Vec::new(),
        condition_failures: Vec::new(),
        containment_violations: 0,
        identity_residual_max: 0.0,
        halvings_max: 0,
        iterations_max: 0,
    };
    for run in &runs {
        match &run.outcome {
            Ok(sol) => {
                write_seed(&mut out, run, sol)?;
                summary.solved += 1;
                if !sol.report.all_pass() {
                    summary.condition_failures.push(run.seed);
                }
                summary.containment_violations += containment_violations(sol, &cfg);
                let identity = sol.report.get("X = X0").map_or(f64::NAN, |c| c.residual);
                summary.identity_residual_max = summary.identity_residual_max.max(identity);
                summary.halvings_max = summary.halvings_max.max(sol.halvings);
                let iters = sol.intervals.iter().map(|iv| iv.iterations).max().unwrap_or(0);
                summary.iterations_max = summary.iterations_max.max(iters);
            }
            Err(e) => summary.solver_failures.push((run.seed, e.to_string())),
        }
    }
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    out.write_text("summary.json", &json)?;
    print!("{json}");
    let manifest = out.finish("solve", Some(cfg.digest.clone()), seeds)?;

    if let Some((seed, _)) = summary.solver_failures.first() {
        let run = runs.iter().find(|r| r.seed == *seed).expect("failed seed was run");
        return Err(classify(run.outcome.clone().expect_err("recorded as a failure")));
    }
    if !summary.condition_failures.is_empty() {
        return Err(CliError::Condition(format!("seeds {:?} fail the SDE conditions", summary.condition_failures)));
    }
    Ok((manifest, summary))
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<Vec<SuiteReport>, CliError> {
    let reports = match a.suite {
        Suite::All => verify::run_all(a.trials, a.seed, a.tol),
        s => vec![verify::run(s, a.trials.unwrap_or(s.default_trials()), a.seed, a.tol)],
    };
    println!("{}", serde_json::to_string_pretty(&reports).expect("reports serialize"));
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite).collect();
    if failed.is_empty() {
        Ok(reports)
    } else {
        Err(CliError::Suite(failed.join(", ")))
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<RunManifest, CliError> {
    let cfg = LoadedConfig::load(&a.config).map_err(CliError::Input)?;
    let seed = a.seed.unwrap_or(cfg.config.solver.seed);
    let d = simulate_driver(&cfg.config.driver, seed).map_err(CliError::input)?;
    let mut out = OutputDir::create(&a.out_dir)?;
    let paths: [(&str, RegulatedPath); 10] = [
        ("mc", d.mc.clone()),
        ("md", d.md.clone()),
        ("mg", d.mg.clone()),
        ("vr", d.vr.clone()),
        ("vg", d.vg.clone()),
        ("m", d.martingale()),
        ("v", d.finite_variation()),
        ("total", d.total()),
        ("bracket", quadratic_variation(&d)),
        ("variation", total_variation(&d)),
    ];
    for (name, p) in &paths {
        out.write(format!("{name}.csv"), |f| csv_io::write_path(f, p))?;
    }
    println!("simulated {} grid points with seed {seed} into {}", d.len(), out.root().display());
    out.finish("simulate", Some(cfg.digest.clone()), vec![seed])
}
