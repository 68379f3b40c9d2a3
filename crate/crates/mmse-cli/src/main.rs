//! Command-line frontend for robust mean-square estimation.
//!
//! Subcommands: `estimate` (solve + certify + report), `verify` (adds a
//! multi-start uniqueness probe), `stability` (sampled pasting-stability
//! check), `oracle` (exhaustive cross-checks plus CSV sweeps), `scenario`
//! (emit built-in scenarios), and `props` (randomized invariant battery).
//!
//! Exit codes are uniform: 0 success, 1 input/schema/parameter errors,
//! 2 non-convergence (or an inconclusive check), 3 a failed certificate.
//! Reports are written even when the run exits nonzero, so a failure can
//! always be inspected offline.

mod props;

use clap::{Args, Parser, Subcommand};
use mmse::ambiguity::StabilityVerdict;
use mmse::oracle::{brute_force_estimate, grid_maximize_g};
use mmse::scenarios::io::{self, float17};
use mmse::scenarios::{
    example_41, example_42_truncated, example_43_tree, Ex42Closure, Scenario,
};
use mmse::solver::{
    objective_g, solve_mmse, uniqueness_probe, verify_saddle, EstimatorSolution, SaddleReport,
};
use mmse::space::Partition;
use mmse::ambiguity::MixtureWeights;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_INPUT: u8 = 1;
const EXIT_UNCONVERGED: u8 = 2;
const EXIT_FAILED_CHECK: u8 = 3;

/// The runtime ignores SIGPIPE, so writing to a consumer that hung up (e.g.
/// `mmse ... | head`) surfaces as an io error instead of killing the process.
fn stdout_write_failed(err: std::io::Error) -> ! {
    if err.kind() == std::io::ErrorKind::BrokenPipe {
        // The reader chose to stop; any report file is already on disk.
        std::process::exit(0);
    }
    let _ = writeln!(std::io::stderr(), "error: cannot write to stdout: {err}");
    std::process::exit(i32::from(EXIT_INPUT));
}

macro_rules! out {
    ($($arg:tt)*) => {
        if let Err(err) = write!(std::io::stdout(), $($arg)*) {
            stdout_write_failed(err);
        }
    };
}

macro_rules! outln {
    ($($arg:tt)*) => {
        if let Err(err) = writeln!(std::io::stdout(), $($arg)*) {
            stdout_write_failed(err);
        }
    };
}

#[derive(Parser, Debug)]
#[command(
    name = "mmse",
    version,
    about = "Minimax mean-square estimation under ambiguity",
    arg_required_else_help = true
)]
struct Cli {
    #[command(flatten)]
    config: Config,

    #[command(subcommand)]
    command: Command,
}

/// Run configuration shared by every subcommand.
#[derive(Args, Debug, Clone, Copy)]
pub(crate) struct Config {
    /// Duality-gap tolerance for the solver (env MMSE_TOL; the flag wins).
    #[arg(long, global = true, env = "MMSE_TOL", default_value_t = mmse::tol::DEFAULT_SOLVER_TOL)]
    pub(crate) tol: f64,

    /// Iteration cap for the solver.
    #[arg(long, global = true, default_value_t = mmse::tol::DEFAULT_MAX_ITER)]
    pub(crate) max_iter: usize,

    /// Seed for every randomized probe and generator.
    #[arg(long, global = true, default_value_t = 42)]
    pub(crate) seed: u64,

    /// Run independent cases on a thread pool; results are reduced in case
    /// order, so output stays byte-identical to a sequential run.
    #[arg(long, global = true)]
    pub(crate) parallel: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve a scenario file, verify the saddle, and write a report.
    Estimate {
        /// Scenario file (schema "mmse-scenario/1").
        scenario: PathBuf,
        /// Report path; defaults to the scenario path with extension
        /// `report.json`. The report is written even on failure.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Solve, verify the saddle, and probe uniqueness from many starts.
    Verify {
        /// Scenario file (schema "mmse-scenario/1").
        scenario: PathBuf,
        /// Report path; defaults to the scenario path with extension
        /// `report.json`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Number of solver restarts in the uniqueness probe (min 2).
        #[arg(long, default_value_t = 6)]
        restarts: usize,
    },

    /// Check pasting stability of the ambiguity set by sampling the hull.
    Stability {
        /// Scenario file (schema "mmse-scenario/1").
        scenario: PathBuf,
        /// Number of sampled mixtures (vertices and barycenter are always
        /// included; must be at least the vertex count).
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },

    /// Cross-check the solver against exhaustive desk-scale oracles.
    Oracle {
        /// Scenario file (schema "mmse-scenario/1").
        scenario: PathBuf,
        /// Mixture-simplex grid step for the exhaustive search.
        #[arg(long, default_value_t = 1e-2)]
        grid: f64,
        /// Write the objective along every vertex-to-vertex segment as CSV
        /// (columns: from,to,lambda,g) for external plotting.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Write a built-in scenario to a file.
    Scenario {
        /// One of: ex41, ex42, tree.
        name: String,
        /// Truncation level for ex42.
        #[arg(long = "N", default_value_t = 40)]
        n: usize,
        /// Tree depth for tree.
        #[arg(long, default_value_t = 2)]
        depth: usize,
        /// Drift tilt for tree, in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        tilt: f64,
        /// Output path; defaults to `<scenario-name>.json` in the current
        /// directory. ex42 also writes `<stem>.closure.json`; tree also
        /// writes `<stem>.filtration.json`.
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Run the randomized invariant battery and print per-property counts.
    Props {
        /// Number of random scenarios to generate and test.
        #[arg(long, default_value_t = 200)]
        cases: usize,
        /// Self-test of the harness: negate the sub-additivity check so the
        /// suite must fail.
        #[arg(long, hide = true)]
        inject_bug: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not errors.
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                out!("{err}");
                return ExitCode::SUCCESS;
            }
            eprint!("{err}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn run(cli: Cli) -> CliResult<ExitCode> {
    let cfg = cli.config;
    if !(cfg.tol.is_finite() && cfg.tol > 0.0) {
        return Err(format!("--tol must be a finite positive number, got {}", cfg.tol).into());
    }
    if cfg.max_iter < 1 {
        return Err("--max-iter must be at least 1".into());
    }
    match cli.command {
        Command::Estimate { scenario, out } => cmd_estimate(&scenario, out.as_deref(), &cfg),
        Command::Verify {
            scenario,
            out,
            restarts,
        } => cmd_verify(&scenario, out.as_deref(), restarts, &cfg),
        Command::Stability { scenario, samples } => cmd_stability(&scenario, samples, &cfg),
        Command::Oracle {
            scenario,
            grid,
            out,
        } => cmd_oracle(&scenario, grid, out.as_deref(), &cfg),
        Command::Scenario {
            name,
            n,
            depth,
            tilt,
            out,
        } => cmd_scenario(&name, n, depth, tilt, out.as_deref()),
        Command::Props { cases, inject_bug } => cmd_props(cases, inject_bug, &cfg),
    }
}

/// Saddle-margin tolerance: at least 1e-8 so certificates are not failed
/// over noise finer than the solver's own gap tolerance.
fn saddle_tol(cfg: &Config) -> f64 {
    cfg.tol.max(1e-8)
}

fn default_report_path(scenario: &Path) -> PathBuf {
    scenario.with_extension("report.json")
}

fn print_solution(sc: &Scenario, sol: &EstimatorSolution, saddle: &SaddleReport, cfg: &Config) {
    outln!(
        "scenario    {} ({} atoms, {} vertices, {} blocks)",
        sc.name(),
        sc.space().atom_count(),
        sc.ambiguity().vertex_count(),
        sc.partition().block_count()
    );
    for (b, block) in sc.partition().blocks().iter().enumerate() {
        let names: Vec<&str> = block
            .iter()
            .map(|&i| sc.space().atoms()[i].as_str())
            .collect();
        outln!(
            "eta_hat     block {b} {{{}}}: {}",
            names.join(", "),
            sol.eta_hat.values()[block[0]]
        );
    }
    let w: Vec<String> = sol.w_hat.weights().iter().map(|x| x.to_string()).collect();
    outln!("w_hat       {}", w.join(" "));
    outln!("alpha       {}", sol.alpha);
    outln!("gap         {:e}", sol.gap);
    outln!(
        "iterations  {} ({})",
        sol.iterations,
        if sol.converged { "converged" } else { "iteration cap hit" }
    );
    outln!(
        "saddle      {} (left {:e}, right {:e})",
        if saddle.pass { "pass" } else { "FAIL" },
        saddle.left_margin,
        saddle.right_margin
    );
    outln!("tolerance   {:e}", cfg.tol);
}

fn cmd_estimate(path: &Path, out: Option<&Path>, cfg: &Config) -> CliResult<ExitCode> {
    let sc = io::load_scenario(path)?;
    let sol = solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), cfg.tol, cfg.max_iter)?;
    let saddle = verify_saddle(sc.xi(), sc.ambiguity(), sc.partition(), &sol, saddle_tol(cfg))?;
    let report = io::solution_report(&sc, &sol, Some(&saddle));
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| default_report_path(path));
    io::save_report(&out_path, &report)?;
    print_solution(&sc, &sol, &saddle, cfg);
    outln!("report      {}", out_path.display());
    if !sol.converged {
        return Ok(ExitCode::from(EXIT_UNCONVERGED));
    }
    if !saddle.pass {
        return Ok(ExitCode::from(EXIT_FAILED_CHECK));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path, out: Option<&Path>, restarts: usize, cfg: &Config) -> CliResult<ExitCode> {
    let sc = io::load_scenario(path)?;
    let sol = solve_mmse(sc.xi(), sc.ambiguity(), sc.partition(), cfg.tol, cfg.max_iter)?;
    let saddle = verify_saddle(sc.xi(), sc.ambiguity(), sc.partition(), &sol, saddle_tol(cfg))?;
    let probe = uniqueness_probe(
        sc.xi(),
        sc.ambiguity(),
        sc.partition(),
        cfg.tol,
        restarts,
        cfg.seed,
    )?;
    let mut report = io::solution_report(&sc, &sol, Some(&saddle));
    report["uniqueness"] = json!({
        "runs": probe.runs,
        "eta_spread": float17(probe.eta_spread),
        "w_spread": float17(probe.w_spread),
        "alpha_spread": float17(probe.alpha_spread),
        "eta_unique": probe.eta_unique,
        "all_converged": probe.all_converged,
    });
    let out_path = out.map(Path::to_path_buf).unwrap_or_else(|| default_report_path(path));
    io::save_report(&out_path, &report)?;
    print_solution(&sc, &sol, &saddle, cfg);
    outln!(
        "uniqueness  {} runs, eta spread {:e}, w spread {:e}, alpha spread {:e}",
        probe.runs, probe.eta_spread, probe.w_spread, probe.alpha_spread
    );
    outln!("report      {}", out_path.display());
    if !sol.converged || !probe.all_converged {
        return Ok(ExitCode::from(EXIT_UNCONVERGED));
    }
    if !saddle.pass || !probe.eta_unique {
        return Ok(ExitCode::from(EXIT_FAILED_CHECK));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_stability(path: &Path, samples: usize, _cfg: &Config) -> CliResult<ExitCode> {
    let sc = io::load_scenario(path)?;
    let report = mmse::ambiguity::stability_check(sc.ambiguity(), sc.partition(), samples)?;
    let verdict = match report.verdict {
        StabilityVerdict::Stable => "stable",
        StabilityVerdict::Violated => "VIOLATED",
        StabilityVerdict::Inconclusive => "inconclusive",
    };
    outln!("scenario        {}", sc.name());
    outln!("verdict         {verdict}");
    outln!("points checked  {}", report.points_checked);
    outln!("worst residual  {:e}", report.worst_violation);
    outln!("tolerance       {:e}", report.tolerance);
    Ok(match report.verdict {
        StabilityVerdict::Stable => ExitCode::SUCCESS,
        StabilityVerdict::Violated => ExitCode::from(EXIT_FAILED_CHECK),
        StabilityVerdict::Inconclusive => ExitCode::from(EXIT_UNCONVERGED),
    })
}

fn cmd_oracle(path: &Path, grid: f64, out: Option<&Path>, cfg: &Config) -> CliResult<ExitCode> {
    let sc = io::load_scenario(path)?;
    let xi = sc.xi();
    let a = sc.ambiguity();
    let c = sc.partition();
    let sol = solve_mmse(xi, a, c, cfg.tol, cfg.max_iter)?;
    let grid_result = grid_maximize_g(xi, a, c, grid)?;

    outln!("scenario      {}", sc.name());
    outln!("solver alpha  {}", sol.alpha);
    outln!(
        "grid best     {} ({} points, step {:e})",
        grid_result.best_value, grid_result.points, grid_result.grid_step
    );
    outln!("difference    {:e}", sol.alpha - grid_result.best_value);

    // The one-sided certificate: a grid point strictly above the solver's
    // value (beyond tolerance noise) means the solver missed the maximum.
    // The other direction is expected discretization error, reported above.
    let mut ok = grid_result.best_value <= sol.alpha + saddle_tol(cfg);

    match brute_force_estimate(xi, a, c, brute_eta_step(xi), 0.05) {
        Ok((eta, value)) => {
            let eta_diff = eta
                .values()
                .iter()
                .zip(sol.eta_hat.values())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0_f64, f64::max);
            outln!("brute force   value {value}, max |eta - eta_hat| = {eta_diff:e}");
        }
        Err(mmse::Error::SizeLimit { what, limit, got }) => {
            outln!("brute force   skipped ({what}: {got} exceeds limit {limit})");
        }
        Err(other) => return Err(other.into()),
    }

    if let Some(csv_path) = out {
        let csv = segment_sweep_csv(&sc, grid)?;
        std::fs::write(csv_path, csv)
            .map_err(|e| format!("failed to write {}: {e}", csv_path.display()))?;
        outln!("sweep csv     {}", csv_path.display());
    }

    if !sol.converged {
        return Ok(ExitCode::from(EXIT_UNCONVERGED));
    }
    if grid_result.best_value > sol.alpha + saddle_tol(cfg) {
        ok = false;
    }
    Ok(if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED_CHECK)
    })
}

/// Estimator grid step for the brute-force oracle: fine enough to land
/// within plotting distance of the optimum, coarse enough to stay fast.
fn brute_eta_step(xi: &mmse::space::RandomVariable) -> f64 {
    let lo = xi.values().iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xi.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((hi - lo) / 40.0).max(1e-3)
}

/// The objective along every vertex-to-vertex segment of the hull, sampled
/// at `step` increments of the segment parameter. For two-vertex scenarios
/// this is exactly the lambda-sweep of the whole hull.
fn segment_sweep_csv(sc: &Scenario, step: f64) -> CliResult<String> {
    let a = sc.ambiguity();
    let k = a.vertex_count();
    let m = (1.0 / step).round().max(1.0) as usize;
    let mut csv = String::from("from,to,lambda,g\n");
    for i in 0..k {
        for j in (i + 1)..k {
            for t in 0..=m {
                let lambda = t as f64 / m as f64;
                let mut w = vec![0.0; k];
                w[i] = 1.0 - lambda;
                w[j] = lambda;
                let weights = MixtureWeights::new(w)?;
                let g = objective_g(sc.xi(), a, sc.partition(), &weights)?;
                csv.push_str(&format!("{i},{j},{},{}\n", float17(lambda), float17(g)));
            }
        }
    }
    Ok(csv)
}

fn cmd_scenario(
    name: &str,
    n: usize,
    depth: usize,
    tilt: f64,
    out: Option<&Path>,
) -> CliResult<ExitCode> {
    enum Extra {
        None,
        Closure(Ex42Closure),
        Filtration(Vec<Partition>),
    }
    let (sc, extra) = match name {
        "ex41" => (example_41(), Extra::None),
        "ex42" => {
            let (sc, closure) = example_42_truncated(n)?;
            (sc, Extra::Closure(closure))
        }
        "tree" => {
            let (sc, filtration) = example_43_tree(depth, tilt)?;
            (sc, Extra::Filtration(filtration))
        }
        other => {
            return Err(format!(
                "unknown scenario name {other:?}; expected one of: ex41, ex42, tree"
            )
            .into())
        }
    };

    let out_path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(format!("{}.json", sc.name())));
    io::save_scenario(&out_path, &sc)?;
    outln!("scenario    {}", sc.name());
    outln!("wrote       {}", out_path.display());

    match extra {
        Extra::None => {}
        Extra::Closure(closure) => {
            let closure_path = out_path.with_extension("closure.json");
            io::save_report(&closure_path, &closure_json(&closure))?;
            outln!("wrote       {}", closure_path.display());
            outln!(
                "closure     lambda_star {} ({}), candidate weights {}, {}",
                closure.lambda_star,
                if closure.lambda_feasible { "in [0,1]" } else { "OUTSIDE [0,1]" },
                if closure.p_nonneg { "nonnegative" } else { "NEGATIVE" },
                if closure.p_mass_feasible { "mass feasible" } else { "MASS > 1" },
            );
        }
        Extra::Filtration(filtration) => {
            let filtration_path = out_path.with_extension("filtration.json");
            let levels: Vec<Value> = filtration
                .iter()
                .map(|p| json!(p.blocks()))
                .collect();
            io::save_report(&filtration_path, &json!({ "levels": levels }))?;
            outln!("wrote       {}", filtration_path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn closure_json(closure: &Ex42Closure) -> Value {
    json!({
        "n": closure.n,
        "lambda_star": float17(closure.lambda_star),
        "f_value": float17(closure.f_value),
        "tail_bound": float17(closure.tail_bound),
        "mean_gap_raw": float17(closure.mean_gap_raw),
        "p": closure.p.iter().map(|&x| float17(x)).collect::<Vec<_>>(),
        "p_nonneg": closure.p_nonneg,
        "p_mass_feasible": closure.p_mass_feasible,
        "lambda_feasible": closure.lambda_feasible,
    })
}

fn cmd_props(cases: usize, inject_bug: bool, cfg: &Config) -> CliResult<ExitCode> {
    if cases < 1 {
        return Err("--cases must be at least 1".into());
    }
    let outcome = props::run_battery(cases, inject_bug, cfg)?;
    out!("{}", outcome.table);
    if outcome.failures == 0 {
        outln!(
            "all properties passed ({} properties, {cases} cases, seed {})",
            outcome.property_count, cfg.seed
        );
        Ok(ExitCode::SUCCESS)
    } else {
        outln!(
            "{} property check(s) FAILED ({} properties, {cases} cases, seed {})",
            outcome.failures, outcome.property_count, cfg.seed
        );
        Ok(ExitCode::from(EXIT_FAILED_CHECK))
    }
}
