use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lqnet::experiments::{self, Experiment, ExperimentConfig, PlotKind};
use lqnet::pricing::{self, PgOptions};
use lqnet::{Error, GameSpec, NeOptions};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "lqnet",
    version,
    about = "Equilibria and optimal pricing for network games with concave peer effects"
)]
struct Cli {
    /// Stopping tolerance of the iterative solvers.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Iteration cap of the iterative solvers.
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    /// Directory for sweep output files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Override the preferential-attachment seed of a sweep config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the contraction and diagonal-dominance conditions of a game.
    Validate { game: PathBuf },
    /// Nash equilibrium under a given price vector.
    SolveNe {
        game: PathBuf,
        /// JSON array with one price per agent.
        #[arg(long)]
        prices: PathBuf,
    },
    /// Revenue-maximizing per-agent prices and the price of information.
    OptimalPrice { game: PathBuf },
    /// Best single price of a uniform game.
    UniformPrice { game: PathBuf },
    /// Run an experiment config.
    Sweep { config: PathBuf },
    /// Grid-search the revenue maximizer of a game with at most 3 agents.
    Oracle {
        game: PathBuf,
        /// Upper end of the search box; defaults to 1.1 × the largest optimal-action bound.
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let report = if let Some(e) = err.downcast_ref::<Error>() {
                json!({ "error": e.to_report() })
            } else {
                let kind = if err.downcast_ref::<std::io::Error>().is_some() {
                    "io"
                } else {
                    "cli"
                };
                json!({ "error": { "kind": kind, "message": format!("{err:#}") } })
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("error report serializes")
            );
            ExitCode::FAILURE
        }
    }
}

fn load_game(path: &Path) -> Result<GameSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(GameSpec::from_json(&text)?)
}

/// Brings a game to normalized form, noting whether anything changed.
fn normalized(game: GameSpec) -> Result<(GameSpec, bool)> {
    if game.is_normalized() {
        Ok((game, false))
    } else {
        Ok((game.normalize()?, true))
    }
}

fn ne_options(cli: &Cli) -> NeOptions {
    let mut o = NeOptions::default();
    if let Some(t) = cli.tol {
        o.tol = t;
    }
    if let Some(m) = cli.max_iter {
        o.max_iter = m;
    }
    o
}

fn pg_options(cli: &Cli) -> PgOptions {
    let mut o = PgOptions::default();
    if let Some(t) = cli.tol {
        o.tol = t;
    }
    if let Some(m) = cli.max_iter {
        o.max_iter = m;
    }
    o
}

fn pretty(v: Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(&v)?)
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Validate { game } => {
            let game = load_game(game)?;
            let report = game.check_assumptions()?;
            pretty(json!({
                "n": game.n(),
                "interaction": game.f().label(),
                "normalized": game.is_normalized(),
                "assumptions": report,
                "interaction_audit": game.f().audit(),
            }))
        }
        Command::SolveNe { game, prices } => {
            let game = load_game(game)?;
            let text = fs::read_to_string(prices).with_context(|| format!("reading {}", prices.display()))?;
            let p: Vec<f64> = serde_json::from_str(&text).map_err(Error::from)?;
            let report = game.solve_ne(&p.into(), &ne_options(cli))?;
            pretty(json!(report))
        }
        Command::OptimalPrice { game } => {
            let (game, was_normalized) = normalized(load_game(game)?)?;
            let solution = pricing::solve_optimal_price(&game, &pg_options(cli))?;
            let baseline = pricing::agnostic_baseline(&game, &ne_options(cli))?;
            let bound = pricing::poi_lower_bound(&game);
            pretty(json!({
                "applied_normalization": was_normalized,
                "solution": solution,
                "agnostic": baseline,
                "poi": solution.revenue / baseline.j0,
                "lower_bound": bound.as_ref().ok(),
                "lower_bound_error": bound.as_ref().err().map(|e| e.to_report()),
            }))
        }
        Command::UniformPrice { game } => {
            let (game, was_normalized) = normalized(load_game(game)?)?;
            let tol = cli.tol.unwrap_or(pricing::DEFAULT_BISECTION_TOL);
            let reduced = pricing::uniform_reduce(&game)?;
            let optimal = pricing::solve_uniform_price(&game, tol)?;
            let agnostic = pricing::uniform_agnostic(&game, tol)?;
            pretty(json!({
                "applied_normalization": was_normalized,
                "uniform_game": reduced,
                "optimal": optimal,
                "agnostic": agnostic,
                "gap": optimal.revenue / agnostic.j0 - 1.0,
                "lower_bound": pricing::uniform_poi_lower_bound(&game)?,
            }))
        }
        Command::Sweep { config } => sweep(cli, config),
        Command::Oracle { game, x_max, step } => {
            let game = load_game(game)?;
            let x_max = match x_max {
                Some(v) => *v,
                None => 1.1 * pricing::action_bounds(&game)?.upper_max().amax(),
            };
            let result = experiments::brute_force_optimal(&game, x_max, *step)?;
            pretty(json!({ "x_max": x_max, "step": step, "result": result }))
        }
    }
}

fn sweep(cli: &Cli, path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = cli.seed {
        config.graph.seed = seed;
    }
    if let Some(t) = cli.tol {
        config.tolerances.ne.tol = t;
        config.tolerances.pg.tol = t;
    }
    if let Some(m) = cli.max_iter {
        config.tolerances.ne.max_iter = m;
        config.tolerances.pg.max_iter = m;
    }
    let rows = experiments::run(&config)?;
    let out_dir = cli.out.clone().or_else(|| config.output_dir.clone());
    let Some(dir) = out_dir else {
        return match cli.format {
            Format::Csv => Ok(experiments::render_csv(&rows)?),
            Format::Json => pretty(json!(rows)),
        };
    };
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    let mut written = Vec::new();
    match cli.format {
        Format::Csv => {
            let csv = dir.join(format!("{stem}.csv"));
            experiments::emit_csv(&rows, &csv)?;
            written.push(csv);
        }
        Format::Json => {
            let file = dir.join(format!("{stem}.json"));
            fs::write(&file, serde_json::to_string_pretty(&rows)?)?;
            written.push(file);
        }
    }
    let kind = match config.experiment {
        Experiment::GbarSweep => PlotKind::GapVsBound,
        _ => PlotKind::InversePoi,
    };
    let svg = dir.join(format!("{stem}.svg"));
    experiments::emit_plot(&rows, kind, &svg)?;
    written.push(svg);
    let ok = rows.iter().filter(|r| r.is_ok()).count();
    pretty(json!({
        "rows": rows.len(),
        "ok_rows": ok,
        "peak_inverse_poi": experiments::peak_inverse_poi(&rows),
        "files": written,
    }))
}
