//! `qmoves`: score plays, run optimisers, compare them with players, report
//! metrics and serve the game API.

use std::fs;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use qmoves_core::control::{decode_play, ControlPath, PathOrigin};
use qmoves_core::level::{
    benchmark_level, builtin_level, parse_level, parse_path_csv, write_path_csv, Level,
    PreparedLevel, ScoreOptions,
};
use qmoves_core::optimize::{
    compare_curves, hybrid_optimize, local_optimize, stochastic_optimize, Family, OptimizationRun,
    OptimizerConfig, PlayerHistory, RunCurve,
};
use qmoves_service::{engagement_metrics, read_events, GameService};

#[derive(Debug, Error)]
enum CliError {
    /// Bad flags, files or values: exit 2.
    #[error("{0}")]
    Input(String),
    /// Anything else: exit 1.
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn input(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "qmoves",
    version,
    about = "Tweezer-transport game: scoring, optimisers, metrics and server"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Local,
    Stochastic,
    Hybrid,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Local => Family::Local,
            FamilyArg::Stochastic => Family::Stochastic,
            FamilyArg::Hybrid => Family::Hybrid,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score a play and print the report as JSON.
    Score {
        /// Level file, or the id of a built-in level.
        level: String,
        /// Play as a `.qmplay` record or a `t,x0,depth` CSV.
        play: PathBuf,
        /// Write `t,x,density` rows for every feedback sample.
        #[arg(long)]
        density_trace: Option<PathBuf>,
    },
    /// Run an optimiser and write its trace and best path.
    Optimize {
        /// Level file, or the id of a built-in or benchmark level.
        level: String,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        budget: usize,
        /// Seed paths; required for local and hybrid.
        #[arg(long = "seed-play")]
        seed_plays: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        rng: u64,
        /// Control knots in the search space.
        #[arg(long, default_value_t = 32)]
        knots: usize,
        #[arg(long, default_value = "trace.csv")]
        trace: PathBuf,
        #[arg(long, default_value = "best.csv")]
        best: PathBuf,
    },
    /// Align optimiser traces with player histories and report crossovers.
    Compare {
        /// Trace CSVs written by `optimize`.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        /// `user_id,level_id,score` rows, one per play in play order.
        #[arg(long)]
        players: PathBuf,
        /// Also write the aligned best-so-far table here.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Serve the `/v1` API until SIGTERM or ctrl-c.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "QM_DATA_DIR")]
        data_dir: PathBuf,
        /// Seed of the experiment-cell assignment stream.
        #[arg(long, default_value_t = 0)]
        rng: u64,
    },
    /// Print engagement metrics computed from a data directory's log.
    Metrics {
        #[arg(long, env = "QM_DATA_DIR")]
        data_dir: PathBuf,
    },
}

fn load_level(arg: &str) -> Result<Level> {
    let path = Path::new(arg);
    if path.exists() {
        let text = fs::read_to_string(path).map_err(|e| input(format!("{arg}: {e}")))?;
        return parse_level(&text).map_err(|e| input(format!("{arg}: {e}")));
    }
    builtin_level(arg)
        .or_else(|_| benchmark_level(arg))
        .map_err(|_| input(format!("{arg}: no such file or built-in level")))
}

fn load_play(path: &Path) -> Result<ControlPath> {
    let bytes = fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    if let Ok(record) = decode_play(&bytes) {
        return Ok(record.path);
    }
    let text = String::from_utf8(bytes)
        .map_err(|_| input(format!("{}: not a play record or path CSV", path.display())))?;
    parse_path_csv(&text, PathOrigin::Human).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| internal(format!("{}: {e}", path.display())))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    println!("{text}");
    Ok(())
}

fn score(level: &str, play: &Path, density_trace: Option<&Path>) -> Result<()> {
    let prepared = PreparedLevel::new(load_level(level)?).map_err(input)?;
    let path = load_play(play)?;
    let report = match density_trace {
        None => prepared.score(&path).map_err(input)?,
        Some(out) => {
            let file =
                fs::File::create(out).map_err(|e| internal(format!("{}: {e}", out.display())))?;
            let mut w = BufWriter::new(file);
            let positions = prepared.config().positions();
            let mut io_error = None;
            writeln!(w, "t,x,density").map_err(internal)?;
            let report = prepared
                .score_observed(&path, ScoreOptions::default(), |t, psi| {
                    for (x, d) in positions.iter().zip(psi.density()) {
                        if let Err(e) = writeln!(w, "{t},{x},{d}") {
                            io_error.get_or_insert(e);
                        }
                    }
                })
                .map_err(input)?;
            if let Some(e) = io_error {
                return Err(internal(e));
            }
            w.flush().map_err(internal)?;
            report
        }
    };
    print_json(&report)
}

#[allow(clippy::too_many_arguments)]
fn optimize(
    level: &str,
    family: Family,
    budget: usize,
    seed_plays: &[PathBuf],
    rng: u64,
    knots: usize,
    trace: &Path,
    best: &Path,
) -> Result<()> {
    if family != Family::Stochastic && seed_plays.is_empty() {
        return Err(input(format!(
            "--family {} needs at least one --seed-play",
            family.as_str()
        )));
    }
    let prepared = PreparedLevel::new(load_level(level)?).map_err(input)?;
    let seeds = seed_plays
        .iter()
        .map(|p| load_play(p))
        .collect::<Result<Vec<_>>>()?;
    let mut config = OptimizerConfig::new(family, budget);
    config.rng_seed = rng;
    config.knots = knots;
    let run: OptimizationRun = match family {
        Family::Local => local_optimize(&prepared, &seeds[0], &config),
        Family::Stochastic => stochastic_optimize(&prepared, &config),
        Family::Hybrid => hybrid_optimize(&prepared, &seeds, &config),
    }
    .map_err(input)?;
    write_file(trace, &run.trace_csv())?;
    write_file(best, &write_path_csv(&run.best_path))?;
    print_json(&serde_json::json!({
        "level_id": run.level_id,
        "family": family,
        "evaluations_used": run.evaluations_used,
        "best_score": run.best_score(),
        "best_fidelity": run.best_report.fidelity,
        "best_stars": run.best_report.stars,
        "seed": run.seed,
        "trace": trace,
        "best": best,
    }))
}

#[derive(Debug, Deserialize)]
struct TraceCsvRow {
    eval_index: usize,
    #[allow(dead_code)]
    candidate_score: i64,
    best_score: i64,
}

#[derive(Debug, Deserialize)]
struct PlayerCsvRow {
    user_id: String,
    level_id: String,
    score: i64,
}

fn read_trace(path: &Path) -> Result<RunCurve> {
    let err = |e: &dyn std::fmt::Display| input(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(&e))?;
    let mut best = Vec::new();
    for row in reader.deserialize::<TraceCsvRow>() {
        let row = row.map_err(|e| err(&e))?;
        if row.eval_index != best.len() + 1 {
            return Err(err(&format!(
                "expected eval_index {}, got {}",
                best.len() + 1,
                row.eval_index
            )));
        }
        best.push(row.best_score);
    }
    let label = path
        .file_stem()
        .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    Ok(RunCurve {
        label,
        best_scores: best,
    })
}

fn read_players(path: &Path) -> Result<Vec<PlayerHistory>> {
    let err = |e: &dyn std::fmt::Display| input(format!("{}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(&e))?;
    let mut players: Vec<PlayerHistory> = Vec::new();
    for row in reader.deserialize::<PlayerCsvRow>() {
        let row = row.map_err(|e| err(&e))?;
        match players
            .iter_mut()
            .find(|p| p.user_id == row.user_id && p.level_id == row.level_id)
        {
            Some(p) => p.scores.push(row.score),
            None => players.push(PlayerHistory {
                user_id: row.user_id,
                level_id: row.level_id,
                scores: vec![row.score],
            }),
        }
    }
    Ok(players)
}

fn compare(runs: &[PathBuf], players: &Path, table: Option<&Path>) -> Result<()> {
    let curves = runs
        .iter()
        .map(|p| read_trace(p))
        .collect::<Result<Vec<_>>>()?;
    let players = read_players(players)?;
    let level_id = players
        .first()
        .map(|p| p.level_id.clone())
        .unwrap_or_default();
    let report = compare_curves(&level_id, &curves, &players).map_err(input)?;
    if let Some(t) = table {
        write_file(t, &report.to_csv())?;
    }
    print_json(&serde_json::json!({
        "level_id": report.level_id,
        "run_labels": report.run_labels,
        "player_labels": report.player_labels,
        "evaluations": report.rows.len(),
        "crossovers": report.crossovers,
        "note": report.note,
    }))
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {}
        _ = term => {}
    }
}

fn serve(addr: SocketAddr, data_dir: &Path, rng: u64) -> Result<()> {
    let service = Arc::new(GameService::open(data_dir, rng).map_err(internal)?);
    let runtime = tokio::runtime::Runtime::new().map_err(internal)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| input(format!("{addr}: {e}")))?;
        let local = listener.local_addr().map_err(internal)?;
        eprintln!(
            "listening on http://{local}/v1, data in {}",
            data_dir.display()
        );
        qmoves_service::http::serve(listener, service, shutdown_signal())
            .await
            .map_err(internal)?;
        eprintln!("shut down, event log synced");
        Ok(())
    })
}

fn metrics(data_dir: &Path) -> Result<()> {
    let events = read_events(data_dir).map_err(internal)?;
    print_json(&engagement_metrics(&events))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score {
            level,
            play,
            density_trace,
        } => score(&level, &play, density_trace.as_deref()),
        Command::Optimize {
            level,
            family,
            budget,
            seed_plays,
            rng,
            knots,
            trace,
            best,
        } => optimize(
            &level,
            family.into(),
            budget,
            &seed_plays,
            rng,
            knots,
            &trace,
            &best,
        ),
        Command::Compare {
            runs,
            players,
            table,
        } => compare(&runs, &players, table.as_deref()),
        Command::Serve {
            addr,
            data_dir,
            rng,
        } => serve(addr, &data_dir, rng),
        Command::Metrics { data_dir } => metrics(&data_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmoves: {e}");
            ExitCode::from(e.code())
        }
    }
}
