//! Command-line surface.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime or I/O error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::analysis::cadence::{optimize_cadence, parse_intervals, CadenceResult, CadenceSearch};
use crate::analysis::phases::{classify_phases_with_window, PhaseLabel, DEFAULT_WINDOW};
use crate::analysis::sweep::{run_sweep, sweep_csv};
use crate::engine;
use crate::error::{Error, Result};
use crate::io::canonical::format_float;
use crate::io::output::{filled_series, write_text};
use crate::io::{emit_run, load_scenario, load_sweep, EmitOptions};

#[derive(Debug, Parser)]
#[command(name = "hedonic", version, about = "Hedonic adaptation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario and write run.csv, manifest.json and optional plots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the scenario document.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        plots: bool,
        #[arg(long)]
        agent_traces: bool,
    },
    /// Latin-hypercube sweep over scenario parameters.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive search over release intervals for a fixed capability budget.
    OptimizeCadence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        budget: f64,
        /// `lo..hi` (inclusive) or a comma-separated list.
        #[arg(long)]
        intervals: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify the phases of one column of a run.csv.
    Phases {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
    },
    /// Parse and validate a scenario document.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(cli.command, &mut stdout) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn say(out: &mut impl Write, line: impl AsRef<str>) -> Result<()> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Error::io("<stdout>", e))
}

fn execute(command: Command, out: &mut impl Write) -> Result<()> {
    match command {
        Command::Validate { config } => {
            let scenario = load_scenario(&config)?;
            say(
                out,
                format!(
                    "ok: {} (horizon {}, {} agents, {} segments)",
                    config.display(),
                    scenario.horizon,
                    scenario.population.size,
                    scenario.population.segments.len()
                ),
            )
        }
        Command::Simulate { config, seed, out: dir, plots, agent_traces } => {
            let mut scenario = load_scenario(&config)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            scenario.trace_agents |= agent_traces;
            let run = engine::run(&scenario)?;
            let options = EmitOptions { plots, agent_traces: scenario.trace_agents };
            let manifest = emit_run(&run, &dir, options)?;
            say(out, format!("wrote {} files to {} (digest {})", manifest.files.len(), dir.display(), manifest.scenario_digest))
        }
        Command::Sweep { config, sweep, parallel, out: path } => {
            let base = load_scenario(&config)?;
            let spec = load_sweep(&sweep)?;
            let rows = run_sweep(&spec, &base, Some(parallel.max(1)))?;
            write_text(&path, &sweep_csv(&spec, &rows)?)?;
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            say(out, format!("wrote {} rows to {} ({failed} failed)", rows.len(), path.display()))
        }
        Command::OptimizeCadence { config, budget, intervals, out: path } => {
            let base = load_scenario(&config)?;
            let search = CadenceSearch { base, total_log_budget: budget, intervals: parse_intervals(&intervals)? };
            let result = optimize_cadence(&search)?;
            write_text(&path, &cadence_csv(&result))?;
            say(
                out,
                format!(
                    "best interval {} (objective {})",
                    result.best_interval,
                    format_float(result.best_objective)
                ),
            )
        }
        Command::Phases { input, column, window } => {
            for label in phases_of_column(&input, &column, window)? {
                say(out, format!("{} {}..{}", label.kind, label.start, label.end))?;
            }
            Ok(())
        }
    }
}

/// Cadence table as CSV, followed by a `# winner` comment line.
pub fn cadence_csv(result: &CadenceResult) -> String {
    let mut s = String::from("interval,objective\n");
    for row in &result.table {
        s.push_str(&format!("{},{}\n", row.interval, format_float(row.objective)));
    }
    s.push_str(&format!(
        "# winner: interval={} objective={}\n",
        result.best_interval,
        format_float(result.best_objective)
    ));
    s
}

/// Phases of a run.csv column. Steps before the first non-empty cell are
/// skipped; later empty cells carry the previous value.
pub fn phases_of_column(input: &Path, column: &str, window: usize) -> Result<Vec<PhaseLabel>> {
    let mut reader = csv::Reader::from_path(input).map_err(|e| Error::io(input, e))?;
    let headers = reader.headers().map_err(|e| Error::io(input, e))?.clone();
    let idx = headers
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::config("--column", format!("no column {column:?} in {}", input.display())))?;
    let mut series = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::io(input, e))?;
        let cell = record.get(idx).unwrap_or("");
        if cell.is_empty() {
            series.push(None);
        } else {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::io(input, format!("column {column:?}: {cell:?} is not a number")))?;
            series.push(Some(v));
        }
    }
    let (offset, values) =
        filled_series(&series).ok_or_else(|| Error::domain(format!("column {column:?} has no values")))?;
    let labels = classify_phases_with_window(&values, window)?;
    Ok(labels
        .into_iter()
        .map(|l| PhaseLabel { start: l.start + offset, end: l.end + offset, ..l })
        .collect())
}
