#![allow(clippy::neg_cmp_op_on_partial_ord)]
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arcflow_cli::experiment::{self, stamp, AdmissibilityArtifact};
use arcflow_cli::rescale::rescale_trajectory;
use arcflow_cli::sweep::{thread_cap, write_sweep};
use arcflow_cli::{load_config, output, preset, sweep, CliError, Grid, Result, PRESETS};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "arcflow",
    version,
    about = "Free-boundary curve flow experiments"
)]
struct Cli {
    /// Directory receiving the artifacts.
    #[arg(long, global = true, default_value = "arcflow-out")]
    out_dir: PathBuf,
    /// Also write SVG frames of the stored states.
    #[arg(long, global = true)]
    frames: bool,
    /// Print nothing on success.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON file or a preset name.
    Run { config: String },
    /// Run a template over the cartesian product of a parameter grid.
    Sweep { config: String, grid: PathBuf },
    /// Report admissibility of the initial datum without running.
    Check { config: String },
    /// Classify a stored trajectory and write blow-up frames.
    Rescale { trajectory: PathBuf },
    /// Print a built-in configuration.
    Preset { name: String },
}

fn say(quiet: bool, text: impl AsRef<str>) {
    if !quiet {
        // a closed pipe downstream is not an error of the run
        let _ = writeln!(std::io::stdout(), "{}", text.as_ref());
    }
}

fn pretty(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("value serializes")
}

fn execute(cli: &Cli) -> Result<()> {
    let out = cli.out_dir.as_path();
    match &cli.command {
        Command::Run { config } => {
            let config = load_config(config)?;
            let summary = experiment::run_experiment(&config, out, cli.frames)?;
            say(
                cli.quiet,
                format!(
                    "{}: {} at t = {:.6e} after {} steps; {} records with violations; outputs in {}",
                    stamp(&config).comment(),
                    summary.termination.label(),
                    summary.final_t,
                    summary.steps,
                    summary.invariant_violation_count,
                    out.display()
                ),
            );
        }
        Command::Sweep { config, grid } => {
            let template = load_config(config)?;
            let text = std::fs::read_to_string(grid).map_err(|e| CliError::io(grid, e))?;
            let grid = Grid::parse(&text, &grid.display().to_string())?;
            let rows = sweep(&template, &grid, thread_cap()?)?;
            let path = out.join("sweep.csv");
            write_sweep(&path, &template, &grid, &rows)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            say(
                cli.quiet,
                format!(
                    "{} runs, {failed} with errors; table in {}",
                    rows.len(),
                    path.display()
                ),
            );
        }
        Command::Check { config } => {
            let config = load_config(config)?;
            let report = experiment::check(&config)?;
            let path = out.join(&config.outputs.admissibility);
            let body = AdmissibilityArtifact::new(report.as_ref());
            output::write_json(&path, &stamp(&config), &body)?;
            say(cli.quiet, pretty(&body));
        }
        Command::Rescale { trajectory } => {
            let (report, _) = rescale_trajectory(trajectory, out)?;
            say(
                cli.quiet,
                format!(
                    "{}: {} Hamilton frames, {} parabolic frames in {}",
                    pretty(&report.classification),
                    report.hamilton.len(),
                    report.parabolic.len(),
                    out.display()
                ),
            );
        }
        Command::Preset { name } => {
            let config = preset(name).ok_or_else(|| {
                CliError::Usage(format!("unknown preset `{name}` ({})", PRESETS.join(", ")))
            })?;
            say(false, pretty(&config));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arcflow: {e}");
            if let CliError::RunFailed(_) = e {
                eprintln!(
                    "arcflow: outputs written to {}",
                    Path::new(&cli.out_dir).display()
                );
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
