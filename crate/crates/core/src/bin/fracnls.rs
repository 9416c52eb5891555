use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use fracnls::experiments::{run_batch, run_command, CommandKind};
use fracnls::Error;

/// Half-wave cubic NLS experiments.
#[derive(Debug, Parser)]
#[command(name = "fracnls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory (default: $FRACNLS_OUT, else ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write SVG charts.
    #[arg(long, global = true)]
    plot: bool,

    /// Disable the wrap-around validity-horizon guard.
    #[arg(long, global = true)]
    override_horizon: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver and record norm time series.
    Simulate(ConfigArg),
    /// Run the solver with phase correction and extract w_inf.
    Scatter(ConfigArg),
    /// Stationary-phase residual of the resonant integral.
    Oscillatory(ConfigArg),
    /// Free-flow sup norm against the dispersive majorant.
    Dispersive(ConfigArg),
    /// Gaussian and cutoff pair integrals.
    GaussianIdentity(ConfigArg),
    /// Run a manifest of `command config` lines concurrently.
    Batch(ConfigArg),
}

#[derive(Debug, clap::Args)]
struct ConfigArg {
    #[arg(long)]
    config: PathBuf,
}

fn error_record(err: &Error) -> serde_json::Value {
    let mut rec = json!({
        "status": "error",
        "kind": err.kind(),
        "message": err.to_string(),
    });
    match err {
        Error::Parse { line, .. } => rec["line"] = json!(line),
        Error::Io { path, .. } => rec["path"] = json!(path),
        Error::HorizonExceeded { t_end, t_valid } => {
            rec["t_end"] = json!(t_end);
            rec["t_valid"] = json!(t_valid);
        }
        Error::NumericalBlowup { t } => rec["t"] = json!(t),
        _ => {}
    }
    rec
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli
        .out
        .or_else(|| std::env::var_os("FRACNLS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    if cli.override_horizon {
        eprintln!(
            "{}",
            json!({"status": "warning", "kind": "horizon-override", "message": "validity-horizon guard disabled; late-time data may include wrap-around"})
        );
    }
    let (kind, config) = match cli.command {
        Command::Simulate(a) => (Some(CommandKind::Simulate), a.config),
        Command::Scatter(a) => (Some(CommandKind::Scatter), a.config),
        Command::Oscillatory(a) => (Some(CommandKind::Oscillatory), a.config),
        Command::Dispersive(a) => (Some(CommandKind::Dispersive), a.config),
        Command::GaussianIdentity(a) => (Some(CommandKind::GaussianIdentity), a.config),
        Command::Batch(a) => (None, a.config),
    };
    let result = match kind {
        Some(kind) => run_command(kind, &config, &out, cli.plot, cli.override_horizon).map(|summary| {
            json!({"status": "ok", "out": out, "summary": summary})
        }),
        None => run_batch(&config, &out, cli.plot, cli.override_horizon).and_then(|entries| {
            let failed = entries.iter().filter(|e| !e.ok).count();
            if failed > 0 {
                Err(Error::InvalidArgument(format!(
                    "{failed} of {} batch jobs failed; see {}",
                    entries.len(),
                    out.join("batch.json").display()
                )))
            } else {
                Ok(json!({"status": "ok", "out": out, "jobs": entries.len()}))
            }
        }),
    };
    match result {
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::FAILURE
        }
    }
}
