use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swlab::cli::{self, Command, EngineOverrides, RunOptions};
use swlab::engine::Variant;
use swlab::Error;

/// Schrieffer-Wolff effective Hamiltonians from model-spec files.
#[derive(Parser)]
#[command(name = "swlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Bohr-frequency components of V with norms and defects.
    Decompose(RunArgs),
    /// Generator and effective Hamiltonian.
    Transform(RunArgs),
    /// Transform plus per-block comparison with exact diagonalization.
    Compare(RunArgs),
    /// Compare over the spec's parameter sweep; writes a CSV next to the report.
    Sweep(RunArgs),
    /// List presets and their parameters.
    Presets {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    #[arg(long)]
    bin_tol: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV path for `sweep`; defaults to the report path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Record wall-clock times in the report.
    #[arg(long)]
    timing: bool,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::from_name(s).map_err(|e| e.to_string())
}

fn write_text(path: Option<&Path>, text: &str) -> swlab::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn execute(cmd: Command, args: &RunArgs) -> swlab::Result<()> {
    let overrides = EngineOverrides {
        bin_tol: args.bin_tol,
        order: args.order,
        variant: args.variant,
    };
    let spec = cli::load_spec_file(&args.spec, overrides)?;
    let report = cli::run(cmd, &spec, RunOptions { timing: args.timing })?;
    write_text(args.out.as_deref(), &report.to_json_string())?;
    if cmd == Command::Sweep {
        let csv = report.sweep_csv()?;
        let path = args
            .csv
            .clone()
            .or_else(|| args.out.as_ref().map(|p| p.with_extension("csv")));
        match path {
            Some(p) => write_text(Some(&p), &csv)?,
            None => eprint!("{csv}"),
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> swlab::Result<()> {
    cli::configure_threads()?;
    match cli.command {
        Cmd::Decompose(a) => execute(Command::Decompose, &a),
        Cmd::Transform(a) => execute(Command::Transform, &a),
        Cmd::Compare(a) => execute(Command::Compare, &a),
        Cmd::Sweep(a) => execute(Command::Sweep, &a),
        Cmd::Presets { out } => {
            let mut text = serde_json::to_string_pretty(&cli::presets_listing())?;
            text.push('\n');
            write_text(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    panic::set_hook(Box::new(|_| {}));
    match panic::catch_unwind(AssertUnwindSafe(|| dispatch(parsed))) {
        Ok(Ok(())) => ExitCode::from(cli::EXIT_OK as u8),
        Ok(Err(e)) => {
            eprintln!("swlab: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("unexpected failure");
            eprintln!("swlab: internal error: {msg}");
            ExitCode::from(cli::EXIT_VALIDATION as u8)
        }
    }
}
