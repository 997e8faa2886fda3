use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use frac_orlicz_cli::{parse_config, run, Command, RunError, EXIT_INVALID};

/// Fractional Orlicz-Sobolev experiments driven by `key = value` configs.
#[derive(Debug, Parser)]
#[command(name = "frac-orlicz", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,

    /// Config file.
    #[arg(long)]
    config: PathBuf,

    /// Output directory (default: the config's `output` key, else the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), RunError> {
    let Ok(raw) = std::env::var("OF_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| RunError::Invalid(format!("OF_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| RunError::Invalid(format!("cannot configure {threads} threads: {e}")))
}

fn execute(args: &Args) -> Result<String, RunError> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Invalid(format!("cannot read {}: {e}", args.config.display())))?;
    let base = args.config.parent().map(PathBuf::from).unwrap_or_default();
    let config = parse_config(&text, Some(args.command), &base).map_err(RunError::Config)?;
    let out = args
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(|p| base.join(p)))
        .unwrap_or_else(|| PathBuf::from("."));
    let summary = run(&config, &out)?;
    for f in &summary.files {
        log::info!("wrote {}", f.display());
    }
    Ok(summary.message)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&args) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
