use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use oscprop_cli::{config, execute, output, Format, Mode};

/// Propagators of the forced harmonic oscillator under singular potentials.
#[derive(Debug, Parser)]
#[command(name = "oscprop", version)]
struct Cli {
    /// kernel | series | verify | bounds
    #[arg(value_enum)]
    mode: Mode,
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// output file; defaults to output.path from the config, then stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// defaults to output.format from the config, then csv
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// seed for the randomized suites and samples; overrides the config
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: ConfigError: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    let mut cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: ConfigError: {}: {e}", cli.config.display());
            return ExitCode::from(1);
        }
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let format = cli.format.or(cfg.output.format).unwrap_or(Format::Csv);
    cfg.output.format = Some(format);
    let out = cli.out.clone().or_else(|| cfg.output.path.clone());
    let (report, failure) = match execute(&cfg, cli.mode) {
        Ok(r) => r,
        Err(f) => {
            eprintln!("error: {f}");
            return ExitCode::from(f.exit_code() as u8);
        }
    };
    for d in &report.diagnostics {
        eprintln!("{d}");
    }
    let rendered = output::render(&report, format);
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{rendered}"),
    }
    match failure {
        Some(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code() as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
