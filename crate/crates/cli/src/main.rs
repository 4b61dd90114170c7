use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use nrlimit_cli::artifacts::check_writable;
use nrlimit_cli::error::EXIT_OK;
use nrlimit_cli::run::run;
use nrlimit_cli::{parse_for_command, CliError, Command};

/// Output root when neither `--out` nor the config names one.
const OUT_ENV: &str = "NRLIMIT_OUT";
const DEFAULT_OUT: &str = "nrlimit-out";

#[derive(Debug, Parser)]
#[command(name = "nrlimit", version, about = "Ground states of pseudo-relativistic NLS/Hartree equations and their c -> inf limit")]
struct Cli {
    #[arg(value_enum)]
    command: Command,

    /// JSON run configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output directory. Falls back to `output.dir`, then $NRLIMIT_OUT.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,

    /// `section.key=value`, applied on top of the config; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?,
        None => "{}".to_string(),
    };
    let cfg = parse_for_command(&text, &cli.overrides, cli.command)?;
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Invalid(vec!["--threads: must be positive".into()]));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Invalid(vec![format!("--threads: {e}")]))?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| Path::new(DEFAULT_OUT).to_path_buf());
    check_writable(&out)?;

    let (result, artifacts) = match run(cli.command, &cfg, &out) {
        Ok(a) => (Ok(()), a),
        Err((e, a)) => (Err(e), a),
    };
    for path in artifacts.commit(&out)? {
        println!("{}", path.display());
    }
    result
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
