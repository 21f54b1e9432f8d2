use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dicke_cli::config::THREADS_ENV;
use dicke_cli::output::OutputManifest;
use dicke_cli::{execute, parse_config, CliError, CommandKind, ConfigLayer, RunConfig};

/// Ground states, quantum Fisher information and finite-size scaling of the
/// Dicke model.
#[derive(Parser)]
#[command(name = "dicke-qfi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat JSON file with the same keys as the flags (snake_case); flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: ConfigLayer,
}

#[derive(Subcommand)]
enum Command {
    /// Ground state at one coupling, printed as JSON
    Ground(RunArgs),
    /// Sweep records over a coupling grid at fixed N
    Sweep(RunArgs),
    /// Records at the critical coupling over sizes, with power-law fits
    Scaling(RunArgs),
    /// Thermodynamic-limit curves over a coupling grid; no solver involved
    Thermo(RunArgs),
    /// Scaling-variable pairs N(λ - λ_c)^{3/2}, F_Q N^{2/3} above λ_c
    Collapse(RunArgs),
    /// Repeats the run recorded in a manifest
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        /// Write to this path instead of the recorded output
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[arg(long, env = THREADS_ENV)]
        threads: Option<usize>,
    },
}

fn resolve(command: Command) -> Result<RunConfig, CliError> {
    let (kind, args) = match command {
        Command::Ground(a) => (CommandKind::Ground, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Scaling(a) => (CommandKind::Scaling, a),
        Command::Thermo(a) => (CommandKind::Thermo, a),
        Command::Collapse(a) => (CommandKind::Collapse, a),
        Command::Rerun { manifest, output, threads } => {
            let mut config = OutputManifest::read(&manifest)?.config;
            if output.is_some() {
                config.output = output;
            }
            if threads.is_some() {
                config.threads = threads;
            }
            config.validate()?;
            return Ok(config);
        }
    };
    parse_config(kind, args.config.as_deref(), args.settings)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = resolve(cli.command)?;
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
            pool.install(|| execute(&config)).map(|_| ())
        }
        None => execute(&config).map(|_| ()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
