use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use aqae::cli::{run_evolve, run_selftest, run_spectrum, run_sweep, CliError, CliResult, Output};
use aqae::config::{Format, RunConfig};

#[derive(Parser)]
#[command(name = "aqae", version, about = "Annealer-based eigensolver and Feynman-clock time evolution")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Reads per zoom level, overriding `solver.reads`.
    #[arg(long, global = true)]
    reads: Option<usize>,
    /// Sweeps per read, overriding `solver.sweeps`.
    #[arg(long, global = true)]
    sweeps: Option<usize>,
    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Lowest levels of a scalar field site Hamiltonian.
    Spectrum,
    /// Time evolution of the plaquette or neutrino system through the clock operator.
    Evolve,
    /// Ground-state convergence while one solver parameter varies.
    Sweep,
    /// Fast deterministic checks of every layer.
    Selftest,
}

#[derive(ValueEnum, Clone, Copy)]
enum FormatArg {
    Csv,
    Json,
}

fn load(args: &Args) -> CliResult<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.solver.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = out.to_string_lossy().into_owned();
    }
    if let Some(f) = args.format {
        cfg.output.format = match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        };
    }
    if let Some(reads) = args.reads {
        cfg.solver.reads = reads;
    }
    if let Some(sweeps) = args.sweeps {
        cfg.solver.sweeps = sweeps;
    }
    Ok(cfg)
}

fn run(args: &Args) -> CliResult<()> {
    let cfg = load(args)?;
    if args.print_config {
        println!("{}", cfg.resolved().to_json());
        return Ok(());
    }
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let mut out = Output::new(&cfg.output.dir, cfg.output.format)?;
    let mut log = std::io::stdout().lock();
    match args.command {
        Command::Spectrum => run_spectrum(&cfg, &mut out, &mut log)?,
        Command::Evolve => run_evolve(&cfg, &mut out, &mut log)?,
        Command::Sweep => run_sweep(&cfg, &mut out, &mut log)?,
        Command::Selftest => run_selftest(&cfg, &mut out, &mut log)?,
    }
    for path in &out.written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
