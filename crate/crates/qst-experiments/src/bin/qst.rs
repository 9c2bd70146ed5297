//! `qst`: run one experiment and write its tables.
//!
//! Exit codes: 0 success, 1 numerical or I/O failure, 2 invalid
//! configuration or lattice, 3 resource limit exceeded.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qst_experiments::table::write_outcome;
use qst_experiments::{run, ExpError, ExperimentConfig, ExperimentKind, RunMetadata};

const LATTICE_HELP: &str = "\
Lattice text format (mirror.lattice or mirror.lattice_file): one line per row,
all rows the same length, one character per site:
  R  register (locally addressable electron spin)
  .  impurity (globally controlled only)
  #  hole (no site)
Sites are addressed as [row, col] from the top-left corner. In-row moves need
a register in the same contiguous run; vertical neighbours couple only when
mirror.distinct_spacing is true.";

#[derive(Parser)]
#[command(name = "qst", version, about = "Spin-chain state transfer experiments", after_help = LATTICE_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity grid over implantation disorder and T1, with participation ratios.
    DisorderSweep(RunArgs),
    /// Optimal register coupling and encoded fidelity against chain length.
    StrongScan(RunArgs),
    /// Exact-diagonalization infidelity of long-range chains.
    DipolarEd(RunArgs),
    /// Weak-coupling estimates against exact propagation.
    Perturbative(RunArgs),
    /// Oscillator bus at finite temperature.
    Bosonic(RunArgs),
    /// Mirror, propagated-swap and lattice-routing checks.
    MirrorVerify(RunArgs),
    /// Print the effective configuration as TOML and exit.
    PrintConfig {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; every key is optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disorder realizations (overrides the config).
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, ExpError> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn execute(kind: ExperimentKind, args: RunArgs) -> Result<(), ExpError> {
    let mut config = load(args.config.as_ref())?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(o) = args.out {
        config.output.dir = o;
    }
    if let Some(r) = args.realizations {
        config.realizations = r;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(ExpError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| ExpError::Config(e.to_string()))?;
    }
    let start = Instant::now();
    let outcome = run(kind, &config)?;
    let meta = RunMetadata::new(kind, &config, start.elapsed().as_secs_f64())?;
    for path in write_outcome(&config.output.dir, &meta, &outcome)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::DisorderSweep(a) => execute(ExperimentKind::DisorderSweep, a),
        Command::StrongScan(a) => execute(ExperimentKind::StrongScan, a),
        Command::DipolarEd(a) => execute(ExperimentKind::DipolarEd, a),
        Command::Perturbative(a) => execute(ExperimentKind::Perturbative, a),
        Command::Bosonic(a) => execute(ExperimentKind::Bosonic, a),
        Command::MirrorVerify(a) => execute(ExperimentKind::MirrorVerify, a),
        Command::PrintConfig { config } => load(config.as_ref()).and_then(|c| {
            c.validate()?;
            print!("{}", c.to_toml()?);
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
