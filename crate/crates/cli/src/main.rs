use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use embedvqe_cli::commands::{cmd_ed_reference, cmd_landscape, cmd_noize, cmd_risb_sweep, cmd_vqe, CliError};
use embedvqe_cli::config::{ConfigError, RunConfig};
use embedvqe_cli::output::{Metadata, Output};

#[derive(Parser)]
#[command(name = "embedvqe", version, about = "Slave-boson embedding of the Hubbard model with a simulated VQE solver")]
struct Cli {
    /// TOML configuration file; defaults apply to anything left out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Base seed (overrides optimizer.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for multi-start and grid parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// off, calibrated or scale=X.
    #[arg(long, global = true)]
    noise: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Multi-seed VQE on the embedding Hamiltonian at each U.
    Vqe,
    /// Natural-orbital iterations at each U.
    Noize,
    /// Embedding self-consistency over the U grid.
    RisbSweep,
    /// Cost landscape around the classical solution (one-site cells).
    Landscape,
    /// Exact-solver reference table.
    EdReference,
    /// Print the effective configuration.
    ShowConfig,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Vqe => "vqe",
            Command::Noize => "noize",
            Command::RisbSweep => "risb-sweep",
            Command::Landscape => "landscape",
            Command::EdReference => "ed-reference",
            Command::ShowConfig => "show-config",
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| ConfigError(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.optimizer.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.display().to_string();
    }
    if let Some(n) = &cli.noise {
        cfg.apply_noise_flag(n)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError(format!("--threads: {e}")))?;
    }
    if let Command::ShowConfig = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    // The hash identifies the computation, not where its results go.
    let mut hashed = cfg.clone();
    hashed.output.dir.clear();
    let out = Output::new(&cfg.output.dir, Metadata::new(cli.command.name(), &hashed.to_toml()))?;
    match cli.command {
        Command::Vqe => cmd_vqe(&cfg, &out),
        Command::Noize => cmd_noize(&cfg, &out),
        Command::RisbSweep => cmd_risb_sweep(&cfg, &out),
        Command::Landscape => cmd_landscape(&cfg, &out),
        Command::EdReference => cmd_ed_reference(&cfg, &out),
        Command::ShowConfig => unreachable!(),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("embedvqe: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
