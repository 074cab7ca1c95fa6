use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddq_cli::commands::{self, DEFAULT_GAMMA_B};
use ddq_cli::{CliError, RunConfig};

#[derive(Parser)]
#[command(
    name = "ddq",
    version,
    about = "Decoherence of a dispersively read-out transmon in a thermal line"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Background decay rate Γ_B in s⁻¹ added when reporting T₂.
    #[arg(long, global = true, default_value_t = DEFAULT_GAMMA_B)]
    gamma_b: f64,
    /// Seed for randomized fixtures; the computations themselves are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived couplings as JSON.
    Derive,
    /// Trajectory CSV with a JSON summary.
    Evolve {
        /// Summary path; defaults to the --out path with a .json extension.
        #[arg(long)]
        sidecar: Option<PathBuf>,
        /// Eigenvalues and σ_x overlaps of the d = 1 block.
        #[arg(long)]
        modes_out: Option<PathBuf>,
        /// The d = 1 block matrix as JSON.
        #[arg(long)]
        block_out: Option<PathBuf>,
    },
    /// Γ₂R over the configured sweep.
    Rates,
    /// Bath discretization convergence.
    Bathcheck {
        /// Mode spacings in rad/s.
        #[arg(long, value_delimiter = ',')]
        delta_omega: Vec<f64>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Validation("--config is required".into()))?;
    let cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} has no effect on deterministic commands");
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::Derive => emit(out, &commands::derive(&cfg)?),
        Command::Evolve {
            sidecar,
            modes_out,
            block_out,
        } => {
            let res = commands::evolve(&cfg)?;
            emit(out, &res.trajectory_csv)?;
            let summary = serde_json::to_string_pretty(&res.summary).map_err(|e| CliError::Io(e.to_string()))? + "\n";
            match sidecar.or_else(|| out.map(|p| p.with_extension("json"))) {
                Some(p) => emit(Some(&p), &summary)?,
                None => eprint!("{summary}"),
            }
            if let Some(p) = modes_out {
                emit(Some(&p), &res.modes_csv)?;
            }
            if let Some(p) = block_out {
                emit(Some(&p), &res.block_json)?;
            }
            if !res.summary.envelope_agreement {
                log::warn!("fitted envelope does not match Gamma_2R within tolerance");
            }
            Ok(())
        }
        Command::Rates => emit(out, &commands::rates(&cfg, cli.gamma_b, cli.jobs)?),
        Command::Bathcheck { delta_omega } => emit(out, &commands::bathcheck(&cfg, Some(&delta_omega))?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DDQ_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
