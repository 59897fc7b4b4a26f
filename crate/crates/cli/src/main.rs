//! `modelyap`: measure and classify the divergence-rate signatures of
//! block-cipher modes of operation.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or validation
//! error.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;

#[derive(Parser)]
#[command(
    name = "modelyap",
    version,
    about = "Divergence-rate signatures of cipher modes"
)]
struct Cli {
    /// Worker threads for ensemble members (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ConfigArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Override the cipher (tea, xtea, aes128, toy-xor, toy-perm).
    #[arg(long)]
    cipher: Option<String>,

    /// Override the mode list.
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<String>>,

    /// Override the block count b.
    #[arg(long)]
    blocks: Option<usize>,

    /// Override the ensemble size.
    #[arg(long)]
    ensemble_size: Option<usize>,

    /// Override the horizon T.
    #[arg(long)]
    steps: Option<usize>,

    /// Override the RNG seed (beats MODELYAP_SEED and the config file).
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            cipher: self.cipher.clone(),
            modes: self.modes.clone(),
            blocks: self.blocks,
            ensemble_size: self.ensemble_size,
            steps: self.steps,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Verify a known-answer-test file.
    Kat {
        /// KAT file: `cipher_id,rounds,key_hex,plaintext_hex,ciphertext_hex` per line.
        file: PathBuf,
    },
    /// Run ensembles and write results, member curves and a manifest.
    Run {
        #[command(flatten)]
        config: ConfigArgs,

        /// Output directory.
        #[arg(long, short)]
        out: PathBuf,

        /// Also dump member 0's reference trajectory per mode.
        #[arg(long)]
        dump_trajectory: bool,

        /// Also dump exact defect counts as decimal sidecar files.
        #[arg(long)]
        dump_epsilon: bool,
    },
    /// Render normalized mean curves from results files into an SVG figure.
    Plot {
        /// One or more results.json files.
        #[arg(required = true)]
        results: Vec<PathBuf>,

        /// Output SVG path.
        #[arg(long, short)]
        out: PathBuf,

        /// Figure title.
        #[arg(long)]
        title: Option<String>,
    },
    /// Profile store operations.
    Profiles {
        #[command(subcommand)]
        action: ProfilesAction,
    },
    /// Classify a trace CSV against a profile store.
    Classify {
        /// Profile store (JSON) from `profiles build`.
        #[arg(long)]
        profiles: PathBuf,

        /// Trace CSV (`t,ln_epsilon,lambda,lambda_normalized`).
        #[arg(long)]
        trace: PathBuf,

        /// Also write the verdict as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the block-count ladder b in {2,4,8,12,16,20} and fit ln(b).
    SweepBlocks {
        #[command(flatten)]
        config: ConfigArgs,

        /// Output directory.
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ProfilesAction {
    /// Build a profile store from results files.
    Build {
        /// One or more results.json files covering all six modes per family.
        #[arg(required = true)]
        results: Vec<PathBuf>,

        /// Output profile store path.
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> Result<i32> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()?;
    }
    match cli.command {
        Command::Kat { file } => commands::kat::execute(&file),
        Command::Run {
            config,
            out,
            dump_trajectory,
            dump_epsilon,
        } => {
            let run = config::load(&config.config, &config.overrides())?;
            let options = commands::run::RunOptions {
                dump_trajectory,
                dump_epsilon,
            };
            commands::run::execute(&run, &out, &options)
        }
        Command::Plot {
            results,
            out,
            title,
        } => commands::plot::execute(&results, &out, title.as_deref()),
        Command::Profiles { action } => match action {
            ProfilesAction::Build { results, out } => commands::profiles::build(&results, &out),
        },
        Command::Classify {
            profiles,
            trace,
            json,
        } => commands::classify::execute(&profiles, &trace, json.as_deref()),
        Command::SweepBlocks { config, out } => {
            let run = config::load(&config.config, &config.overrides())?;
            commands::sweep::execute(&run, &out)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
