use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use despeckle_tdm::commands;

/// Speckle synthesis and PDE despeckling toolbox.
#[derive(Parser)]
#[command(name = "despeckle-tdm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multiply a clean PGM image with seeded multiplicative Gamma noise.
    Speckle {
        /// Clean input image (PGM P5/P2)
        #[arg(long = "in")]
        input: PathBuf,
        /// Speckled output image (PGM P5)
        #[arg(long = "out")]
        output: PathBuf,
        /// Number of looks L (noise variance is 1/L)
        #[arg(long, default_value_t = 1)]
        looks: u32,
        /// RNG seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Restore a speckled image with the configured PDE filter.
    Despeckle {
        /// Noisy input image
        #[arg(long = "in")]
        input: PathBuf,
        /// Restored output image; a `<out>.history.csv` sidecar records the
        /// per-step trajectory
        #[arg(long = "out")]
        output: PathBuf,
        /// Flat key=value run configuration (TOML)
        #[arg(long)]
        config: PathBuf,
        /// Clean reference; enables per-step PSNR and best-PSNR stopping
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Print one CSV row of quality measures for a restoration.
    Metrics {
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        noisy: PathBuf,
        #[arg(long)]
        restored: PathBuf,
        /// Window size of the speckle index (odd, >= 3)
        #[arg(long = "si-window", default_value_t = 3)]
        si_window: usize,
    },
    /// Run a benchmark suite and write the report CSV.
    Bench {
        /// Suite definition; omit to run the bundled default grid
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Report output path
        #[arg(long = "out")]
        output: PathBuf,
        /// Worker threads (default: available parallelism)
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Speckle {
            input,
            output,
            looks,
            seed,
        } => commands::cmd_speckle(&input, &output, looks, seed),
        Command::Despeckle {
            input,
            output,
            config,
            reference,
        } => commands::cmd_despeckle(&input, &output, &config, reference.as_deref()),
        Command::Metrics {
            clean,
            noisy,
            restored,
            si_window,
        } => commands::cmd_metrics(&clean, &noisy, &restored, si_window),
        Command::Bench { suite, output, jobs } => {
            commands::cmd_bench(suite.as_deref(), &output, jobs)
        }
    };
    ExitCode::from(code as u8)
}
