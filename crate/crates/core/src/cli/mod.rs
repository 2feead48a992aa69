//! Command line: experiment configs and presets, running arms across seeds,
//! CSV output and the summary table.

mod config;
mod run;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::data::mnist_files;
use crate::error::Error;

pub use config::{
    load_config, parse_config, preset, Arm, DataConfig, DataSource, EdgeConfig, ExperimentConfig, ModelKind, PRESETS,
};
pub use run::{
    format_summary, load_data, percent, run, run_with_data, validate_csv, ArmResult, RunOptions, RunReport, SummaryRow,
};

#[derive(Debug, Parser)]
#[command(
    name = "edgelearn",
    version,
    about = "Federated training over a simulated edge network"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a preset or a config file.
    Run {
        /// Preset name (sampling-fig3, staleness-fig4, table1, edgesim-demo) or path to a TOML config.
        config: String,
        /// Comma-separated seeds, replacing the config's.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Output directory; files go to OUT/<name>/.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Directory holding the four MNIST IDX files.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Use synthetic data instead of MNIST.
        #[arg(long)]
        synthetic: bool,
    },
    /// Check a metrics or event-log CSV against its schema.
    Validate { csv: PathBuf },
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID: u8 = 1;
pub const EXIT_MISSING_DATA: u8 = 2;

/// Runs a parsed command line and returns the process exit code.
pub fn execute(cli: Cli) -> u8 {
    match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            data,
            synthetic,
        } => {
            let cfg = match load_config(&config) {
                Ok(c) => c,
                Err(e) => return report(&e),
            };
            println!("# resolved config\n{}", cfg.resolved_toml());
            let opts = RunOptions {
                seeds,
                out,
                data_dir: data,
                synthetic,
            };
            match run(&cfg, &opts) {
                Ok(r) => {
                    print!("{}", format_summary(&r.summary, &cfg.baseline));
                    println!("csv written to {}", r.out_dir.display());
                    EXIT_OK
                }
                Err(e) => report(&e),
            }
        }
        Command::Validate { csv } => match validate_csv(&csv) {
            Ok(desc) => {
                println!("{}: ok ({desc})", csv.display());
                EXIT_OK
            }
            Err(e) => report(&e),
        },
    }
}

fn report(e: &Error) -> u8 {
    eprintln!("error: {e}");
    if let Error::MissingData { path } = e {
        let dir = path.parent().map(PathBuf::from).unwrap_or_default();
        let names: Vec<String> = mnist_files(&dir)
            .iter()
            .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect();
        eprintln!(
            "hint: place the uncompressed MNIST files ({}) in {}, point --data at them, or pass --synthetic",
            names.join(", "),
            dir.display()
        );
        return EXIT_MISSING_DATA;
    }
    EXIT_INVALID
}
