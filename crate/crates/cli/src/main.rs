//! `warpwatch`: preprocess search-trend panels, build network metrics,
//! derive case curves, run DTW and the full parameter sweep.

mod commands;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use warpwatch_core::series::Date;
use warpwatch_core::{BandSpec, MetricKind, Preprocess};

#[derive(Debug, Parser)]
#[command(name = "warpwatch", version, about = "Search-network vs case-curve alignment with banded DTW")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stitch 30-day trend segments into one daily series per keyword.
    Preprocess {
        #[arg(long)]
        segments: PathBuf,
        /// Weekly reference export; required for `--method rescale`.
        #[arg(long)]
        weekly: Option<PathBuf>,
        /// rescale | msv
        #[arg(long)]
        method: Preprocess,
        #[arg(long)]
        out: PathBuf,
    },
    /// Daily network density or clustering from a keyword panel directory.
    Metrics {
        /// Directory of `<keyword>.csv` files.
        #[arg(long)]
        panel: PathBuf,
        /// density | clustering
        #[arg(long)]
        metric: MetricKind,
        #[arg(long)]
        threshold: f64,
        #[arg(long, default_value_t = 15)]
        window: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Daily confirmed and active cases from a line list.
    Cases {
        #[arg(long)]
        linelist: PathBuf,
        #[arg(long, default_value = "NCR")]
        region: String,
        #[arg(long, default_value = "NCR")]
        province: String,
        #[arg(long)]
        start: Date,
        #[arg(long)]
        end: Date,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align a case series with a metric series.
    Dtw {
        case: PathBuf,
        metric: PathBuf,
        /// Band radius in days, or `unconstrained`.
        #[arg(long, value_parser = commands::parse_band)]
        radius: BandSpec,
        /// Use the case values as given instead of min-max scaling them.
        #[arg(long)]
        no_normalize: bool,
        /// Trim both series to their common dates first.
        #[arg(long)]
        trim: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate every configuration of the parameter lattice.
    Sweep {
        /// JSON object of parameter domains; missing keys use the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        rescale_panel: Option<PathBuf>,
        #[arg(long)]
        msv_panel: Option<PathBuf>,
        #[arg(long)]
        confirmed: Option<PathBuf>,
        #[arg(long)]
        active: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthetic case/metric pair with a known lag.
    Synth {
        #[arg(long, default_value_t = 120)]
        length: usize,
        #[arg(long, default_value_t = 10)]
        lag: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also write two keyword panels of this size and an active-case series.
        #[arg(long)]
        panel_keywords: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Preprocess { segments, weekly, method, out } => {
            commands::preprocess(&segments, weekly.as_deref(), method, &out)
        }
        Command::Metrics { panel, metric, threshold, window, out } => {
            commands::metrics(&panel, metric, threshold, window, &out)
        }
        Command::Cases { linelist, region, province, start, end, out } => {
            commands::cases(&linelist, &region, &province, start, end, &out)
        }
        Command::Dtw { case, metric, radius, no_normalize, trim, out } => {
            commands::dtw(&case, &metric, radius, !no_normalize, trim, &out)
        }
        Command::Sweep { config, rescale_panel, msv_panel, confirmed, active, out } => {
            commands::sweep(commands::SweepPaths {
                config,
                rescale_panel,
                msv_panel,
                confirmed,
                active,
                out,
            })
        }
        Command::Synth { length, lag, noise, seed, panel_keywords, out } => {
            commands::synth(length, lag, noise, seed, panel_keywords, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("warpwatch: {e}");
            e.exit_code()
        }
    }
}
