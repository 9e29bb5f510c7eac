//! `hbfsim`: run sweeps and manage channel files.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use hbfsim_core::channel::import_channel;
use hbfsim_core::harness::{
    aggregate, emit_csv, emit_plot, emit_summary_csv, export_trial_channels, run_sweep, Axis, ExperimentConfig,
    PlotMetric,
};
use hbfsim_core::SolverKind;
use log::info;

#[derive(Parser)]
#[command(name = "hbfsim", version, about = "Dual-switch hybrid beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write results/summary CSVs.
    Sweep(SweepArgs),
    /// Generate or inspect channel files.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Print the default experiment configuration as TOML.
    DefaultConfig,
}

#[derive(clap::Args)]
struct SweepArgs {
    /// One of snr, nrf, xi, partial.
    #[arg(long)]
    axis: Axis,
    /// TOML experiment configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated solver names.
    #[arg(long, default_value = "proposed-bcd,full-digital,fc-omp,dsa-altmin")]
    solvers: String,
    #[arg(long)]
    out: PathBuf,
    /// Also write SE and EE plots as SVG.
    #[arg(long)]
    plot: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum ChannelCommand {
    /// Write one channel CSV per trial.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Read a channel CSV and print its dimensions and Frobenius norm.
    Import { file: PathBuf },
}

fn load_config(path: Option<&Path>, seed: Option<u64>, trials: Option<usize>) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(t) = trials {
        cfg.trials = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn x_label(axis: Axis) -> &'static str {
    match axis {
        Axis::Snr | Axis::Partial => "SNR (dB)",
        Axis::Nrf => "RF chains",
        Axis::Xi => "CSI accuracy",
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref(), args.seed, args.trials)?;
    let solvers = SolverKind::parse_list(&args.solvers)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let pool = rayon_pool(args.threads)?;
    let result = pool.install(|| run_sweep(args.axis, &cfg, &solvers))?;
    let axis = args.axis.name();
    let results_path = args.out.join(format!("{axis}_results.csv"));
    emit_csv(&result, &results_path)?;
    let aggs = aggregate(&result);
    emit_summary_csv(&aggs, args.out.join(format!("{axis}_summary.csv")))?;
    if args.plot {
        for metric in [PlotMetric::Se, PlotMetric::Ee] {
            let path = args.out.join(format!("{axis}_{}.svg", metric.file_stem()));
            emit_plot(&aggs, metric, x_label(args.axis), path)?;
        }
    }
    info!("wrote {} rows to {}", result.rows.len(), results_path.display());
    let failed = result.failed_rows();
    if failed > 0 {
        eprintln!("warning: {failed} rows failed; see the status column");
    }
    for a in &aggs {
        println!(
            "{:<24} {}={:<8} se={:.4} ee={:.4} power_mw={:.1}",
            a.solver, axis, a.axis_value, a.se_mean, a.ee_mean, a.power_mw_mean
        );
    }
    Ok(())
}

fn rayon_pool(threads: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

fn channel(cmd: ChannelCommand) -> Result<()> {
    match cmd {
        ChannelCommand::Gen { config, out, trials, seed } => {
            let cfg = load_config(config.as_deref(), seed, trials)?;
            if cfg.channel_dir.is_some() {
                bail!("channel gen needs a configuration without channel_dir");
            }
            let files = export_trial_channels(&cfg, &out)?;
            println!("wrote {} channel files to {}", files.len(), out.display());
        }
        ChannelCommand::Import { file } => {
            let ch = import_channel(&file).with_context(|| format!("reading {}", file.display()))?;
            println!("n_r={} n_t={} frobenius_norm={:.6}", ch.n_r(), ch.n_t(), ch.h.norm());
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Sweep(args) => sweep(args),
        Command::Channel(cmd) => channel(cmd),
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml_string()?);
            Ok(())
        }
    }
}
