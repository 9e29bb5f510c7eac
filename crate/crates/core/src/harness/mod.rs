//! Configuration-driven Monte-Carlo sweeps with CSV and SVG output.

pub mod config;
pub mod output;
pub mod plot;
pub mod sweep;

pub use config::ExperimentConfig;
pub use output::{aggregate, emit_csv, emit_summary_csv, mean_stderr, read_results_csv, Aggregate, RESULTS_HEADER};
pub use plot::{emit_plot, render_svg, PlotMetric};
pub use sweep::{
    design_channel, export_trial_channels, run_nrf_sweep, run_partial_csi_sweep, run_snr_sweep, run_sweep,
    run_xi_sweep, trial_seed, Axis, ChannelSource, ResultRow, SweepResult,
};
