//! Monte-Carlo sweeps. Trial `t` draws its channel and solver seed from
//! `seed + t`, so every solver and every axis value sees the same channel.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::channel::{corrupt_csi, generate_channel, import_channel, partial_csi_channel, ChannelRealization};
use crate::config::{derive_seed, CsiMode, SystemConfig};
use crate::error::{HbfError, Result};
use crate::hardware::PowerParams;
use crate::linalg::CMatrix;
use crate::precoding::{run_solver, SolverConfig, SolverInput, SolverKind};
use crate::system::LinkBudget;

const CORRUPTION_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Axis {
    Snr,
    Nrf,
    Xi,
    Partial,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Snr => "snr",
            Axis::Nrf => "nrf",
            Axis::Xi => "xi",
            Axis::Partial => "partial",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = HbfError;

    fn from_str(s: &str) -> Result<Self> {
        [Axis::Snr, Axis::Nrf, Axis::Xi, Axis::Partial]
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| HbfError::Config(format!("unknown axis `{s}`")))
    }
}

impl TryFrom<String> for Axis {
    type Error = HbfError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Axis> for String {
    fn from(a: Axis) -> String {
        a.name().to_string()
    }
}

/// One (solver, axis value, trial) measurement. Failed trials carry NaN
/// metrics and a `failed: ...` status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub solver: String,
    pub axis: Axis,
    pub axis_value: f64,
    pub trial: usize,
    #[serde(rename = "se_bits_s_hz")]
    pub se: f64,
    pub power_mw: f64,
    #[serde(rename = "ee_bits_hz_j")]
    pub ee: f64,
    pub status: String,
}

impl ResultRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    fn failed(solver: String, axis: Axis, axis_value: f64, trial: usize, err: &HbfError) -> Self {
        ResultRow {
            solver,
            axis,
            axis_value,
            trial,
            se: f64::NAN,
            power_mw: f64::NAN,
            ee: f64::NAN,
            status: format!("failed: {err}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: Axis,
    /// Sorted by axis value, then trial, then solver label.
    pub rows: Vec<ResultRow>,
}

impl SweepResult {
    fn from_rows(axis: Axis, mut rows: Vec<ResultRow>) -> Self {
        rows.sort_by(|a, b| {
            a.axis_value
                .total_cmp(&b.axis_value)
                .then(a.trial.cmp(&b.trial))
                .then_with(|| a.solver.cmp(&b.solver))
        });
        SweepResult { axis, rows }
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// Distinct solver labels in sorted order.
    pub fn solvers(&self) -> Vec<String> {
        let mut names: Vec<String> = self.rows.iter().map(|r| r.solver.clone()).collect();
        names.sort();
        names.dedup();
        names
    }
}

/// Where trial channels come from.
#[derive(Debug, Clone)]
pub enum ChannelSource {
    Generated,
    /// Imported matrices, one per trial, in file-name order.
    Imported(Vec<ChannelRealization>),
}

impl ChannelSource {
    pub fn from_config(xcfg: &ExperimentConfig) -> Result<Self> {
        let Some(dir) = &xcfg.channel_dir else {
            return Ok(ChannelSource::Generated);
        };
        let mut files: Vec<_> = fs::read_dir(dir)
            .map_err(|e| HbfError::io(dir, e))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        if files.len() < xcfg.trials {
            return Err(HbfError::Config(format!(
                "{} holds {} channel files, {} trials requested",
                dir.display(),
                files.len(),
                xcfg.trials
            )));
        }
        let mut out = Vec::with_capacity(xcfg.trials);
        for path in files.iter().take(xcfg.trials) {
            let ch = import_channel(path)?;
            if ch.n_r() != xcfg.n_r || ch.n_t() != xcfg.n_t {
                return Err(HbfError::InvalidDimension(format!(
                    "{} is {}x{}, config expects {}x{}",
                    path.display(),
                    ch.n_r(),
                    ch.n_t(),
                    xcfg.n_r,
                    xcfg.n_t
                )));
            }
            out.push(ch);
        }
        Ok(ChannelSource::Imported(out))
    }

    pub fn channel(&self, cfg: &SystemConfig, trial: usize) -> Result<ChannelRealization> {
        match self {
            ChannelSource::Generated => generate_channel(cfg, cfg.paths, trial_seed(cfg.seed, trial)),
            ChannelSource::Imported(list) => list
                .get(trial)
                .cloned()
                .ok_or_else(|| HbfError::Config(format!("no imported channel for trial {trial}"))),
        }
    }
}

pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

/// The matrix the transmitter designs with under `mode`.
pub fn design_channel(ch: &ChannelRealization, mode: CsiMode, n_t: usize, seed: u64) -> Result<CMatrix> {
    match mode {
        CsiMode::Full => Ok(ch.h.clone()),
        CsiMode::Corrupted(xi) => corrupt_csi(&ch.h, xi, derive_seed(seed, CORRUPTION_STREAM)),
        CsiMode::Partial if ch.has_paths() => partial_csi_channel(&ch.paths, ch.gamma, n_t),
        CsiMode::Partial => Err(HbfError::UnsupportedMode(
            "partial CSI needs path parameters; imported channels have none".into(),
        )),
    }
}

struct Point<'a> {
    cfg: &'a SystemConfig,
    pp: &'a PowerParams,
    scfg: SolverConfig,
    link: LinkBudget,
    axis: Axis,
    axis_value: f64,
    trial: usize,
}

impl Point<'_> {
    fn run(&self, solvers: &[SolverKind], ch: &ChannelRealization, mode: CsiMode, suffix: &str) -> Vec<ResultRow> {
        let label = |k: SolverKind| format!("{}{suffix}", k.name());
        let design = self
            .cfg
            .validate()
            .and_then(|_| design_channel(ch, mode, self.cfg.n_t, self.scfg.seed));
        let design = match design {
            Ok(h) => h,
            Err(e) => {
                warn!("trial {} at {}={}: {e}", self.trial, self.axis, self.axis_value);
                return solvers
                    .iter()
                    .map(|&k| ResultRow::failed(label(k), self.axis, self.axis_value, self.trial, &e))
                    .collect();
            }
        };
        solvers
            .iter()
            .map(|&kind| {
                let input = SolverInput {
                    design_channel: &design,
                    paths: ch.has_paths().then_some(&ch.paths),
                    cfg: self.cfg,
                    link: self.link,
                    pp: self.pp,
                    scfg: &self.scfg,
                };
                match run_solver(kind, &input).and_then(|d| d.evaluate(&ch.h, &self.link)) {
                    Ok(m) => ResultRow {
                        solver: label(kind),
                        axis: self.axis,
                        axis_value: self.axis_value,
                        trial: self.trial,
                        se: m.se,
                        power_mw: m.power_mw,
                        ee: m.ee,
                        status: "ok".into(),
                    },
                    Err(e) => {
                        warn!("{kind} trial {} at {}={}: {e}", self.trial, self.axis, self.axis_value);
                        ResultRow::failed(label(kind), self.axis, self.axis_value, self.trial, &e)
                    }
                }
            })
            .collect()
    }
}

/// Runs `per_point` over every (axis value, trial) pair in parallel.
fn sweep<F>(xcfg: &ExperimentConfig, axis: Axis, values: &[f64], per_point: F) -> Result<SweepResult>
where
    F: Fn(f64, usize, &ChannelRealization) -> Vec<ResultRow> + Sync,
{
    xcfg.validate()?;
    if values.is_empty() {
        return Err(HbfError::Config(format!("empty grid for the {axis} axis")));
    }
    let source = ChannelSource::from_config(xcfg)?;
    let base = xcfg.system();
    let channels: Vec<ChannelRealization> = (0..xcfg.trials)
        .into_par_iter()
        .map(|t| source.channel(&base, t))
        .collect::<Result<_>>()?;
    debug!("{axis} sweep: {} points x {} trials", values.len(), xcfg.trials);
    let tasks: Vec<(f64, usize)> = values
        .iter()
        .flat_map(|&v| (0..xcfg.trials).map(move |t| (v, t)))
        .collect();
    let rows: Vec<ResultRow> = tasks
        .par_iter()
        .flat_map_iter(|&(v, t)| per_point(v, t, &channels[t]))
        .collect();
    Ok(SweepResult::from_rows(axis, rows))
}

fn solver_config(xcfg: &ExperimentConfig, trial: usize) -> SolverConfig {
    SolverConfig {
        seed: trial_seed(xcfg.seed, trial),
        ..xcfg.solver()
    }
}

pub fn run_snr_sweep(xcfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<SweepResult> {
    let cfg = xcfg.system();
    let pp = xcfg.power();
    sweep(xcfg, Axis::Snr, &xcfg.snr_grid, |snr, t, ch| {
        Point {
            cfg: &cfg,
            pp: &pp,
            scfg: solver_config(xcfg, t),
            link: LinkBudget::from_snr_db(snr),
            axis: Axis::Snr,
            axis_value: snr,
            trial: t,
        }
        .run(solvers, ch, cfg.csi_mode, "")
    })
}

pub fn run_nrf_sweep(xcfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<SweepResult> {
    let pp = xcfg.power();
    let values: Vec<f64> = xcfg.nrf_grid.iter().map(|&n| n as f64).collect();
    let configs: Vec<SystemConfig> = xcfg
        .nrf_grid
        .iter()
        .map(|&n_trf| SystemConfig { n_trf, ..xcfg.system() })
        .collect();
    sweep(xcfg, Axis::Nrf, &values, |v, t, ch| {
        let cfg = configs
            .iter()
            .find(|c| c.n_trf as f64 == v)
            .expect("grid value has a config");
        Point {
            cfg,
            pp: &pp,
            scfg: solver_config(xcfg, t),
            link: LinkBudget::from_snr_db(xcfg.fixed_snr_db),
            axis: Axis::Nrf,
            axis_value: v,
            trial: t,
        }
        .run(solvers, ch, cfg.csi_mode, "")
    })
}

/// Precoders designed on `xi * H + sqrt(1 - xi^2) * E`, scored on `H`. The
/// noise draw `E` of a trial is shared by every `xi`.
pub fn run_xi_sweep(xcfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<SweepResult> {
    let cfg = xcfg.system();
    let pp = xcfg.power();
    sweep(xcfg, Axis::Xi, &xcfg.xi_grid, |xi, t, ch| {
        Point {
            cfg: &cfg,
            pp: &pp,
            scfg: solver_config(xcfg, t),
            link: LinkBudget::from_snr_db(xcfg.fixed_snr_db),
            axis: Axis::Xi,
            axis_value: xi,
            trial: t,
        }
        .run(solvers, ch, CsiMode::Corrupted(xi), "")
    })
}

/// Partial versus full CSI over the SNR grid. Labels are `<solver>@partial`
/// and `<solver>@full`.
pub fn run_partial_csi_sweep(xcfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<SweepResult> {
    if xcfg.channel_dir.is_some() {
        return Err(HbfError::UnsupportedMode(
            "partial CSI needs generated channels with path parameters".into(),
        ));
    }
    let cfg = xcfg.system();
    let pp = xcfg.power();
    sweep(xcfg, Axis::Partial, &xcfg.snr_grid, |snr, t, ch| {
        let point = Point {
            cfg: &cfg,
            pp: &pp,
            scfg: solver_config(xcfg, t),
            link: LinkBudget::from_snr_db(snr),
            axis: Axis::Partial,
            axis_value: snr,
            trial: t,
        };
        let mut rows = point.run(solvers, ch, CsiMode::Partial, "@partial");
        rows.extend(point.run(solvers, ch, CsiMode::Full, "@full"));
        rows
    })
}

pub fn run_sweep(axis: Axis, xcfg: &ExperimentConfig, solvers: &[SolverKind]) -> Result<SweepResult> {
    match axis {
        Axis::Snr => run_snr_sweep(xcfg, solvers),
        Axis::Nrf => run_nrf_sweep(xcfg, solvers),
        Axis::Xi => run_xi_sweep(xcfg, solvers),
        Axis::Partial => run_partial_csi_sweep(xcfg, solvers),
    }
}

/// Writes `trials` generated channels as `channel_0000.csv`, ... into `dir`.
pub fn export_trial_channels(xcfg: &ExperimentConfig, dir: impl AsRef<Path>) -> Result<Vec<std::path::PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| HbfError::io(dir, e))?;
    let cfg = xcfg.system();
    (0..xcfg.trials)
        .map(|t| {
            let ch = ChannelSource::Generated.channel(&cfg, t)?;
            let path = dir.join(format!("channel_{t:04}.csv"));
            crate::channel::export_channel(&ch.h, &path)?;
            Ok(path)
        })
        .collect()
}
