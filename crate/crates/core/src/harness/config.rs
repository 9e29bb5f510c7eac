//! Flat TOML experiment file. Every key is optional; unknown keys are
//! rejected.
//!
//! ```toml
//! n_t = 64
//! n_ps = 50
//! snr_grid = [0.0, 10.0, 20.0]
//! csi_mode = "corrupted(0.8)"
//! p_rfc = 40.0
//! n_iter1 = 10
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{CsiMode, SystemConfig};
use crate::error::{HbfError, Result};
use crate::hardware::PowerParams;
use crate::precoding::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n_trf: usize,
    pub n_ps: usize,
    pub n_s: usize,
    pub q: u32,
    pub paths: usize,
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub csi_mode: CsiMode,

    pub p_bb: f64,
    pub p_ps: f64,
    pub p_sw: f64,
    pub p_rfc: f64,
    pub p_d: f64,
    pub p_t: f64,
    pub rho_pa: f64,
    pub b_min: u32,
    pub b_max: u32,

    pub n_iter1: usize,
    pub n_iter2: usize,
    pub tol: f64,
    pub baseline_bits: Option<u32>,

    /// RF-chain counts for the `nrf` axis.
    pub nrf_grid: Vec<usize>,
    /// CSI accuracies for the `xi` axis.
    pub xi_grid: Vec<f64>,
    /// SNR used by the `nrf` and `xi` axes.
    pub fixed_snr_db: f64,
    /// Directory of exported channel files used instead of generated ones.
    pub channel_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let s = SystemConfig::default();
        let p = PowerParams::default();
        let v = SolverConfig::default();
        ExperimentConfig {
            n_t: s.n_t,
            n_r: s.n_r,
            n_trf: s.n_trf,
            n_ps: s.n_ps,
            n_s: s.n_s,
            q: s.q,
            paths: s.paths,
            snr_grid: s.snr_grid,
            trials: s.trials,
            seed: s.seed,
            csi_mode: s.csi_mode,
            p_bb: p.p_bb,
            p_ps: p.p_ps,
            p_sw: p.p_sw,
            p_rfc: p.p_rfc,
            p_d: p.p_d,
            p_t: p.p_t,
            rho_pa: p.rho_pa,
            b_min: p.b_min,
            b_max: p.b_max,
            n_iter1: v.n_iter1,
            n_iter2: v.n_iter2,
            tol: v.tol,
            baseline_bits: v.baseline_bits,
            nrf_grid: (2..=8).collect(),
            xi_grid: vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
            fixed_snr_db: 20.0,
            channel_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| HbfError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| HbfError::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let Some(dir) = cfg.channel_dir.as_mut() {
            if dir.is_relative() {
                if let Some(parent) = path.parent() {
                    *dir = parent.join(&*dir);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| HbfError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.system().validate()?;
        self.power().validate()?;
        self.solver().validate()?;
        if self.xi_grid.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(HbfError::Config("xi_grid values must lie in [0, 1]".into()));
        }
        if !self.fixed_snr_db.is_finite() {
            return Err(HbfError::Config("fixed_snr_db must be finite".into()));
        }
        Ok(())
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            n_t: self.n_t,
            n_r: self.n_r,
            n_trf: self.n_trf,
            n_ps: self.n_ps,
            n_s: self.n_s,
            q: self.q,
            paths: self.paths,
            snr_grid: self.snr_grid.clone(),
            trials: self.trials,
            seed: self.seed,
            csi_mode: self.csi_mode,
        }
    }

    pub fn power(&self) -> PowerParams {
        PowerParams {
            p_bb: self.p_bb,
            p_ps: self.p_ps,
            p_sw: self.p_sw,
            p_rfc: self.p_rfc,
            p_d: self.p_d,
            p_t: self.p_t,
            rho_pa: self.rho_pa,
            b_min: self.b_min,
            b_max: self.b_max,
        }
    }

    /// Solver settings; the seed is filled in per trial.
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            n_iter1: self.n_iter1,
            n_iter2: self.n_iter2,
            tol: self.tol,
            seed: self.seed,
            baseline_bits: self.baseline_bits,
        }
    }
}
