//! Hybrid precoding solvers.
//!
//! `proposed-bcd` is the block coordinate descent for the dual-switch
//! architecture; `full-digital`, `fc-omp` and `dsa-altmin` are reference
//! designs evaluated under their own power models.

pub mod altmin;
pub mod baselines;
pub mod bcd;
pub mod dac;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::PathSet;
use crate::config::SystemConfig;
use crate::error::{HbfError, Result};
use crate::hardware::PowerParams;
use crate::linalg::CMatrix;
use crate::system::{
    ee_from, mutual_information_effective, optimal_combiner_effective, spectral_efficiency_effective, LinkBudget,
    PrecoderSolution,
};

pub use altmin::{altmin_inner, solve_fbb_procrustes, solve_switch_phase, AltMinOutput, SwitchPhase};
pub use baselines::{dsa_altmin_precoder, full_digital_precoder, hybrid_precoder, omp_fc_precoder};
pub use bcd::{bcd_precoder, normalize_fbb};
pub use dac::search_dac_resolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SolverKind {
    ProposedBcd,
    FullDigital,
    FcOmp,
    DsaAltmin,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::ProposedBcd,
        SolverKind::FullDigital,
        SolverKind::FcOmp,
        SolverKind::DsaAltmin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::ProposedBcd => "proposed-bcd",
            SolverKind::FullDigital => "full-digital",
            SolverKind::FcOmp => "fc-omp",
            SolverKind::DsaAltmin => "dsa-altmin",
        }
    }

    /// Parses a comma-separated list such as `proposed-bcd,fc-omp`.
    pub fn parse_list(s: &str) -> Result<Vec<SolverKind>> {
        let mut out: Vec<SolverKind> = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let kind: SolverKind = part.parse()?;
            if !out.contains(&kind) {
                out.push(kind);
            }
        }
        if out.is_empty() {
            return Err(HbfError::Config("no solvers selected".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = HbfError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HbfError::Config(format!("unknown solver `{s}`")))
    }
}

impl TryFrom<String> for SolverKind {
    type Error = HbfError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SolverKind> for String {
    fn from(k: SolverKind) -> String {
        k.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Outer (block coordinate) iterations.
    pub n_iter1: usize,
    /// Inner alternating-minimization iterations.
    pub n_iter2: usize,
    /// Relative-change stopping threshold for both loops.
    pub tol: f64,
    pub seed: u64,
    /// Fixed DAC resolution of the reference designs; `None` means `b_max`.
    pub baseline_bits: Option<u32>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_iter1: 10,
            n_iter2: 20,
            tol: 1e-4,
            seed: 0,
            baseline_bits: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_iter1 == 0 || self.n_iter2 == 0 {
            return Err(HbfError::InvalidParameter("iteration limits must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(HbfError::InvalidParameter("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn baseline_bits(&self, pp: &PowerParams) -> u32 {
        self.baseline_bits.unwrap_or(pp.b_max).clamp(pp.b_min, pp.b_max)
    }
}

/// One alternating-minimization iteration. `residual_*` is
/// `||F_opt - F_RF F_BB||_F`, which the `F_BB` update never increases.
/// `surrogate_*` replaces `||F_RF F_BB||_F^2` by `||F_RF||_F^2`; the
/// switch/phase update minimizes it exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerRecord {
    pub outer: usize,
    pub inner: usize,
    pub residual_before_fbb: f64,
    pub residual_after_fbb: f64,
    pub surrogate_before_fbb: f64,
    pub surrogate_after_fbb: f64,
    pub residual_after_switch: f64,
    pub surrogate_after_switch: f64,
}

/// One outer iteration: efficiency before and after the DAC step.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub outer: usize,
    pub residual: f64,
    pub ee_before_dac: f64,
    pub ee_after_dac: f64,
    pub mutual_information: f64,
    pub b: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveTrace {
    pub inner: Vec<InnerRecord>,
    pub outer: Vec<OuterRecord>,
}

impl SolveTrace {
    pub fn len(&self) -> usize {
        self.inner.len() + self.outer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A designed precoder together with the power its architecture draws.
#[derive(Debug, Clone)]
pub struct Design {
    pub kind: SolverKind,
    /// Effective `n_t x n_s` precoder including DAC distortion.
    pub precoder: CMatrix,
    pub power_mw: f64,
    pub solution: Option<PrecoderSolution>,
    pub trace: Option<SolveTrace>,
    pub omp_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Rate with the receiver's dominant-subspace combiner (bits/s/Hz).
    pub se: f64,
    /// Transmitter-side mutual information (bits/s/Hz).
    pub mi: f64,
    pub power_mw: f64,
    /// Mutual information per joule (bits/Hz/J).
    pub ee: f64,
}

impl Design {
    /// Scores the design on the true channel `h`.
    pub fn evaluate(&self, h: &CMatrix, link: &LinkBudget) -> Result<Metrics> {
        if h.ncols() != self.precoder.nrows() {
            return Err(HbfError::InvalidArgument(format!(
                "channel has {} columns, precoder drives {} antennas",
                h.ncols(),
                self.precoder.nrows()
            )));
        }
        let h_eff = h * &self.precoder;
        let n_s = self.precoder.ncols();
        let mi = mutual_information_effective(&h_eff, n_s, link)?;
        let (w, _) = optimal_combiner_effective(&h_eff, n_s)?;
        let se = spectral_efficiency_effective(&h_eff, &w, link)?;
        Ok(Metrics {
            se,
            mi,
            power_mw: self.power_mw,
            ee: ee_from(mi, self.power_mw)?,
        })
    }
}

/// Everything a solver may use: the channel the transmitter knows and, for
/// dictionary-based designs, the path geometry.
#[derive(Debug, Clone, Copy)]
pub struct SolverInput<'a> {
    pub design_channel: &'a CMatrix,
    pub paths: Option<&'a PathSet>,
    pub cfg: &'a SystemConfig,
    pub link: LinkBudget,
    pub pp: &'a PowerParams,
    pub scfg: &'a SolverConfig,
}

pub fn run_solver(kind: SolverKind, input: &SolverInput<'_>) -> Result<Design> {
    let SolverInput {
        design_channel: h,
        paths,
        cfg,
        link,
        pp,
        scfg,
    } = *input;
    match kind {
        SolverKind::ProposedBcd => {
            let (sol, trace) = bcd_precoder(h, cfg, &link, pp, scfg)?;
            let power_mw = crate::hardware::total_power(&sol.s1, &sol.s2, &sol.b, pp, cfg)?;
            Ok(Design {
                kind,
                precoder: hybrid_precoder(&sol)?,
                power_mw,
                solution: Some(sol),
                trace: Some(trace),
                omp_residuals: Vec::new(),
            })
        }
        SolverKind::FullDigital => full_digital_precoder(h, cfg, pp, scfg),
        SolverKind::FcOmp => omp_fc_precoder(h, paths, cfg, pp, scfg),
        SolverKind::DsaAltmin => dsa_altmin_precoder(h, cfg, pp, scfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_names_round_trip() {
        for k in SolverKind::ALL {
            assert_eq!(k.name().parse::<SolverKind>().unwrap(), k);
        }
        assert_eq!(
            SolverKind::parse_list("fc-omp, proposed-bcd,fc-omp").unwrap(),
            vec![SolverKind::FcOmp, SolverKind::ProposedBcd]
        );
        assert!(SolverKind::parse_list("magic").is_err());
        assert!(SolverKind::parse_list("").is_err());
    }
}
