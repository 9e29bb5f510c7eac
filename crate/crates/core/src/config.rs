//! System dimensions and run-level settings shared by every module.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{HbfError, Result};

/// What the transmitter knows about the channel when it designs a precoder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CsiMode {
    Full,
    /// Path gain magnitudes and departure angles only.
    Partial,
    /// `xi * H + sqrt(1 - xi^2) * E` with accuracy `xi`.
    Corrupted(f64),
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CsiMode::Full => f.write_str("full"),
            CsiMode::Partial => f.write_str("partial"),
            CsiMode::Corrupted(xi) => write!(f, "corrupted({xi})"),
        }
    }
}

impl FromStr for CsiMode {
    type Err = HbfError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "full" => return Ok(CsiMode::Full),
            "partial" => return Ok(CsiMode::Partial),
            _ => {}
        }
        let inner = s
            .strip_prefix("corrupted(")
            .and_then(|rest| rest.strip_suffix(')'))
            .ok_or_else(|| HbfError::Config(format!("unknown csi_mode `{s}`")))?;
        let xi: f64 = inner
            .trim()
            .parse()
            .map_err(|_| HbfError::Config(format!("bad accuracy in csi_mode `{s}`")))?;
        if !(0.0..=1.0).contains(&xi) {
            return Err(HbfError::Config(format!("csi accuracy {xi} outside [0, 1]")));
        }
        Ok(CsiMode::Corrupted(xi))
    }
}

impl TryFrom<String> for CsiMode {
    type Error = HbfError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CsiMode> for String {
    fn from(m: CsiMode) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub n_trf: usize,
    pub n_ps: usize,
    pub n_s: usize,
    /// Phase-shifter resolution in bits.
    pub q: u32,
    /// Number of multipath components.
    pub paths: usize,
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub csi_mode: CsiMode,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_t: 64,
            n_r: 16,
            n_trf: 4,
            n_ps: 50,
            n_s: 2,
            q: 4,
            paths: 5,
            snr_grid: (-10..=10).map(|k| 2.0 * k as f64).collect(),
            trials: 50,
            seed: 1,
            csi_mode: CsiMode::Full,
        }
    }
}

pub fn perfect_square_side(n: usize) -> Option<usize> {
    if n == 0 {
        return None;
    }
    let side = (n as f64).sqrt().round() as usize;
    (side * side == n).then_some(side)
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_t", self.n_t), ("n_r", self.n_r)] {
            if perfect_square_side(n).is_none() {
                return Err(HbfError::InvalidDimension(format!(
                    "{name} = {n} is not a positive perfect square"
                )));
            }
        }
        if self.n_s == 0 {
            return Err(HbfError::InvalidDimension("n_s must be at least 1".into()));
        }
        if !(self.n_s <= self.n_trf && self.n_trf <= self.n_ps && self.n_ps <= self.n_t) {
            return Err(HbfError::InvalidDimension(format!(
                "need n_s <= n_trf <= n_ps <= n_t, got {} <= {} <= {} <= {}",
                self.n_s, self.n_trf, self.n_ps, self.n_t
            )));
        }
        if self.q == 0 || self.q > 16 {
            return Err(HbfError::InvalidParameter(format!("q = {} outside 1..=16", self.q)));
        }
        if self.paths == 0 {
            return Err(HbfError::InvalidParameter("paths must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(HbfError::InvalidParameter("trials must be at least 1".into()));
        }
        if self.snr_grid.iter().any(|s| !s.is_finite()) {
            return Err(HbfError::InvalidParameter("snr_grid has non-finite values".into()));
        }
        Ok(())
    }
}

/// SplitMix64 finalizer; derives independent sub-seeds from a base seed.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csi_mode_round_trips_through_text() {
        for m in [CsiMode::Full, CsiMode::Partial, CsiMode::Corrupted(0.6)] {
            assert_eq!(m.to_string().parse::<CsiMode>().unwrap(), m);
        }
        assert!("corrupted(1.5)".parse::<CsiMode>().is_err());
        assert!("sometimes".parse::<CsiMode>().is_err());
    }

    #[test]
    fn default_config_is_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_infeasible_architecture() {
        let cfg = SystemConfig { n_s: 5, ..SystemConfig::default() };
        assert!(matches!(cfg.validate(), Err(HbfError::InvalidDimension(_))));
        let cfg = SystemConfig { n_t: 60, ..SystemConfig::default() };
        assert!(matches!(cfg.validate(), Err(HbfError::InvalidDimension(_))));
    }
}
