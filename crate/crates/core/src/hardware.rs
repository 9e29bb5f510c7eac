//! Hardware non-idealities and the transmitter power budget.
//!
//! All powers are in mW. DAC distortion follows the additive quantization
//! noise model: a chain with a `b`-bit DAC scales its signal by
//! `1 - (pi*sqrt(3)/2) * 2^(-2b)`; the additive noise term is neglected.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;
use crate::error::{HbfError, Result};
use crate::system::{FrontSwitch, RearSwitch};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerParams {
    /// Baseband processing.
    pub p_bb: f64,
    /// Per phase shifter.
    pub p_ps: f64,
    /// Per RF switch.
    pub p_sw: f64,
    /// Per active RF chain.
    pub p_rfc: f64,
    /// DAC figure of merit times sampling rate; a `b`-bit DAC draws `p_d * 2^b`.
    pub p_d: f64,
    /// Per active antenna element.
    pub p_t: f64,
    /// Power-amplifier efficiency.
    pub rho_pa: f64,
    pub b_min: u32,
    pub b_max: u32,
}

impl Default for PowerParams {
    fn default() -> Self {
        PowerParams {
            p_bb: 200.0,
            p_ps: 30.0,
            p_sw: 5.0,
            p_rfc: 40.0,
            p_d: 0.39,
            p_t: 20.0,
            rho_pa: 0.3,
            b_min: 4,
            b_max: 16,
        }
    }
}

impl PowerParams {
    pub fn validate(&self) -> Result<()> {
        let powers = [self.p_bb, self.p_ps, self.p_sw, self.p_rfc, self.p_d, self.p_t];
        if powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(HbfError::InvalidParameter("power constants must be finite and >= 0".into()));
        }
        if !(self.rho_pa > 0.0 && self.rho_pa <= 1.0) {
            return Err(HbfError::InvalidParameter(format!("rho_pa = {} outside (0, 1]", self.rho_pa)));
        }
        if self.b_min == 0 || self.b_min > self.b_max || self.b_max > 30 {
            return Err(HbfError::InvalidParameter(format!(
                "DAC bounds [{}, {}] are invalid",
                self.b_min, self.b_max
            )));
        }
        Ok(())
    }

    pub fn dac_power(&self, bits: u32) -> f64 {
        self.p_d * f64::from(1u32 << bits)
    }

    /// Scales every power constant; efficiency and bounds are untouched.
    pub fn scaled(&self, factor: f64) -> PowerParams {
        PowerParams {
            p_bb: self.p_bb * factor,
            p_ps: self.p_ps * factor,
            p_sw: self.p_sw * factor,
            p_rfc: self.p_rfc * factor,
            p_d: self.p_d * factor,
            p_t: self.p_t * factor,
            ..self.clone()
        }
    }
}

/// Per-chain DAC resolutions, each within `[b_min, b_max]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DacResolution(Vec<u32>);

impl DacResolution {
    pub fn new(bits: Vec<u32>, pp: &PowerParams) -> Result<Self> {
        if let Some(b) = bits.iter().find(|b| **b < pp.b_min || **b > pp.b_max) {
            return Err(HbfError::InvalidParameter(format!(
                "DAC resolution {b} outside [{}, {}]",
                pp.b_min, pp.b_max
            )));
        }
        Ok(DacResolution(bits))
    }

    pub fn uniform(n_trf: usize, bits: u32, pp: &PowerParams) -> Result<Self> {
        Self::new(vec![bits; n_trf], pp)
    }

    pub fn bits(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn set(&mut self, chain: usize, bits: u32) {
        self.0[chain] = bits;
    }
}

/// Multiplicative DAC distortion for one chain.
pub fn delta_entry(bits: u32) -> f64 {
    1.0 - (PI * 3f64.sqrt() / 2.0) * 2f64.powi(-2 * bits as i32)
}

pub fn delta_matrix(b: &DacResolution) -> DMatrix<f64> {
    let n = b.len();
    DMatrix::from_fn(n, n, |i, j| if i == j { delta_entry(b.bits()[i]) } else { 0.0 })
}

/// Index `k` of the nearest grid phase `2*pi*k / 2^q` (circular distance,
/// ties toward smaller `k`).
pub fn quantize_phase_index(phi: f64, q: u32) -> u32 {
    let levels = 1u64 << q;
    let step = 2.0 * PI / levels as f64;
    let x = phi.rem_euclid(2.0 * PI) / step;
    let lower = (x.floor() as u64).min(levels - 1);
    let frac = x - lower as f64;
    let upper = (lower + 1) % levels;
    let k = if frac > 0.5 {
        upper
    } else if frac < 0.5 {
        lower
    } else {
        lower.min(upper)
    };
    k as u32
}

pub fn quantize_phase(phi: f64, q: u32) -> f64 {
    grid_phase(quantize_phase_index(phi, q), q)
}

pub fn grid_phase(k: u32, q: u32) -> f64 {
    2.0 * PI * f64::from(k) / (1u64 << q) as f64
}

/// Signed distance on the circle, in `(-pi, pi]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    if d > PI {
        d - 2.0 * PI
    } else {
        d
    }
}

/// Total power split into the switch-independent part, the chain/DAC part
/// driven by the front switch and the radiation part driven by the rear
/// switch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBreakdown {
    pub constant: f64,
    pub chains: f64,
    pub radiation: f64,
}

impl PowerBreakdown {
    pub fn total(&self) -> f64 {
        self.constant + self.chains + self.radiation
    }
}

/// Chain and DAC power: `p_rfc` plus `p_d * 2^b` for every chain that feeds
/// at least one phase shifter.
pub fn chain_power(s1: &FrontSwitch, b: &DacResolution, pp: &PowerParams) -> Result<f64> {
    if s1.n_trf() != b.len() {
        return Err(HbfError::InvalidArgument(format!(
            "front switch has {} chains but {} DAC resolutions were given",
            s1.n_trf(),
            b.len()
        )));
    }
    let occupied = s1.occupied_chains();
    let dac: f64 = occupied.iter().map(|&c| pp.dac_power(b.bits()[c])).sum();
    Ok(pp.p_rfc * occupied.len() as f64 + dac)
}

fn radiation_power(active_antennas: usize, pp: &PowerParams, cfg: &SystemConfig) -> f64 {
    // The normalized transmit power term is added in the mW budget as-is.
    let a = active_antennas as f64;
    pp.p_t * a / pp.rho_pa + cfg.n_s as f64 * a / cfg.n_t as f64
}

/// Power budget of the dual-switch architecture.
pub fn power_breakdown(
    s1: &FrontSwitch,
    s2: &RearSwitch,
    b: &DacResolution,
    pp: &PowerParams,
    cfg: &SystemConfig,
) -> Result<PowerBreakdown> {
    if s1.n_ps() != cfg.n_ps || s1.n_trf() != cfg.n_trf {
        return Err(HbfError::InvalidArgument(format!(
            "front switch is {}x{}, expected {}x{}",
            s1.n_ps(),
            s1.n_trf(),
            cfg.n_ps,
            cfg.n_trf
        )));
    }
    if s2.n_t() != cfg.n_t || s2.n_ps() != cfg.n_ps {
        return Err(HbfError::InvalidArgument(format!(
            "rear switch is {}x{}, expected {}x{}",
            s2.n_t(),
            s2.n_ps(),
            cfg.n_t,
            cfg.n_ps
        )));
    }
    let n_ps = cfg.n_ps as f64;
    Ok(PowerBreakdown {
        constant: pp.p_bb + pp.p_ps * n_ps + 2.0 * pp.p_sw * n_ps,
        chains: chain_power(s1, b, pp)?,
        radiation: radiation_power(s2.active_antennas(), pp, cfg),
    })
}

pub fn total_power(
    s1: &FrontSwitch,
    s2: &RearSwitch,
    b: &DacResolution,
    pp: &PowerParams,
    cfg: &SystemConfig,
) -> Result<f64> {
    Ok(power_breakdown(s1, s2, b, pp, cfg)?.total())
}

/// One RF chain and DAC per antenna, no analog network.
pub fn fully_digital_power(pp: &PowerParams, cfg: &SystemConfig, bits: u32) -> f64 {
    pp.p_bb + cfg.n_t as f64 * (pp.p_rfc + pp.dac_power(bits)) + radiation_power(cfg.n_t, pp, cfg)
}

/// Every chain reaches every antenna through its own phase shifter.
pub fn fully_connected_power(pp: &PowerParams, cfg: &SystemConfig, bits: u32) -> f64 {
    let n_trf = cfg.n_trf as f64;
    pp.p_bb
        + pp.p_ps * (cfg.n_t * cfg.n_trf) as f64
        + n_trf * (pp.p_rfc + pp.dac_power(bits))
        + radiation_power(cfg.n_t, pp, cfg)
}

/// One phase shifter and one chain-selection switch per antenna; only
/// occupied chains are powered.
pub fn dynamic_subarray_power(
    s1: &FrontSwitch,
    b: &DacResolution,
    pp: &PowerParams,
    cfg: &SystemConfig,
) -> Result<f64> {
    if s1.n_ps() != cfg.n_t {
        return Err(HbfError::InvalidArgument(format!(
            "dynamic subarray needs one phase shifter per antenna ({}), got {}",
            cfg.n_t,
            s1.n_ps()
        )));
    }
    let n_t = cfg.n_t as f64;
    Ok(pp.p_bb + (pp.p_ps + pp.p_sw) * n_t + chain_power(s1, b, pp)? + radiation_power(cfg.n_t, pp, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table_cfg() -> SystemConfig {
        SystemConfig::default()
    }

    fn two_chain_switch(n_ps: usize, n_trf: usize) -> FrontSwitch {
        FrontSwitch::new((0..n_ps).map(|i| i % 2).collect(), n_trf).unwrap()
    }

    #[test]
    fn delta_reference_values() {
        // 1 - (pi*sqrt(3)/2) * 2^-8 and 2^-16, evaluated by hand.
        let c = 2.720_699_046_351_326_6_f64;
        assert!((delta_entry(4) - (1.0 - c / 256.0)).abs() < 1e-15);
        assert!((delta_entry(4) - 0.989_372).abs() < 1e-6);
        assert!((delta_entry(8) - 0.999_958_5).abs() < 1e-7);
        assert!((delta_entry(30) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn delta_matrix_is_diagonal_in_unit_interval() {
        let pp = PowerParams::default();
        let b = DacResolution::new(vec![4, 7, 16], &pp).unwrap();
        let d = delta_matrix(&b);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert!(d[(i, j)] > 0.0 && d[(i, j)] < 1.0);
                } else {
                    assert_eq!(d[(i, j)], 0.0);
                }
            }
        }
        assert!(d[(0, 0)] < d[(1, 1)] && d[(1, 1)] < d[(2, 2)]);
    }

    #[test]
    fn resolution_bounds_are_enforced() {
        let pp = PowerParams::default();
        assert!(DacResolution::new(vec![3], &pp).is_err());
        assert!(DacResolution::new(vec![17], &pp).is_err());
        assert!(DacResolution::new(vec![4, 16], &pp).is_ok());
    }

    #[test]
    fn phase_quantization_examples() {
        assert_eq!(quantize_phase(0.0, 3), 0.0);
        assert_eq!(quantize_phase(2.0 * PI - 1e-6, 4), 0.0);
        assert!((quantize_phase(0.20, 4) - 2.0 * PI / 16.0).abs() < 1e-15);
        assert_eq!(quantize_phase(0.19, 4), 0.0);
        // exact half step between k=0 and k=1 goes to k=0
        assert_eq!(quantize_phase_index(PI / 16.0, 4), 0);
        // half step between the last grid point and 2*pi wraps to k=0
        assert_eq!(quantize_phase_index(2.0 * PI - PI / 16.0, 4), 0);
        assert_eq!(quantize_phase_index(-PI / 2.0, 2), 3);
    }

    proptest! {
        #[test]
        fn quantized_phase_is_nearest_grid_point(phi in -20.0f64..20.0, q in 1u32..8) {
            let out = quantize_phase(phi, q);
            let k = quantize_phase_index(phi, q);
            prop_assert!(k < (1 << q));
            prop_assert!(circular_distance(phi, out).abs() <= PI / f64::from(1u32 << q) + 1e-12);
        }

        #[test]
        fn power_is_monotone_in_resolution(bits in proptest::collection::vec(4u32..16, 4), chain in 0usize..4) {
            let pp = PowerParams::default();
            let cfg = table_cfg();
            let s1 = FrontSwitch::new((0..cfg.n_ps).map(|i| i % 4).collect(), 4).unwrap();
            let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps);
            let b = DacResolution::new(bits.clone(), &pp).unwrap();
            let mut bumped = bits;
            bumped[chain] += 1;
            let b2 = DacResolution::new(bumped, &pp).unwrap();
            prop_assert!(total_power(&s1, &s2, &b2, &pp, &cfg).unwrap() > total_power(&s1, &s2, &b, &pp, &cfg).unwrap());
        }
    }

    #[test]
    fn table_one_worked_instance() {
        let pp = PowerParams::default();
        let cfg = table_cfg();
        let s1 = two_chain_switch(cfg.n_ps, cfg.n_trf);
        let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps);
        let b = DacResolution::new(vec![8, 8, 4, 4], &pp).unwrap();
        let p = power_breakdown(&s1, &s2, &b, &pp, &cfg).unwrap();
        assert!((p.constant - 2200.0).abs() < 1e-9);
        assert!((p.chains - 279.68).abs() < 1e-9);
        assert!((p.radiation - (1000.0 / 0.3 + 100.0 / 64.0)).abs() < 1e-9);
        assert!((p.total() - 5814.58).abs() < 0.01);
    }

    #[test]
    fn adding_a_chain_costs_chain_plus_dac() {
        let pp = PowerParams::default();
        let cfg = table_cfg();
        let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps);
        let b = DacResolution::uniform(4, 4, &pp).unwrap();
        let one = FrontSwitch::new(vec![0; cfg.n_ps], 4).unwrap();
        let two = two_chain_switch(cfg.n_ps, 4);
        let d = total_power(&two, &s2, &b, &pp, &cfg).unwrap() - total_power(&one, &s2, &b, &pp, &cfg).unwrap();
        assert!((d - (pp.p_rfc + pp.p_d * 16.0)).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let pp = PowerParams::default();
        let cfg = table_cfg();
        let s1 = two_chain_switch(10, 4);
        let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps);
        let b = DacResolution::uniform(4, 8, &pp).unwrap();
        assert!(matches!(total_power(&s1, &s2, &b, &pp, &cfg), Err(HbfError::InvalidArgument(_))));
        let s1 = two_chain_switch(cfg.n_ps, 4);
        let b3 = DacResolution::uniform(3, 8, &pp).unwrap();
        assert!(matches!(chain_power(&s1, &b3, &pp), Err(HbfError::InvalidArgument(_))));
    }

    #[test]
    fn dynamic_subarray_gap_to_dual_switch() {
        let pp = PowerParams::default();
        let cfg = table_cfg();
        let b = DacResolution::uniform(4, 6, &pp).unwrap();
        let s1_prop = two_chain_switch(cfg.n_ps, 4);
        let s1_dsa = two_chain_switch(cfg.n_t, 4);
        let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps);
        let prop = total_power(&s1_prop, &s2, &b, &pp, &cfg).unwrap();
        let dsa = dynamic_subarray_power(&s1_dsa, &b, &pp, &cfg).unwrap();
        let (n_t, n_ps) = (cfg.n_t as f64, cfg.n_ps as f64);
        let expected = pp.p_ps * (n_t - n_ps) - pp.p_sw * (2.0 * n_ps - n_t)
            + (pp.p_t / pp.rho_pa) * (n_t - n_ps)
            + cfg.n_s as f64 * (1.0 - n_ps / n_t);
        assert!((dsa - prop - expected).abs() < 1e-9, "{} vs {expected}", dsa - prop);
    }

    #[test]
    fn baseline_budgets() {
        let pp = PowerParams::default();
        let cfg = table_cfg();
        let fd = fully_digital_power(&pp, &cfg, 16);
        let expected = 200.0 + 64.0 * (40.0 + 0.39 * 65536.0) + 64.0 * 20.0 / 0.3 + 2.0;
        assert!((fd - expected).abs() < 1e-6);
        let fc = fully_connected_power(&pp, &cfg, 16);
        let expected = 200.0 + 30.0 * 256.0 + 4.0 * (40.0 + 0.39 * 65536.0) + 64.0 * 20.0 / 0.3 + 2.0;
        assert!((fc - expected).abs() < 1e-6);
    }
}
