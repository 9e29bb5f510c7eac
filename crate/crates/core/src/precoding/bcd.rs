//! Block coordinate descent over `(F_BB, S1, F_ps)` and the DAC vector `b`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{derive_seed, SystemConfig};
use crate::error::{HbfError, Result};
use crate::hardware::{DacResolution, PowerParams};
use crate::linalg::CMatrix;
use crate::system::{compose_analog, optimal_precoder, power_target, LinkBudget, PrecoderSolution, RearSwitch};

use super::altmin::altmin_inner;
use super::dac::{search_dac_resolution, DacObjective};
use super::{OuterRecord, SolveTrace, SolverConfig};

/// Rescales `F_BB` so that `||F_RF F_BB||_F^2 = n_s * n_ps / n_t`.
pub fn normalize_fbb(sol: &PrecoderSolution, cfg: &SystemConfig) -> Result<PrecoderSolution> {
    let current = (compose_analog(sol)? * &sol.f_bb).norm();
    if !(current > 0.0) || !current.is_finite() {
        return Err(HbfError::DegenerateAnalog("hybrid precoder has zero output power".into()));
    }
    let mut out = sol.clone();
    out.f_bb *= Complex64::new(power_target(cfg).sqrt() / current, 0.0);
    Ok(out)
}

pub(crate) fn check_dimensions(h: &CMatrix, cfg: &SystemConfig) -> Result<()> {
    if h.ncols() != cfg.n_t {
        return Err(HbfError::InvalidArgument(format!(
            "channel has {} columns, expected n_t = {}",
            h.ncols(),
            cfg.n_t
        )));
    }
    if cfg.n_s > cfg.n_trf {
        return Err(HbfError::InvalidArgument(format!(
            "{} streams need at least as many RF chains, have {}",
            cfg.n_s, cfg.n_trf
        )));
    }
    if !(cfg.n_trf <= cfg.n_ps && cfg.n_ps <= cfg.n_t) {
        return Err(HbfError::InvalidArgument("need n_trf <= n_ps <= n_t".into()));
    }
    Ok(())
}

/// Energy-efficiency-driven hybrid precoder for the dual-switch
/// architecture with the rear switch fixed to `[I; 0]`.
///
/// `h` is whatever the transmitter knows: the full channel, a corrupted
/// estimate, or the `L x n_t` partial-CSI matrix.
pub fn bcd_precoder(
    h: &CMatrix,
    cfg: &SystemConfig,
    link: &LinkBudget,
    pp: &PowerParams,
    scfg: &SolverConfig,
) -> Result<(PrecoderSolution, SolveTrace)> {
    bcd_with_rear_switch(h, cfg, link, pp, scfg, RearSwitch::stacked_identity(cfg.n_t, cfg.n_ps))
}

pub(crate) fn bcd_with_rear_switch(
    h: &CMatrix,
    cfg: &SystemConfig,
    link: &LinkBudget,
    pp: &PowerParams,
    scfg: &SolverConfig,
    s2: RearSwitch,
) -> Result<(PrecoderSolution, SolveTrace)> {
    check_dimensions(h, cfg)?;
    scfg.validate()?;
    let f_opt = optimal_precoder(h, cfg.n_s)?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(scfg.seed, 1));
    let mut b = DacResolution::new(
        (0..cfg.n_trf).map(|_| rng.random_range(pp.b_min..=pp.b_max)).collect(),
        pp,
    )?;

    // Independent of `b`; solved once.
    let alt = altmin_inner(&f_opt, &s2, cfg.n_trf, cfg.q, scfg, 0)?;
    let mut trace = SolveTrace {
        inner: alt.records,
        outer: Vec::new(),
    };

    let mut sol = normalize_fbb(
        &PrecoderSolution {
            f_bb: alt.f_bb,
            s1: alt.s1,
            f_ps: alt.f_ps,
            s2,
            b: b.clone(),
        },
        cfg,
    )?;

    let mut previous: Option<f64> = None;
    for outer in 0..scfg.n_iter1 {
        sol.b = b.clone();
        let objective = DacObjective::new(h, &sol, link, pp, cfg)?;
        let ee_before = objective.energy_efficiency(&sol.b)?;
        b = search_dac_resolution(h, &sol, link, pp, cfg)?;
        let (mi, _, ee_after) = objective.evaluate(&b)?;
        sol.b = b.clone();
        trace.outer.push(OuterRecord {
            outer,
            residual: alt.residual,
            ee_before_dac: ee_before,
            ee_after_dac: ee_after,
            mutual_information: mi,
            b: b.bits().to_vec(),
        });
        if let Some(prev) = previous {
            if (ee_after - prev).abs() <= scfg.tol * prev.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        previous = Some(ee_after);
    }
    Ok((sol, trace))
}
