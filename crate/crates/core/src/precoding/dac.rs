//! DAC resolution search with the analog/digital precoder fixed.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::Result;
use crate::hardware::{delta_entry, total_power, DacResolution, PowerParams};
use crate::linalg::CMatrix;
use crate::system::{compose_analog, ee_from, mutual_information_effective, LinkBudget, PrecoderSolution};

/// Energy efficiency as a function of the DAC vector alone, with `H F_RF`
/// precomputed.
pub struct DacObjective<'a> {
    h_rf: CMatrix,
    sol: &'a PrecoderSolution,
    link: &'a LinkBudget,
    pp: &'a PowerParams,
    cfg: &'a SystemConfig,
}

impl<'a> DacObjective<'a> {
    pub fn new(
        h: &CMatrix,
        sol: &'a PrecoderSolution,
        link: &'a LinkBudget,
        pp: &'a PowerParams,
        cfg: &'a SystemConfig,
    ) -> Result<Self> {
        let h_rf = h * compose_analog(sol)?;
        Ok(DacObjective { h_rf, sol, link, pp, cfg })
    }

    /// `(mutual information, power in mW, energy efficiency)`.
    pub fn evaluate(&self, b: &DacResolution) -> Result<(f64, f64, f64)> {
        let mut scaled = self.sol.f_bb.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= Complex64::new(delta_entry(b.bits()[i]), 0.0);
        }
        let mi = mutual_information_effective(&(&self.h_rf * scaled), self.sol.n_s(), self.link)?;
        let power = total_power(&self.sol.s1, &self.sol.s2, b, self.pp, self.cfg)?;
        Ok((mi, power, ee_from(mi, power)?))
    }

    pub fn energy_efficiency(&self, b: &DacResolution) -> Result<f64> {
        Ok(self.evaluate(b)?.2)
    }
}

/// Per-chain coordinate sweep over `[b_min, b_max]`, starting from the
/// solution's current resolutions. Each pass costs `(b_max - b_min + 1)`
/// evaluations per active chain; passes repeat until no chain changes.
/// Chains with no connected phase shifter are set to `b_min`. Equal
/// efficiencies resolve to the lower resolution.
pub fn search_dac_resolution(
    h: &CMatrix,
    sol: &PrecoderSolution,
    link: &LinkBudget,
    pp: &PowerParams,
    cfg: &SystemConfig,
) -> Result<DacResolution> {
    let objective = DacObjective::new(h, sol, link, pp, cfg)?;
    let occupied = sol.s1.occupied_chains();
    let mut b = sol.b.clone();
    for chain in 0..b.len() {
        if !occupied.contains(&chain) {
            b.set(chain, pp.b_min);
        }
    }
    let max_passes = (pp.b_max - pp.b_min + 1) as usize * occupied.len().max(1);
    for _ in 0..max_passes {
        let mut changed = false;
        for &chain in &occupied {
            let current = b.bits()[chain];
            let mut best_bits = current;
            let mut best_ee = objective.energy_efficiency(&b)?;
            for bits in pp.b_min..=pp.b_max {
                if bits == current {
                    continue;
                }
                b.set(chain, bits);
                let ee = objective.energy_efficiency(&b)?;
                if ee > best_ee || (ee == best_ee && bits < best_bits) {
                    best_ee = ee;
                    best_bits = bits;
                }
            }
            b.set(chain, best_bits);
            changed |= best_bits != current;
        }
        if !changed {
            break;
        }
    }
    Ok(b)
}
