//! Reference precoders: fully digital SVD, fully-connected spatially sparse
//! OMP, and alternating minimization on a dynamic subarray (one phase
//! shifter per antenna, switch-selected RF chain).

use std::f64::consts::PI;

use nalgebra::SVD;
use num_complex::Complex64;

use crate::channel::{upa_response, PathSet};
use crate::config::{perfect_square_side, SystemConfig};
use crate::error::{HbfError, Result};
use crate::hardware::{
    delta_entry, dynamic_subarray_power, fully_connected_power, fully_digital_power, DacResolution, PowerParams,
};
use crate::linalg::CMatrix;
use crate::system::{compose_analog, optimal_precoder, PrecoderSolution, RearSwitch};

use super::altmin::altmin_inner;
use super::bcd::{check_dimensions, normalize_fbb};
use super::{Design, SolverConfig, SolverKind};

/// Unconstrained SVD precoder, `||F||_F^2 = n_s`, one full-rate DAC per
/// antenna and no distortion.
pub fn full_digital_precoder(h: &CMatrix, cfg: &SystemConfig, pp: &PowerParams, scfg: &SolverConfig) -> Result<Design> {
    if h.ncols() != cfg.n_t {
        return Err(HbfError::InvalidArgument(format!(
            "channel has {} columns, expected n_t = {}",
            h.ncols(),
            cfg.n_t
        )));
    }
    let f = optimal_precoder(h, cfg.n_s)?;
    Ok(Design {
        kind: SolverKind::FullDigital,
        precoder: f,
        power_mw: fully_digital_power(pp, cfg, scfg.baseline_bits(pp)),
        solution: None,
        trace: None,
        omp_residuals: Vec::new(),
    })
}

/// Steering vectors on a uniform azimuth/elevation grid: `2*sqrt(n)`
/// azimuths times `sqrt(n)` elevations, `2n` columns in all.
pub fn grid_dictionary(n_t: usize) -> Result<CMatrix> {
    let side = perfect_square_side(n_t)
        .ok_or_else(|| HbfError::InvalidDimension(format!("{n_t} antennas is not a perfect square")))?;
    let n_az = 2 * side;
    let mut cols = Vec::with_capacity(n_az * side);
    for e in 0..side {
        let el = (e as f64 + 0.5) * PI / side as f64;
        for a in 0..n_az {
            let az = a as f64 * 2.0 * PI / n_az as f64;
            cols.push(upa_response(az, el, n_t)?);
        }
    }
    Ok(CMatrix::from_columns(&cols))
}

/// Path steering vectors when known, else the angular grid. Padded with the
/// grid when there are fewer paths than RF chains.
pub fn omp_dictionary(paths: Option<&PathSet>, n_t: usize, n_trf: usize) -> Result<CMatrix> {
    match paths {
        Some(p) if !p.is_empty() => {
            let a_t = p.transmit_steering(n_t)?;
            if a_t.ncols() >= n_trf {
                return Ok(a_t);
            }
            let grid = grid_dictionary(n_t)?;
            let cols: Vec<_> = a_t.column_iter().chain(grid.column_iter()).map(|c| c.into_owned()).collect();
            Ok(CMatrix::from_columns(&cols))
        }
        _ => grid_dictionary(n_t),
    }
}

/// Least-squares digital precoder for a fixed analog matrix.
fn least_squares(f_rf: &CMatrix, target: &CMatrix) -> Result<CMatrix> {
    let svd = SVD::new(f_rf.clone(), true, true);
    svd.solve(target, 1e-12)
        .map_err(|e| HbfError::DegenerateAnalog(format!("least squares failed: {e}")))
}

#[derive(Debug, Clone)]
pub struct OmpOutput {
    pub f_rf: CMatrix,
    pub f_bb: CMatrix,
    pub selected: Vec<usize>,
    /// `||F_opt - F_RF F_BB||_F` after each selection.
    pub residuals: Vec<f64>,
}

/// Greedy spatially sparse approximation of `f_opt` with `n_trf` dictionary
/// columns. The result is normalized to `||F_RF F_BB||_F^2 = n_s`.
pub fn omp_select(f_opt: &CMatrix, dictionary: &CMatrix, n_trf: usize) -> Result<OmpOutput> {
    if dictionary.ncols() < n_trf {
        return Err(HbfError::InvalidDimension(format!(
            "dictionary has {} atoms for {n_trf} RF chains",
            dictionary.ncols()
        )));
    }
    let mut residual = f_opt.clone();
    let mut selected: Vec<usize> = Vec::with_capacity(n_trf);
    let mut residuals = Vec::with_capacity(n_trf);
    let mut f_bb = CMatrix::zeros(0, f_opt.ncols());
    for _ in 0..n_trf {
        let psi = dictionary.adjoint() * &residual;
        let mut best = None::<(usize, f64)>;
        for k in 0..dictionary.ncols() {
            if selected.contains(&k) {
                continue;
            }
            let score = psi.row(k).norm_squared();
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((k, score));
            }
        }
        let (k, _) = best.expect("dictionary larger than selection");
        selected.push(k);
        let f_rf = dictionary.select_columns(&selected);
        f_bb = least_squares(&f_rf, f_opt)?;
        residual = f_opt - &f_rf * &f_bb;
        residuals.push(residual.norm());
    }
    let f_rf = dictionary.select_columns(&selected);
    let norm = (&f_rf * &f_bb).norm();
    if !(norm > 0.0) {
        return Err(HbfError::DegenerateAnalog("OMP precoder has zero output power".into()));
    }
    let f_bb = f_bb * Complex64::new((f_opt.ncols() as f64).sqrt() / norm, 0.0);
    Ok(OmpOutput {
        f_rf,
        f_bb,
        selected,
        residuals,
    })
}

/// Fully-connected hybrid precoder via OMP over transmit steering vectors.
pub fn omp_fc_precoder(
    h: &CMatrix,
    paths: Option<&PathSet>,
    cfg: &SystemConfig,
    pp: &PowerParams,
    scfg: &SolverConfig,
) -> Result<Design> {
    check_dimensions(h, cfg)?;
    let f_opt = optimal_precoder(h, cfg.n_s)?;
    let dictionary = omp_dictionary(paths, cfg.n_t, cfg.n_trf)?;
    let out = omp_select(&f_opt, &dictionary, cfg.n_trf)?;
    let bits = scfg.baseline_bits(pp);
    let delta = Complex64::new(delta_entry(bits), 0.0);
    Ok(Design {
        kind: SolverKind::FcOmp,
        precoder: &out.f_rf * &out.f_bb * delta,
        power_mw: fully_connected_power(pp, cfg, bits),
        solution: None,
        trace: None,
        omp_residuals: out.residuals,
    })
}

/// The dynamic subarray seen as the dual-switch network with one phase
/// shifter hard-wired to every antenna.
pub fn dsa_config(cfg: &SystemConfig) -> SystemConfig {
    SystemConfig {
        n_ps: cfg.n_t,
        ..cfg.clone()
    }
}

/// Alternating minimization on the dynamic subarray at a fixed DAC
/// resolution.
pub fn dsa_altmin_precoder(h: &CMatrix, cfg: &SystemConfig, pp: &PowerParams, scfg: &SolverConfig) -> Result<Design> {
    let dcfg = dsa_config(cfg);
    check_dimensions(h, &dcfg)?;
    scfg.validate()?;
    let f_opt = optimal_precoder(h, cfg.n_s)?;
    let s2 = RearSwitch::stacked_identity(cfg.n_t, cfg.n_t);
    let alt = altmin_inner(&f_opt, &s2, cfg.n_trf, cfg.q, scfg, 0)?;
    let b = DacResolution::uniform(cfg.n_trf, scfg.baseline_bits(pp), pp)?;
    let sol = normalize_fbb(
        &PrecoderSolution {
            f_bb: alt.f_bb,
            s1: alt.s1,
            f_ps: alt.f_ps,
            s2,
            b,
        },
        &dcfg,
    )?;
    let power_mw = dynamic_subarray_power(&sol.s1, &sol.b, pp, &dcfg)?;
    Ok(Design {
        kind: SolverKind::DsaAltmin,
        precoder: hybrid_precoder(&sol)?,
        power_mw,
        solution: Some(sol),
        trace: Some(super::SolveTrace {
            inner: alt.records,
            outer: Vec::new(),
        }),
        omp_residuals: Vec::new(),
    })
}

/// `F_RF * Delta * F_BB`.
pub fn hybrid_precoder(sol: &PrecoderSolution) -> Result<CMatrix> {
    let mut scaled = sol.f_bb.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row *= Complex64::new(delta_entry(sol.b.bits()[i]), 0.0);
    }
    Ok(compose_analog(sol)? * scaled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{generate_channel, ChannelRealization};
    use crate::linalg::{complex_gaussian_matrix, ONE};
    use crate::precoding::{bcd_precoder, run_solver, SolverInput};
    use crate::system::LinkBudget;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg16(l: usize, n_trf: usize, n_s: usize) -> SystemConfig {
        SystemConfig {
            n_t: 16,
            n_r: 4,
            n_trf,
            n_ps: 12,
            n_s,
            paths: l,
            ..SystemConfig::default()
        }
    }

    /// `log2 det(I + rho/(n_s sigma^2) H F F^H H^H)` by LU determinant.
    fn capacity_oracle(h: &CMatrix, f: &CMatrix, snr_db: f64) -> f64 {
        let rho = 10f64.powf(snr_db / 10.0);
        let hf = h * f;
        let m = CMatrix::identity(h.nrows(), h.nrows()) + &hf * hf.adjoint() * Complex64::new(rho / f.ncols() as f64, 0.0);
        m.determinant().re.log2()
    }

    #[test]
    fn full_digital_matches_direct_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cfg = SystemConfig {
            n_t: 4,
            n_r: 4,
            n_trf: 2,
            n_ps: 4,
            n_s: 2,
            ..SystemConfig::default()
        };
        let h = complex_gaussian_matrix(&mut rng, 4, 4);
        let d = full_digital_precoder(&h, &cfg, &PowerParams::default(), &SolverConfig::default()).unwrap();
        assert!((d.precoder.norm_squared() - 2.0).abs() < 1e-12);
        for snr in [-10.0, 0.0, 15.0] {
            let m = d.evaluate(&h, &LinkBudget::from_snr_db(snr)).unwrap();
            assert!((m.se - capacity_oracle(&h, &d.precoder, snr)).abs() < 1e-9);
        }
    }

    #[test]
    fn full_digital_rate_vanishes_at_low_snr() {
        let cfg = cfg16(4, 4, 2);
        let ch = generate_channel(&cfg, 4, 2).unwrap();
        let d = full_digital_precoder(&ch.h, &cfg, &PowerParams::default(), &SolverConfig::default()).unwrap();
        assert!(d.evaluate(&ch.h, &LinkBudget::from_snr_db(-200.0)).unwrap().se < 1e-12);
    }

    #[test]
    fn full_digital_dominates_hybrid_designs() {
        let pp = PowerParams::default();
        for seed in 0..10 {
            let cfg = cfg16(4, 4, 2);
            let ch = generate_channel(&cfg, 4, seed).unwrap();
            let link = LinkBudget::from_snr_db(5.0);
            let scfg = SolverConfig { seed, ..SolverConfig::default() };
            let input = SolverInput {
                design_channel: &ch.h,
                paths: Some(&ch.paths),
                cfg: &cfg,
                link,
                pp: &pp,
                scfg: &scfg,
            };
            let fd = run_solver(SolverKind::FullDigital, &input).unwrap().evaluate(&ch.h, &link).unwrap();
            for kind in [SolverKind::ProposedBcd, SolverKind::FcOmp, SolverKind::DsaAltmin] {
                let m = run_solver(kind, &input).unwrap().evaluate(&ch.h, &link).unwrap();
                assert!(fd.se >= m.se - 1e-9, "{kind}: {} > {}", m.se, fd.se);
            }
        }
    }

    #[test]
    fn single_path_omp_picks_the_path() {
        let cfg = cfg16(1, 1, 1);
        let pp = PowerParams::default();
        let ch = generate_channel(&cfg, 1, 5).unwrap();
        let f_opt = optimal_precoder(&ch.h, 1).unwrap();
        let dict = omp_dictionary(Some(&ch.paths), 16, 1).unwrap();
        let out = omp_select(&f_opt, &dict, 1).unwrap();
        assert_eq!(out.selected, vec![0]);
        let d = omp_fc_precoder(&ch.h, Some(&ch.paths), &cfg, &pp, &SolverConfig::default()).unwrap();
        let snr = 3.0;
        let rho = 10f64.powf(snr / 10.0);
        let a_t = upa_response(ch.paths.aod_az[0], ch.paths.aod_el[0], 16).unwrap();
        let gain = (&ch.h * &a_t).norm_squared() * delta_entry(pp.b_max).powi(2);
        let bound = (1.0 + rho * gain).log2();
        let se = d.evaluate(&ch.h, &LinkBudget::from_snr_db(snr)).unwrap().se;
        assert!((se - bound).abs() < 1e-9, "{se} vs {bound}");
    }

    #[test]
    fn omp_residuals_do_not_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f_opt = crate::linalg::random_semi_unitary(&mut rng, 16, 2);
        let dict = grid_dictionary(16).unwrap();
        assert_eq!(dict.ncols(), 32);
        let out = omp_select(&f_opt, &dict, 6).unwrap();
        for w in out.residuals.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        let mut sel = out.selected.clone();
        sel.sort();
        sel.dedup();
        assert_eq!(sel.len(), 6);
        assert!(((&out.f_rf * &out.f_bb).norm_squared() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn short_path_lists_are_padded_from_the_grid() {
        let cfg = cfg16(2, 4, 2);
        let ch = generate_channel(&cfg, 2, 7).unwrap();
        let dict = omp_dictionary(Some(&ch.paths), 16, 4).unwrap();
        assert_eq!(dict.ncols(), 2 + 32);
        let d = omp_fc_precoder(&ch.h, Some(&ch.paths), &cfg, &PowerParams::default(), &SolverConfig::default());
        assert!(d.is_ok());
    }

    #[test]
    fn omp_is_near_full_digital_when_paths_fit_the_chains() {
        let cfg = cfg16(4, 4, 2);
        let pp = PowerParams::default();
        let link = LinkBudget::from_snr_db(10.0);
        let (mut fc, mut fd) = (0.0, 0.0);
        for seed in 0..50 {
            let mut ch = generate_channel(&cfg, 4, seed).unwrap();
            // line-of-sight dominated: first path ten times stronger
            ch.paths.gains[0] *= 10.0;
            ch = ChannelRealization::from_paths(ch.paths, 4, 16).unwrap();
            let scfg = SolverConfig::default();
            fc += omp_fc_precoder(&ch.h, Some(&ch.paths), &cfg, &pp, &scfg).unwrap().evaluate(&ch.h, &link).unwrap().se;
            fd += full_digital_precoder(&ch.h, &cfg, &pp, &scfg).unwrap().evaluate(&ch.h, &link).unwrap().se;
        }
        assert!(fc >= 0.9 * fd, "{fc} vs {fd}");
    }

    #[test]
    fn dsa_coincides_with_proposed_when_every_antenna_has_a_shifter() {
        let cfg = SystemConfig { n_ps: 16, ..cfg16(4, 4, 2) };
        let pp = PowerParams::default();
        let link = LinkBudget::from_snr_db(0.0);
        for seed in 0..5 {
            let ch = generate_channel(&cfg, 4, seed).unwrap();
            let scfg = SolverConfig { seed, ..SolverConfig::default() };
            let (sol, _) = bcd_precoder(&ch.h, &cfg, &link, &pp, &scfg).unwrap();
            let dsa = dsa_altmin_precoder(&ch.h, &cfg, &pp, &scfg).unwrap().solution.unwrap();
            assert_eq!(sol.s1, dsa.s1);
            assert_eq!(sol.f_ps, dsa.f_ps);
            assert_eq!(sol.f_bb, dsa.f_bb);
        }
    }

    #[test]
    fn hybrid_precoder_applies_dac_gains() {
        let pp = PowerParams::default();
        let sol = PrecoderSolution {
            f_bb: CMatrix::from_element(2, 1, ONE),
            s1: crate::system::FrontSwitch::new(vec![0, 1], 2).unwrap(),
            f_ps: vec![ONE, ONE],
            s2: RearSwitch::stacked_identity(4, 2),
            b: DacResolution::new(vec![4, 8], &pp).unwrap(),
        };
        let f = hybrid_precoder(&sol).unwrap();
        assert!((f[(0, 0)].re - delta_entry(4)).abs() < 1e-15);
        assert!((f[(1, 0)].re - delta_entry(8)).abs() < 1e-15);
        assert_eq!(f[(2, 0)].norm(), 0.0);
    }
}
