//! Analog network composition and link metrics.
//!
//! The analog precoder is `F_RF = S2 * diag(f_ps) * S1`: the front switch
//! `S1` (`n_ps x n_trf`, one-hot rows) routes each phase shifter to one RF
//! chain, the rear switch `S2` (`n_t x n_ps`) routes phase shifters to
//! antennas.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{HbfError, Result};
use crate::hardware::{self, delta_entry, quantize_phase_index, DacResolution, PowerParams};
use crate::linalg::{self, log2_det_eye_plus_gram, CMatrix, ONE, ZERO};

/// Front switch: each phase shifter is connected to exactly one RF chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrontSwitch {
    chain_of: Vec<usize>,
    n_trf: usize,
}

impl FrontSwitch {
    pub fn new(chain_of: Vec<usize>, n_trf: usize) -> Result<Self> {
        if let Some(c) = chain_of.iter().find(|&&c| c >= n_trf) {
            return Err(HbfError::InvalidArgument(format!("chain {c} out of range for {n_trf} chains")));
        }
        Ok(FrontSwitch { chain_of, n_trf })
    }

    /// Accepts a binary matrix and checks the one-hot row constraint.
    pub fn from_matrix(m: &DMatrix<u8>) -> Result<Self> {
        let mut chain_of = Vec::with_capacity(m.nrows());
        for (i, row) in m.row_iter().enumerate() {
            let ones: Vec<usize> = row.iter().enumerate().filter(|(_, v)| **v != 0).map(|(j, _)| j).collect();
            if ones.len() != 1 || row.iter().any(|v| *v > 1) {
                return Err(HbfError::InvalidArgument(format!("front switch row {i} is not one-hot")));
            }
            chain_of.push(ones[0]);
        }
        Ok(FrontSwitch { chain_of, n_trf: m.ncols() })
    }

    pub fn to_matrix(&self) -> DMatrix<u8> {
        DMatrix::from_fn(self.n_ps(), self.n_trf, |i, j| u8::from(self.chain_of[i] == j))
    }

    pub fn n_ps(&self) -> usize {
        self.chain_of.len()
    }

    pub fn n_trf(&self) -> usize {
        self.n_trf
    }

    pub fn chain_of(&self, ps: usize) -> usize {
        self.chain_of[ps]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.chain_of
    }

    /// Chains with at least one connected phase shifter, ascending.
    pub fn occupied_chains(&self) -> Vec<usize> {
        let mut used = vec![false; self.n_trf];
        for &c in &self.chain_of {
            used[c] = true;
        }
        (0..self.n_trf).filter(|&c| used[c]).collect()
    }
}

/// Rear switch, a binary `n_t x n_ps` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RearSwitch {
    m: DMatrix<u8>,
}

impl RearSwitch {
    pub fn new(m: DMatrix<u8>) -> Result<Self> {
        if m.iter().any(|v| *v > 1) {
            return Err(HbfError::InvalidArgument("rear switch must be binary".into()));
        }
        Ok(RearSwitch { m })
    }

    /// `[I_{n_ps}; 0]`: phase shifter `i` drives antenna `i`.
    pub fn stacked_identity(n_t: usize, n_ps: usize) -> Self {
        RearSwitch {
            m: DMatrix::from_fn(n_t, n_ps, |r, c| u8::from(r == c)),
        }
    }

    pub fn n_t(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_ps(&self) -> usize {
        self.m.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<u8> {
        &self.m
    }

    /// Antennas fed by phase shifter `ps`.
    pub fn antennas_of(&self, ps: usize) -> Vec<usize> {
        (0..self.n_t()).filter(|&r| self.m[(r, ps)] == 1).collect()
    }

    /// Number of antennas with at least one connected phase shifter.
    pub fn active_antennas(&self) -> usize {
        self.m.row_iter().filter(|row| row.iter().any(|v| *v == 1)).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub rho: f64,
    pub sigma_n2: f64,
}

impl LinkBudget {
    /// Unit noise variance, `rho = 10^(snr/10)`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        LinkBudget {
            rho: 10f64.powf(snr_db / 10.0),
            sigma_n2: 1.0,
        }
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * (self.rho / self.sigma_n2).log10()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecoderSolution {
    /// `n_trf x n_s`.
    pub f_bb: CMatrix,
    pub s1: FrontSwitch,
    /// Diagonal of the phase-shifter matrix; unit modulus.
    pub f_ps: Vec<Complex64>,
    pub s2: RearSwitch,
    pub b: DacResolution,
}

impl PrecoderSolution {
    pub fn n_s(&self) -> usize {
        self.f_bb.ncols()
    }

    pub fn occupied_chains(&self) -> usize {
        self.s1.occupied_chains().len()
    }
}

/// `n_s * n_ps / n_t`: the transmit power the dual-switch network can radiate
/// through its `n_ps` driven antennas.
pub fn power_target(cfg: &SystemConfig) -> f64 {
    cfg.n_s as f64 * cfg.n_ps as f64 / cfg.n_t as f64
}

pub fn compose_analog_parts(s1: &FrontSwitch, f_ps: &[Complex64], s2: &RearSwitch) -> Result<CMatrix> {
    if s1.n_ps() != f_ps.len() || s2.n_ps() != f_ps.len() {
        return Err(HbfError::InvalidArgument(format!(
            "front switch has {} rows, phase shifters {}, rear switch {} columns",
            s1.n_ps(),
            f_ps.len(),
            s2.n_ps()
        )));
    }
    let mut f_rf = CMatrix::zeros(s2.n_t(), s1.n_trf());
    for (i, &phase) in f_ps.iter().enumerate() {
        let chain = s1.chain_of(i);
        for ant in s2.antennas_of(i) {
            f_rf[(ant, chain)] += phase;
        }
    }
    Ok(f_rf)
}

pub fn compose_analog(sol: &PrecoderSolution) -> Result<CMatrix> {
    compose_analog_parts(&sol.s1, &sol.f_ps, &sol.s2)
}

fn scale_rows_by_delta(f_bb: &CMatrix, b: &DacResolution) -> Result<CMatrix> {
    if f_bb.nrows() != b.len() {
        return Err(HbfError::InvalidArgument(format!(
            "digital precoder has {} rows but {} DAC resolutions",
            f_bb.nrows(),
            b.len()
        )));
    }
    let mut out = f_bb.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= Complex64::new(delta_entry(b.bits()[i]), 0.0);
    }
    Ok(out)
}

/// `H * F_RF * Delta * F_BB`.
pub fn effective_channel(h: &CMatrix, sol: &PrecoderSolution) -> Result<CMatrix> {
    let f_rf = compose_analog(sol)?;
    if h.ncols() != f_rf.nrows() {
        return Err(HbfError::InvalidArgument(format!(
            "channel has {} columns but the analog precoder drives {} antennas",
            h.ncols(),
            f_rf.nrows()
        )));
    }
    Ok(h * f_rf * scale_rows_by_delta(&sol.f_bb, &sol.b)?)
}

/// Mutual information of an effective channel `H_eff` carrying `n_s`
/// equal-power streams.
pub fn mutual_information_effective(h_eff: &CMatrix, n_s: usize, link: &LinkBudget) -> Result<f64> {
    if !linalg::is_finite(h_eff) {
        return Err(HbfError::InvalidArgument("non-finite matrix entries".into()));
    }
    let scale = link.rho / (n_s as f64 * link.sigma_n2);
    Ok(log2_det_eye_plus_gram(h_eff, scale).max(0.0))
}

pub fn mutual_information(h: &CMatrix, sol: &PrecoderSolution, link: &LinkBudget) -> Result<f64> {
    if !linalg::is_finite(h) || !linalg::is_finite(&sol.f_bb) {
        return Err(HbfError::InvalidArgument("non-finite matrix entries".into()));
    }
    mutual_information_effective(&effective_channel(h, sol)?, sol.n_s(), link)
}

/// Rate after a linear combiner `W`, including the noise-whitening term
/// `(sigma^2 W^H W)^{-1}`.
pub fn spectral_efficiency_effective(h_eff: &CMatrix, w: &CMatrix, link: &LinkBudget) -> Result<f64> {
    let n_s = h_eff.ncols();
    if w.nrows() != h_eff.nrows() {
        return Err(HbfError::InvalidArgument(format!(
            "combiner has {} rows, channel has {}",
            w.nrows(),
            h_eff.nrows()
        )));
    }
    let svd = linalg::thin_svd(w);
    if w.ncols() > w.nrows() || linalg::numerical_rank(&svd.singular_values, 1e-12) < w.ncols() {
        return Err(HbfError::SingularCombiner);
    }
    let projected = w.adjoint() * h_eff;
    let scale = link.rho / (n_s as f64 * link.sigma_n2);
    if linalg::orthonormality_error(w) < 1e-10 {
        return Ok(log2_det_eye_plus_gram(&projected, scale).max(0.0));
    }
    // (W^H W)^{-1} X X^H has the determinant of L^{-1} X X^H L^{-H}.
    let chol = nalgebra::Cholesky::new(w.adjoint() * w).ok_or(HbfError::SingularCombiner)?;
    let whitened = chol
        .l()
        .solve_lower_triangular(&projected)
        .ok_or(HbfError::SingularCombiner)?;
    Ok(log2_det_eye_plus_gram(&whitened, scale).max(0.0))
}

pub fn spectral_efficiency(h: &CMatrix, sol: &PrecoderSolution, w: &CMatrix, link: &LinkBudget) -> Result<f64> {
    spectral_efficiency_effective(&effective_channel(h, sol)?, w, link)
}

/// Dominant `n_s` left singular vectors of `H_eff`. When `H_eff` has rank
/// below `n_s` the remaining columns are an arbitrary orthonormal complement
/// and the second value is `true`.
pub fn optimal_combiner_effective(h_eff: &CMatrix, n_s: usize) -> Result<(CMatrix, bool)> {
    let n_r = h_eff.nrows();
    if n_s > n_r {
        return Err(HbfError::InvalidDimension(format!("{n_s} streams exceed {n_r} receive antennas")));
    }
    let svd = linalg::thin_svd(h_eff);
    let rank = linalg::numerical_rank(&svd.singular_values, 1e-10).min(n_s);
    let mut cols: Vec<linalg::CVector> = (0..rank).map(|k| svd.u.column(k).into_owned()).collect();
    let degenerate = rank < n_s;
    if degenerate {
        warn!("effective channel rank {rank} below {n_s} streams; padding combiner");
        for e in 0..n_r {
            if cols.len() == n_s {
                break;
            }
            let mut v = linalg::CVector::from_fn(n_r, |i, _| if i == e { ONE } else { ZERO });
            for c in &cols {
                let proj = c.dotc(&v);
                v -= c * proj;
            }
            let norm = v.norm();
            if norm > 1e-8 {
                cols.push(v / Complex64::new(norm, 0.0));
            }
        }
    }
    Ok((CMatrix::from_columns(&cols), degenerate))
}

pub fn optimal_combiner(h: &CMatrix, sol: &PrecoderSolution) -> Result<CMatrix> {
    Ok(optimal_combiner_effective(&effective_channel(h, sol)?, sol.n_s())?.0)
}

/// The `n_s` dominant right singular vectors of `h`.
pub fn optimal_precoder(h: &CMatrix, n_s: usize) -> Result<CMatrix> {
    if n_s == 0 {
        return Err(HbfError::InvalidDimension("need at least one stream".into()));
    }
    if !linalg::is_finite(h) {
        return Err(HbfError::InvalidArgument("non-finite matrix entries".into()));
    }
    let svd = linalg::thin_svd(h);
    let rank = linalg::numerical_rank(&svd.singular_values, 1e-10);
    if rank < n_s {
        return Err(HbfError::DegenerateChannel { rank, required: n_s });
    }
    Ok(svd.v.columns(0, n_s).into_owned())
}

/// bits/Hz/J from bits/s/Hz and mW.
pub fn ee_from(rate: f64, power_mw: f64) -> Result<f64> {
    if !(power_mw > 0.0) {
        return Err(HbfError::InvalidParameter(format!("power {power_mw} mW is not positive")));
    }
    Ok(rate / (power_mw / 1000.0))
}

/// Transmitter-side energy efficiency of the dual-switch architecture:
/// mutual information over total power.
pub fn energy_efficiency(
    h: &CMatrix,
    sol: &PrecoderSolution,
    link: &LinkBudget,
    pp: &PowerParams,
    cfg: &SystemConfig,
) -> Result<f64> {
    let p = hardware::total_power(&sol.s1, &sol.s2, &sol.b, pp, cfg)?;
    ee_from(mutual_information(h, sol, link)?, p)
}

/// Checks every structural constraint on a dual-switch solution; returns a
/// description of the first violation.
pub fn check_feasibility(
    sol: &PrecoderSolution,
    cfg: &SystemConfig,
    pp: &PowerParams,
    power_tol: f64,
) -> std::result::Result<(), String> {
    if sol.s1.n_ps() != cfg.n_ps || sol.s1.n_trf() != cfg.n_trf {
        return Err("front switch shape".into());
    }
    if let Err(e) = FrontSwitch::from_matrix(&sol.s1.to_matrix()) {
        return Err(e.to_string());
    }
    for (i, z) in sol.f_ps.iter().enumerate() {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(format!("phase shifter {i} not unit modulus"));
        }
        let k = quantize_phase_index(linalg::arg(*z), cfg.q);
        if (linalg::cis(hardware::grid_phase(k, cfg.q)) - z).norm() > 1e-9 {
            return Err(format!("phase shifter {i} is off the {}-bit grid", cfg.q));
        }
    }
    if sol.b.bits().iter().any(|b| *b < pp.b_min || *b > pp.b_max) {
        return Err("DAC resolution out of bounds".into());
    }
    let f_rf = compose_analog(sol).map_err(|e| e.to_string())?;
    let p = (f_rf * &sol.f_bb).norm_squared();
    let target = cfg.n_s as f64 * sol.s2.active_antennas() as f64 / cfg.n_t as f64;
    if (p - target).abs() > power_tol {
        return Err(format!("transmit power {p} vs target {target}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian_matrix, random_semi_unitary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_solution(rng: &mut ChaCha8Rng, n_t: usize, n_ps: usize, n_trf: usize, n_s: usize, q: u32) -> PrecoderSolution {
        let pp = PowerParams::default();
        let s1 = FrontSwitch::new((0..n_ps).map(|_| rng.random_range(0..n_trf)).collect(), n_trf).unwrap();
        let f_ps = (0..n_ps)
            .map(|_| linalg::cis(hardware::grid_phase(rng.random_range(0..1u32 << q), q)))
            .collect();
        PrecoderSolution {
            f_bb: complex_gaussian_matrix(rng, n_trf, n_s),
            s1,
            f_ps,
            s2: RearSwitch::stacked_identity(n_t, n_ps),
            b: DacResolution::new((0..n_trf).map(|_| rng.random_range(4..=16)).collect(), &pp).unwrap(),
        }
    }

    #[test]
    fn single_chain_identity_phases() {
        let pp = PowerParams::default();
        let sol = PrecoderSolution {
            f_bb: CMatrix::from_element(2, 1, ONE),
            s1: FrontSwitch::new(vec![0; 3], 2).unwrap(),
            f_ps: vec![ONE; 3],
            s2: RearSwitch::stacked_identity(4, 3),
            b: DacResolution::uniform(2, 8, &pp).unwrap(),
        };
        let f_rf = compose_analog(&sol).unwrap();
        for r in 0..4 {
            assert_eq!(f_rf[(r, 0)], if r < 3 { ONE } else { ZERO });
            assert_eq!(f_rf[(r, 1)], ZERO);
        }
    }

    #[test]
    fn composition_matches_dense_triple_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
        let s2 = sol.s2.matrix().map(|v| Complex64::new(f64::from(v), 0.0));
        let s1 = sol.s1.to_matrix().map(|v| Complex64::new(f64::from(v), 0.0));
        let fps = CMatrix::from_diagonal(&linalg::CVector::from_vec(sol.f_ps.clone()));
        let dense = s2 * fps * s1;
        let f_rf = compose_analog(&sol).unwrap();
        assert!((dense - &f_rf).norm() < 1e-14);
        assert!(f_rf.iter().filter(|z| z.norm() > 0.0).all(|z| (z.norm() - 1.0).abs() < 1e-14));
    }

    #[test]
    fn zero_digital_precoder_has_zero_information() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
        sol.f_bb.fill(ZERO);
        let h = complex_gaussian_matrix(&mut rng, 4, 16);
        let mi = mutual_information(&h, &sol, &LinkBudget::from_snr_db(10.0)).unwrap();
        assert_eq!(mi, 0.0);
    }

    #[test]
    fn scalar_chain_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut sol = random_solution(&mut rng, 4, 4, 1, 1, 3);
        sol.f_bb = CMatrix::from_element(1, 1, Complex64::new(0.3, -0.2));
        let h = complex_gaussian_matrix(&mut rng, 1, 4);
        let link = LinkBudget::from_snr_db(3.0);
        let f_rf = compose_analog(&sol).unwrap();
        let hf = (&h * &f_rf)[(0, 0)];
        let delta = delta_entry(sol.b.bits()[0]);
        let expected = (1.0 + link.rho * (hf * sol.f_bb[(0, 0)]).norm_sqr() * delta * delta).log2();
        let got = mutual_information(&h, &sol, &link).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn information_is_monotone_in_snr_and_unitary_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..10 {
            let sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
            let h = complex_gaussian_matrix(&mut rng, 4, 16);
            let lo = mutual_information(&h, &sol, &LinkBudget { rho: 1.0, sigma_n2: 1.0 }).unwrap();
            let hi = mutual_information(&h, &sol, &LinkBudget { rho: 2.0, sigma_n2: 1.0 }).unwrap();
            assert!(hi >= lo);
            let u = random_semi_unitary(&mut rng, 4, 4);
            let rotated = mutual_information(&(u * &h), &sol, &LinkBudget { rho: 1.0, sigma_n2: 1.0 }).unwrap();
            assert!((rotated - lo).abs() < 1e-10);
        }
    }

    #[test]
    fn non_finite_channel_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sol = random_solution(&mut rng, 4, 4, 2, 1, 2);
        let mut h = complex_gaussian_matrix(&mut rng, 2, 4);
        h[(0, 0)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            mutual_information(&h, &sol, &LinkBudget::from_snr_db(0.0)),
            Err(HbfError::InvalidArgument(_))
        ));
    }

    #[test]
    fn dominant_combiner_recovers_information_and_bounds_others() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let link = LinkBudget::from_snr_db(5.0);
        for _ in 0..20 {
            let sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
            let h = complex_gaussian_matrix(&mut rng, 4, 16);
            let w = optimal_combiner(&h, &sol).unwrap();
            assert!(linalg::orthonormality_error(&w) < 1e-10);
            let se = spectral_efficiency(&h, &sol, &w, &link).unwrap();
            let mi = mutual_information(&h, &sol, &link).unwrap();
            // rank(H_eff) <= n_s, so the dominant subspace keeps everything
            assert!((se - mi).abs() < 1e-9);
            let other = random_semi_unitary(&mut rng, 4, 2);
            let se_other = spectral_efficiency(&h, &sol, &other, &link).unwrap();
            assert!(se_other <= se + 1e-12);
            assert!(se_other <= mi + 1e-12);
        }
    }

    #[test]
    fn whitening_term_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let link = LinkBudget::from_snr_db(0.0);
        let h_eff = complex_gaussian_matrix(&mut rng, 4, 2);
        let w = random_semi_unitary(&mut rng, 4, 2);
        let base = spectral_efficiency_effective(&h_eff, &w, &link).unwrap();
        let skewed = &w * CMatrix::from_row_slice(2, 2, &[Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.1), ZERO, Complex64::new(0.3, 0.0)]);
        let got = spectral_efficiency_effective(&h_eff, &skewed, &link).unwrap();
        assert!((got - base).abs() < 1e-10, "{got} vs {base}");
    }

    #[test]
    fn rank_deficient_combiner_is_rejected() {
        let h_eff = CMatrix::from_element(4, 2, ONE);
        let w = CMatrix::from_element(4, 2, ONE);
        assert!(matches!(
            spectral_efficiency_effective(&h_eff, &w, &LinkBudget::from_snr_db(0.0)),
            Err(HbfError::SingularCombiner)
        ));
    }

    #[test]
    fn zero_channel_gives_zero_rate_and_padded_combiner() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
        let h = CMatrix::zeros(4, 16);
        let (w, degenerate) = optimal_combiner_effective(&effective_channel(&h, &sol).unwrap(), 2).unwrap();
        assert!(degenerate);
        assert!(linalg::orthonormality_error(&w) < 1e-12);
        let link = LinkBudget::from_snr_db(10.0);
        assert_eq!(spectral_efficiency(&h, &sol, &w, &link).unwrap(), 0.0);
        let ee = energy_efficiency(
            &h,
            &sol,
            &link,
            &PowerParams::default(),
            &SystemConfig { n_t: 16, n_r: 4, n_trf: 3, n_ps: 8, n_s: 2, ..SystemConfig::default() },
        )
        .unwrap();
        assert_eq!(ee, 0.0);
    }

    #[test]
    fn rank_one_combiner_is_principal_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = complex_gaussian_matrix(&mut rng, 4, 1);
        let v = complex_gaussian_matrix(&mut rng, 1, 1);
        let h_eff = &u * &v;
        let (w, _) = optimal_combiner_effective(&h_eff, 1).unwrap();
        let overlap = (w.adjoint() * &u)[(0, 0)].norm() / u.norm();
        assert!((overlap - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_channel_precoder() {
        let mut h = CMatrix::zeros(3, 3);
        for (i, v) in [3.0, 2.0, 1.0].iter().enumerate() {
            h[(i, i)] = Complex64::new(*v, 0.0);
        }
        let f = optimal_precoder(&h, 2).unwrap();
        for c in 0..2 {
            for r in 0..3 {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((f[(r, c)].norm() - expected).abs() < 1e-12);
            }
        }
        let deficient = CMatrix::from_element(3, 3, ONE);
        assert!(matches!(optimal_precoder(&deficient, 2), Err(HbfError::DegenerateChannel { rank: 1, required: 2 })));
    }

    #[test]
    fn svd_precoder_beats_random_semi_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let link = LinkBudget::from_snr_db(0.0);
        for _ in 0..20 {
            let h = complex_gaussian_matrix(&mut rng, 4, 16);
            let f = optimal_precoder(&h, 2).unwrap();
            assert!(linalg::orthonormality_error(&f) < 1e-10);
            let best = mutual_information_effective(&(&h * &f), 2, &link).unwrap();
            for _ in 0..20 {
                let g = random_semi_unitary(&mut rng, 16, 2);
                assert!(mutual_information_effective(&(&h * &g), 2, &link).unwrap() <= best + 1e-12);
            }
        }
    }

    #[test]
    fn halving_power_doubles_efficiency() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = SystemConfig { n_t: 16, n_r: 4, n_trf: 3, n_ps: 8, n_s: 2, ..SystemConfig::default() };
        let sol = random_solution(&mut rng, 16, 8, 3, 2, 4);
        let h = complex_gaussian_matrix(&mut rng, 4, 16);
        let link = LinkBudget::from_snr_db(5.0);
        let pp = PowerParams::default();
        let full = energy_efficiency(&h, &sol, &link, &pp, &cfg).unwrap();
        let half = energy_efficiency(&h, &sol, &link, &pp.scaled(0.5), &cfg).unwrap();
        // the normalized transmit-power term does not scale with the constants
        let p_full = hardware::total_power(&sol.s1, &sol.s2, &sol.b, &pp, &cfg).unwrap();
        let p_half = hardware::total_power(&sol.s1, &sol.s2, &sol.b, &pp.scaled(0.5), &cfg).unwrap();
        assert!((half / full - p_full / p_half).abs() < 1e-12);
        let mi = mutual_information(&h, &sol, &link).unwrap();
        assert!((full - mi / (p_full / 1000.0)).abs() < 1e-12);
    }
}
