//! Alternating minimization of `||F_opt - S2 F_ps S1 F_BB||_F` for a fixed
//! rear switch, with the DAC distortion taken as identity.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{HbfError, Result};
use crate::hardware::{grid_phase, quantize_phase_index};
use crate::linalg::{self, cis, CMatrix};
use crate::system::{compose_analog_parts, FrontSwitch, RearSwitch};

use super::{InnerRecord, SolverConfig};

/// Semi-unitary `F_BB` minimizing `||F_opt - F_RF F_BB||_F`: the closed
/// form refined by [`refine_fbb`] to a stationary point.
pub fn solve_fbb_procrustes(f_opt: &CMatrix, f_rf: &CMatrix) -> Result<CMatrix> {
    check_fbb_inputs(f_opt, f_rf)?;
    let start = procrustes_closed_form(f_opt, f_rf);
    Ok(refine_fbb(f_opt, f_rf, start))
}

fn check_fbb_inputs(f_opt: &CMatrix, f_rf: &CMatrix) -> Result<()> {
    if f_rf.nrows() != f_opt.nrows() {
        return Err(HbfError::InvalidArgument(format!(
            "analog precoder has {} rows, target has {}",
            f_rf.nrows(),
            f_opt.nrows()
        )));
    }
    if f_rf.ncols() < f_opt.ncols() {
        return Err(HbfError::InvalidDimension(format!(
            "{} RF chains cannot carry {} streams",
            f_rf.ncols(),
            f_opt.ncols()
        )));
    }
    if f_rf.iter().all(|z| z.norm_sqr() == 0.0) {
        return Err(HbfError::DegenerateAnalog("analog precoder is identically zero".into()));
    }
    Ok(())
}

/// `U V^H` from the thin SVD of `F_RF^H F_opt`. Exact when `F_RF^H F_RF` is
/// a multiple of the identity.
pub fn procrustes_closed_form(f_opt: &CMatrix, f_rf: &CMatrix) -> CMatrix {
    let svd = linalg::thin_svd(&(f_rf.adjoint() * f_opt));
    &svd.u * svd.v.adjoint()
}

/// Majorize-minimize iterations `X <- polar(F_RF^H F_opt + (lambda I - F_RF^H F_RF) X)`
/// with `lambda` the largest eigenvalue of `F_RF^H F_RF`. Each iteration
/// does not increase `||F_opt - F_RF X||_F` over semi-unitary `X`.
fn refine_fbb(f_opt: &CMatrix, f_rf: &CMatrix, start: CMatrix) -> CMatrix {
    const MAX_ITER: usize = 200;
    const REL_TOL: f64 = 1e-12;
    let gram = f_rf.adjoint() * f_rf;
    let lambda = gram.clone().symmetric_eigenvalues().max();
    let cross = f_rf.adjoint() * f_opt;
    let mut x = start;
    let mut current = residual(f_opt, f_rf, &x);
    for _ in 0..MAX_ITER {
        let m = &cross + (&x * Complex64::new(lambda, 0.0) - &gram * &x);
        let svd = linalg::thin_svd(&m);
        let next = &svd.u * svd.v.adjoint();
        let value = residual(f_opt, f_rf, &next);
        if value > current {
            break;
        }
        let done = current - value <= REL_TOL * current.max(f64::MIN_POSITIVE);
        x = next;
        current = value;
        if done {
            break;
        }
    }
    x
}

/// Semi-unitary `F_BB` update warm-started from the better of `previous` and
/// the closed form, so the residual never exceeds that of `previous`.
pub fn update_fbb(f_opt: &CMatrix, f_rf: &CMatrix, previous: &CMatrix) -> Result<CMatrix> {
    check_fbb_inputs(f_opt, f_rf)?;
    let closed = procrustes_closed_form(f_opt, f_rf);
    let start = if residual(f_opt, f_rf, previous) < residual(f_opt, f_rf, &closed) {
        previous.clone()
    } else {
        closed
    };
    Ok(refine_fbb(f_opt, f_rf, start))
}

/// Result of the switch/phase step: chain and grid index per phase shifter.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchPhase {
    pub s1: FrontSwitch,
    pub phase_idx: Vec<u32>,
    pub f_ps: Vec<Complex64>,
}

/// Per-row gain vectors `g_i = sum_{j in M_i} F_j` with `F = F_BB F_opt^H`.
/// Column `i` of the result is `g_i` (length `n_trf`).
pub fn switch_gains(f_opt: &CMatrix, f_bb: &CMatrix, s2: &RearSwitch) -> CMatrix {
    let f = f_bb * f_opt.adjoint();
    let mut g = CMatrix::zeros(f_bb.nrows(), s2.n_ps());
    for i in 0..s2.n_ps() {
        for j in s2.antennas_of(i) {
            let col = f.column(j).into_owned();
            let mut gi = g.column_mut(i);
            gi += col;
        }
    }
    g
}

/// Best `(chain, grid index, objective)` for one gain vector: maximizes
/// `Re(e^{j*Phi} * g[n])` over every chain `n` and every `q`-bit phase.
/// The best phase for a chain is the grid point nearest `2*pi - Arg(g[n])`;
/// a zero entry scores 0 at phase 0. Objectives within `tie_tol` of each
/// other are equal; equal objectives go to the chain with the smallest
/// `row_norms[n]` (the `||F_BB[n, :]||^2` the row would add to the
/// residual), then to the smallest `n`.
pub fn best_row_choice(g: &[Complex64], q: u32, row_norms: &[f64], tie_tol: f64) -> (usize, u32, f64) {
    debug_assert_eq!(g.len(), row_norms.len());
    let mut best: Option<(usize, u32, f64)> = None;
    for (n, &z) in g.iter().enumerate() {
        let (k, value) = if z.norm_sqr() == 0.0 {
            (0, 0.0)
        } else {
            let k = quantize_phase_index(2.0 * std::f64::consts::PI - linalg::arg(z), q);
            (k, (cis(grid_phase(k, q)) * z).re)
        };
        let better = match best {
            None => true,
            Some((m, _, v)) => value > v + tie_tol || ((value - v).abs() <= tie_tol && row_norms[n] < row_norms[m]),
        };
        if better {
            best = Some((n, k, value));
        }
    }
    best.unwrap_or((0, 0, 0.0))
}

/// Gains below this fraction of the largest gain count as ties.
const TIE_RTOL: f64 = 1e-10;

pub fn solve_switch_phase(f_opt: &CMatrix, f_bb: &CMatrix, s2: &RearSwitch, q: u32) -> Result<SwitchPhase> {
    if f_opt.nrows() != s2.n_t() || f_bb.ncols() != f_opt.ncols() {
        return Err(HbfError::InvalidArgument("switch/phase step dimension mismatch".into()));
    }
    let g = switch_gains(f_opt, f_bb, s2);
    let row_norms: Vec<f64> = f_bb.row_iter().map(|r| r.norm_squared()).collect();
    let tie_tol = TIE_RTOL * g.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut chain_of = Vec::with_capacity(s2.n_ps());
    let mut phase_idx = Vec::with_capacity(s2.n_ps());
    for i in 0..s2.n_ps() {
        let col: Vec<Complex64> = g.column(i).iter().copied().collect();
        let (n, k, _) = best_row_choice(&col, q, &row_norms, tie_tol);
        chain_of.push(n);
        phase_idx.push(k);
    }
    let f_ps = phase_idx.iter().map(|&k| cis(grid_phase(k, q))).collect();
    Ok(SwitchPhase {
        s1: FrontSwitch::new(chain_of, f_bb.nrows())?,
        phase_idx,
        f_ps,
    })
}

#[derive(Debug, Clone)]
pub struct AltMinOutput {
    /// Semi-unitary, not yet power-normalized.
    pub f_bb: CMatrix,
    pub s1: FrontSwitch,
    pub f_ps: Vec<Complex64>,
    pub phase_idx: Vec<u32>,
    pub residual: f64,
    pub records: Vec<InnerRecord>,
}

fn residual(f_opt: &CMatrix, f_rf: &CMatrix, f_bb: &CMatrix) -> f64 {
    (f_opt - f_rf * f_bb).norm()
}

/// Linearized residual: `||F_BB F_BB^H||` replaced by the identity, so that
/// `||F_RF F_BB||^2` becomes `||F_RF||^2`. Both alternating steps minimize it
/// exactly.
fn surrogate_residual(f_opt: &CMatrix, f_rf: &CMatrix, f_bb: &CMatrix) -> f64 {
    let cross = (f_rf * f_bb * f_opt.adjoint()).trace().re;
    (f_opt.norm_squared() + f_rf.norm_squared() - 2.0 * cross).max(0.0).sqrt()
}

/// Alternates the Procrustes and switch/phase steps from a seeded random
/// switch/phase configuration. Each iteration updates `F_BB` first, then
/// `(S1, F_ps)` for that `F_BB`; stops on a fixed point, on a relative
/// residual change below `tol`, or after `n_iter2` iterations.
pub fn altmin_inner(
    f_opt: &CMatrix,
    s2: &RearSwitch,
    n_trf: usize,
    q: u32,
    scfg: &SolverConfig,
    outer: usize,
) -> Result<AltMinOutput> {
    let n_ps = s2.n_ps();
    let n_s = f_opt.ncols();
    if f_opt.nrows() != s2.n_t() {
        return Err(HbfError::InvalidArgument(format!(
            "target precoder has {} rows, rear switch drives {} antennas",
            f_opt.nrows(),
            s2.n_t()
        )));
    }
    if n_s > n_trf {
        return Err(HbfError::InvalidDimension(format!("{n_s} streams exceed {n_trf} RF chains")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(scfg.seed);
    let chain_of: Vec<usize> = (0..n_ps).map(|_| rng.random_range(0..n_trf)).collect();
    let mut phase_idx: Vec<u32> = (0..n_ps).map(|_| rng.random_range(0..1u32 << q)).collect();
    let mut s1 = FrontSwitch::new(chain_of, n_trf)?;
    let mut f_ps: Vec<Complex64> = phase_idx.iter().map(|&k| cis(grid_phase(k, q))).collect();
    let mut f_rf = compose_analog_parts(&s1, &f_ps, s2)?;
    // Canonical semi-unitary start, only used to score the first update.
    let mut f_bb = CMatrix::from_fn(n_trf, n_s, |r, c| if r == c { linalg::ONE } else { linalg::ZERO });
    let mut records = Vec::with_capacity(scfg.n_iter2);
    let mut last = residual(f_opt, &f_rf, &f_bb);

    for inner in 0..scfg.n_iter2 {
        let before = residual(f_opt, &f_rf, &f_bb);
        let surrogate_before = surrogate_residual(f_opt, &f_rf, &f_bb);
        f_bb = update_fbb(f_opt, &f_rf, &f_bb)?;
        let after_fbb = residual(f_opt, &f_rf, &f_bb);
        let surrogate_after_fbb = surrogate_residual(f_opt, &f_rf, &f_bb);

        let step = solve_switch_phase(f_opt, &f_bb, s2, q)?;
        let unchanged = step.s1 == s1 && step.phase_idx == phase_idx;
        s1 = step.s1;
        phase_idx = step.phase_idx;
        f_ps = step.f_ps;
        f_rf = compose_analog_parts(&s1, &f_ps, s2)?;
        let after_switch = residual(f_opt, &f_rf, &f_bb);

        records.push(InnerRecord {
            outer,
            inner,
            residual_before_fbb: before,
            residual_after_fbb: after_fbb,
            surrogate_before_fbb: surrogate_before,
            surrogate_after_fbb,
            residual_after_switch: after_switch,
            surrogate_after_switch: surrogate_residual(f_opt, &f_rf, &f_bb),
        });

        let rel = (last - after_switch).abs() / last.max(f64::MIN_POSITIVE);
        last = after_switch;
        if unchanged || rel < scfg.tol {
            break;
        }
    }

    Ok(AltMinOutput {
        f_bb,
        s1,
        f_ps,
        phase_idx,
        residual: last,
        records,
    })
}
