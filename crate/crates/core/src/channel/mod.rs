//! Narrowband extended Saleh-Valenzuela channels over uniform planar arrays.
//!
//! A channel is `H = gamma * A_r * Lambda * A_t^H` where the columns of `A_t`
//! and `A_r` are UPA steering vectors and `Lambda` holds the complex path
//! gains. Channels can also be imported from CSV (for matrices produced by an
//! external ray tracer or measurement campaign); those carry no path data.

mod csv;

pub use self::csv::{export_channel, import_channel, parse_channel, write_channel};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{perfect_square_side, SystemConfig};
use crate::error::{HbfError, Result};
use crate::linalg::{complex_gaussian, complex_gaussian_matrix, CMatrix, CVector};

/// Multipath parameters of one channel draw.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathSet {
    pub gains: Vec<Complex64>,
    pub aod_az: Vec<f64>,
    pub aod_el: Vec<f64>,
    pub aoa_az: Vec<f64>,
    pub aoa_el: Vec<f64>,
}

impl PathSet {
    pub fn new(
        gains: Vec<Complex64>,
        aod_az: Vec<f64>,
        aod_el: Vec<f64>,
        aoa_az: Vec<f64>,
        aoa_el: Vec<f64>,
    ) -> Result<Self> {
        let l = gains.len();
        if [aod_az.len(), aod_el.len(), aoa_az.len(), aoa_el.len()]
            .iter()
            .any(|&n| n != l)
        {
            return Err(HbfError::InvalidDimension(
                "path gain and angle vectors differ in length".into(),
            ));
        }
        let az_ok = |v: &[f64]| v.iter().all(|a| (0.0..2.0 * PI).contains(a));
        let el_ok = |v: &[f64]| v.iter().all(|e| (0.0..=PI).contains(e));
        if !az_ok(&aod_az) || !az_ok(&aoa_az) || !el_ok(&aod_el) || !el_ok(&aoa_el) {
            return Err(HbfError::InvalidParameter(
                "azimuth must lie in [0, 2pi) and elevation in [0, pi]".into(),
            ));
        }
        Ok(PathSet {
            gains,
            aod_az,
            aod_el,
            aoa_az,
            aoa_el,
        })
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// Transmit steering matrix `A_t` (`n_t x L`).
    pub fn transmit_steering(&self, n_t: usize) -> Result<CMatrix> {
        steering_matrix(&self.aod_az, &self.aod_el, n_t)
    }

    /// Receive steering matrix `A_r` (`n_r x L`).
    pub fn receive_steering(&self, n_r: usize) -> Result<CMatrix> {
        steering_matrix(&self.aoa_az, &self.aoa_el, n_r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
    /// Empty for imported channels.
    pub paths: PathSet,
    pub gamma: f64,
}

impl ChannelRealization {
    /// Builds `gamma * A_r * Lambda * A_t^H` with `gamma = sqrt(n_r * n_t) / L`.
    pub fn from_paths(paths: PathSet, n_r: usize, n_t: usize) -> Result<Self> {
        if paths.is_empty() {
            return Err(HbfError::InvalidParameter("need at least one path".into()));
        }
        let gamma = normalization_factor(n_r, n_t, paths.len());
        let h = reconstruct(&paths, gamma, n_r, n_t)?;
        Ok(ChannelRealization { h, paths, gamma })
    }

    pub fn from_matrix(h: CMatrix) -> Self {
        ChannelRealization {
            h,
            paths: PathSet::default(),
            gamma: 1.0,
        }
    }

    pub fn n_r(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_t(&self) -> usize {
        self.h.ncols()
    }

    pub fn has_paths(&self) -> bool {
        !self.paths.is_empty()
    }
}

pub fn normalization_factor(n_r: usize, n_t: usize, paths: usize) -> f64 {
    ((n_r * n_t) as f64).sqrt() / paths as f64
}

/// `gamma * A_r * Lambda * A_t^H` from a path set.
pub fn reconstruct(paths: &PathSet, gamma: f64, n_r: usize, n_t: usize) -> Result<CMatrix> {
    let a_t = paths.transmit_steering(n_t)?;
    let a_r = paths.receive_steering(n_r)?;
    let mut scaled = a_r;
    for (mut col, g) in scaled.column_iter_mut().zip(&paths.gains) {
        col *= *g * gamma;
    }
    Ok(scaled * a_t.adjoint())
}

/// UPA response for a `sqrt(N) x sqrt(N)` half-wavelength grid.
///
/// Entry `m * sqrt(N) + n` (with `m` the outer index) is
/// `exp(j*pi*(m*sin(az)*sin(el) + n*cos(el))) / sqrt(N)`.
pub fn upa_response(az: f64, el: f64, n_antennas: usize) -> Result<CVector> {
    let side = perfect_square_side(n_antennas).ok_or_else(|| {
        HbfError::InvalidDimension(format!("{n_antennas} antennas is not a perfect square"))
    })?;
    let amp = 1.0 / (n_antennas as f64).sqrt();
    let u = az.sin() * el.sin();
    let v = el.cos();
    Ok(CVector::from_iterator(
        n_antennas,
        (0..side).flat_map(|m| {
            (0..side).map(move |n| Complex64::from_polar(amp, PI * (m as f64 * u + n as f64 * v)))
        }),
    ))
}

fn steering_matrix(az: &[f64], el: &[f64], n: usize) -> Result<CMatrix> {
    let mut a = CMatrix::zeros(n, az.len());
    for (i, (&phi, &theta)) in az.iter().zip(el).enumerate() {
        a.set_column(i, &upa_response(phi, theta, n)?);
    }
    Ok(a)
}

/// Draws a path set (CN(0,1) gains, uniform angles) and builds the channel.
/// Deterministic for a fixed seed.
pub fn generate_channel(cfg: &SystemConfig, paths: usize, seed: u64) -> Result<ChannelRealization> {
    if paths == 0 {
        return Err(HbfError::InvalidParameter("paths must be at least 1".into()));
    }
    for (name, n) in [("n_t", cfg.n_t), ("n_r", cfg.n_r)] {
        if perfect_square_side(n).is_none() {
            return Err(HbfError::InvalidDimension(format!("{name} = {n} is not a perfect square")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gains: Vec<Complex64> = (0..paths).map(|_| complex_gaussian(&mut rng)).collect();
    let mut draw = |hi: f64, inclusive: bool| -> Vec<f64> {
        (0..paths)
            .map(|_| {
                if inclusive {
                    rng.random_range(0.0..=hi)
                } else {
                    rng.random_range(0.0..hi)
                }
            })
            .collect()
    };
    let aod_az = draw(2.0 * PI, false);
    let aod_el = draw(PI, true);
    let aoa_az = draw(2.0 * PI, false);
    let aoa_el = draw(PI, true);
    let set = PathSet::new(gains, aod_az, aod_el, aoa_az, aoa_el)?;
    ChannelRealization::from_paths(set, cfg.n_r, cfg.n_t)
}

/// Imperfect CSI: `xi * H + sqrt(1 - xi^2) * E` with `E` i.i.d. `CN(0, 1)`.
pub fn corrupt_csi(h: &CMatrix, xi: f64, seed: u64) -> Result<CMatrix> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(HbfError::InvalidParameter(format!("csi accuracy {xi} outside [0, 1]")));
    }
    if xi == 1.0 {
        return Ok(h.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = complex_gaussian_matrix(&mut rng, h.nrows(), h.ncols());
    let noise_scale = (1.0 - xi * xi).sqrt();
    Ok(h * Complex64::new(xi, 0.0) + e * Complex64::new(noise_scale, 0.0))
}

/// Transmit-side partial CSI `gamma * |Lambda| * A_t^H` (`L x n_t`): gain
/// magnitudes and departure directions only.
pub fn partial_csi_channel(paths: &PathSet, gamma: f64, n_t: usize) -> Result<CMatrix> {
    if paths.is_empty() {
        return Err(HbfError::MissingPaths);
    }
    let a_t = paths.transmit_steering(n_t)?;
    let mut out = a_t.adjoint();
    for (mut row, g) in out.row_iter_mut().zip(&paths.gains) {
        row *= Complex64::new(gamma * g.norm(), 0.0);
    }
    Ok(out)
}
