//! Small complex linear-algebra layer over `nalgebra`.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Thin SVD with singular values in descending order. `v` holds right
/// singular vectors as columns (not `V^H`).
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

pub fn thin_svd(m: &CMatrix) -> ThinSvd {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("u requested");
    let v = svd.v_t.expect("v_t requested").adjoint();
    ThinSvd {
        u,
        singular_values: svd.singular_values.iter().copied().collect(),
        v,
    }
}

/// Numerical rank relative to the largest singular value.
pub fn numerical_rank(singular_values: &[f64], rel_tol: f64) -> usize {
    let top = singular_values.first().copied().unwrap_or(0.0);
    if top <= 0.0 || !top.is_finite() {
        return 0;
    }
    singular_values.iter().filter(|&&s| s > rel_tol * top).count()
}

/// `log2 det(I + scale * A A^H)`, evaluated on the smaller Gram matrix via
/// Cholesky. `scale` must be non-negative.
pub fn log2_det_eye_plus_gram(a: &CMatrix, scale: f64) -> f64 {
    let (r, c) = a.shape();
    if r == 0 || c == 0 || scale == 0.0 {
        return 0.0;
    }
    let gram = if c <= r { a.adjoint() * a } else { a * a.adjoint() };
    let n = gram.nrows();
    let mut m = gram * Complex64::new(scale, 0.0);
    for i in 0..n {
        m[(i, i)] += ONE;
    }
    log2_det_hpd(m)
}

/// `log2 det` of a Hermitian positive-definite matrix.
pub fn log2_det_hpd(m: CMatrix) -> f64 {
    match Cholesky::new(m.clone()) {
        Some(ch) => {
            let l = ch.l_dirty();
            2.0 * (0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>() / std::f64::consts::LN_2
        }
        // Round-off can push a barely-definite matrix over the edge; fall
        // back to the eigen-free route through singular values.
        None => {
            let svd = SVD::new(m, false, false);
            svd.singular_values.iter().map(|s| s.max(f64::MIN_POSITIVE).log2()).sum()
        }
    }
}

/// Draw one circularly-symmetric `CN(0, 1)` sample.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    // Column-major fill keeps the draw order independent of nalgebra internals.
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        for r in 0..rows {
            m[(r, c)] = complex_gaussian(rng);
        }
    }
    m
}

/// Random `n x k` matrix with orthonormal columns (QR of a Gaussian draw).
pub fn random_semi_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> CMatrix {
    assert!(k <= n, "semi-unitary needs k <= n");
    let g = complex_gaussian_matrix(rng, n, k);
    let svd = thin_svd(&g);
    &svd.u * svd.v.adjoint()
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max |A^H A - I|` entrywise.
pub fn orthonormality_error(m: &CMatrix) -> f64 {
    let g = m.adjoint() * m;
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// Principal argument in `(-pi, pi]`.
pub fn arg(z: Complex64) -> f64 {
    z.im.atan2(z.re)
}

pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_det_matches_singular_value_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (r, c) in [(4, 2), (2, 5), (3, 3)] {
            let a = complex_gaussian_matrix(&mut rng, r, c);
            let scale = 2.5;
            let svd = thin_svd(&a);
            let expected: f64 = svd
                .singular_values
                .iter()
                .map(|s| (1.0 + scale * s * s).log2())
                .sum();
            let got = log2_det_eye_plus_gram(&a, scale);
            assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
        }
    }

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = complex_gaussian_matrix(&mut rng, 5, 8);
        let svd = thin_svd(&a);
        assert!(svd.singular_values.windows(2).all(|w| w[0] >= w[1]));
        let s = DMatrix::from_diagonal(&DVector::from_iterator(
            svd.singular_values.len(),
            svd.singular_values.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let rebuilt = &svd.u * s * svd.v.adjoint();
        assert!((rebuilt - a).norm() < 1e-10);
    }

    #[test]
    fn semi_unitary_has_orthonormal_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = random_semi_unitary(&mut rng, 8, 3);
        assert!(orthonormality_error(&q) < 1e-12);
    }
}
