#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use syncround::linalg::{self, CMat};
use syncround::sampling;
use syncround::spectral::{HermitianMatrix, SpectralDecomposition};
use syncround::strategies::CommutingStrategy;

/// PSD pairs of mixed shape: full rank, low rank, shared eigenbasis, scaled
/// projections, and identical pairs.
pub fn random_pair(rng: &mut ChaCha8Rng, max_dim: usize) -> (HermitianMatrix, HermitianMatrix) {
    let d = rng.random_range(1..=max_dim);
    match rng.random_range(0..5) {
        0 => (sampling::random_psd(d, rng), sampling::random_psd(d, rng)),
        1 => {
            let r1 = rng.random_range(1..=d);
            let r2 = rng.random_range(1..=d);
            (sampling::random_psd_rank(d, r1, rng), sampling::random_psd_rank(d, r2, rng))
        }
        2 => {
            let u = sampling::random_unitary(d, rng);
            let ex: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
            let ey: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
            let conj = |e: &[f64]| HermitianMatrix::from_hermitian_part(&(&u * linalg::real_diagonal(e) * u.adjoint()));
            (conj(&ex), conj(&ey))
        }
        3 => {
            let u = sampling::random_unitary(d, rng);
            let v = sampling::random_unitary(d, rng);
            let r1 = rng.random_range(1..=d);
            let r2 = rng.random_range(1..=d);
            let proj = |w: &CMat, r: usize, c: f64| {
                let diag: Vec<f64> = (0..d).map(|i| if i < r { c } else { 0.0 }).collect();
                HermitianMatrix::from_hermitian_part(&(w * linalg::real_diagonal(&diag) * w.adjoint()))
            };
            let cx = rng.random_range(0.5..2.0);
            let cy = rng.random_range(0.5..2.0);
            (proj(&u, r1, cx), proj(&v, r2, cy))
        }
        _ => {
            let x = sampling::random_psd(d, rng);
            (x.clone(), x)
        }
    }
}

/// Midpoint rule for `∫_0^T 2t F(t) dt` after the substitution `s = t²`.
pub fn fiber_quadrature<F: FnMut(f64) -> f64>(upper: f64, points: usize, mut f: F) -> f64 {
    let s_max = upper * upper;
    let h = s_max / points as f64;
    (0..points).map(|i| f(((i as f64 + 0.5) * h).sqrt()) * h).sum()
}

/// `χ_(t,∞)` rebuilt from scratch for every threshold.
pub fn indicator(d: &SpectralDecomposition, t: f64) -> CMat {
    d.projection_above_unchecked(t)
}

pub fn chi_distance_quadrature(x: &HermitianMatrix, y: &HermitianMatrix, points: usize) -> f64 {
    let (dx, dy) = (x.eigh(), y.eigh());
    let upper = dx.max_eigenvalue().max(dy.max_eigenvalue()).max(0.0) * 1.001 + 1e-12;
    fiber_quadrature(upper, points, |t| linalg::frobenius_sq(&(indicator(&dx, t) - indicator(&dy, t))))
}

/// `τ(χ_(c_x,∞)(x̂) χ_(c_y,∞)(ŷ)) = ∫ 2t Tr(χ_(c_x t,∞)(x) χ_(c_y t,∞)(y)) dt`.
pub fn indicator_pairing_quadrature(x: &HermitianMatrix, y: &HermitianMatrix, cx: f64, cy: f64, points: usize) -> f64 {
    let (dx, dy) = (x.eigh(), y.eigh());
    let upper = (dx.max_eigenvalue() / cx).max(dy.max_eigenvalue() / cy).max(0.0) * 1.001 + 1e-12;
    fiber_quadrature(upper, points, |t| {
        linalg::trace_product(&indicator(&dx, cx * t), &indicator(&dy, cy * t)).re
    })
}

pub struct DirectMoments {
    pub norm_x_sq: f64,
    pub norm_y_sq: f64,
    pub inner: f64,
    pub total: f64,
}

pub fn direct_moments(x: &HermitianMatrix, y: &HermitianMatrix) -> DirectMoments {
    let (xm, ym) = (x.matrix(), y.matrix());
    DirectMoments {
        norm_x_sq: (xm * xm).trace().re,
        norm_y_sq: (ym * ym).trace().re,
        inner: (xm * ym).trace().re,
        total: ((xm + ym) * (xm + ym)).trace().re,
    }
}

/// The state as a vector in `C^{dA} ⊗ C^{dB}` with the Kronecker ordering.
pub fn state_vector(s: &CommutingStrategy) -> DVector<Complex64> {
    let xi = s.xi();
    let (da, db) = (xi.nrows(), xi.ncols());
    DVector::from_fn(da * db, |i, _| xi[(i / db, i % db)])
}

/// `⟨(p ⊗ q) ξ, ξ⟩` with the tensor product formed explicitly.
pub fn kron_correlation(s: &CommutingStrategy, x: usize, y: usize, a: usize, b: usize) -> f64 {
    let v = state_vector(s);
    let op: DMatrix<Complex64> = s.pvms_a()[x].elements()[a].kronecker(&s.pvms_b()[y].elements()[b]);
    (v.adjoint() * op * &v)[(0, 0)].re
}

/// Partial trace over B of `|ξ⟩⟨ξ|` by summing blocks.
pub fn partial_trace_b(s: &CommutingStrategy) -> CMat {
    let v = state_vector(s);
    let (da, db) = (s.dim_a(), s.dim_b());
    CMat::from_fn(da, da, |i, k| (0..db).map(|j| v[i * db + j] * v[k * db + j].conj()).sum())
}

/// Denman–Beavers iteration; `m` must be positive definite.
pub fn sqrt_psd(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut y = m.clone();
    let mut z = CMat::identity(n, n);
    for _ in 0..100 {
        let yi = y.clone().try_inverse();
        let zi = z.clone().try_inverse();
        match (yi, zi) {
            (Some(yi), Some(zi)) => {
                let ny = (&y + zi) * Complex64::new(0.5, 0.0);
                let nz = (&z + yi) * Complex64::new(0.5, 0.0);
                let done = (&ny - &y).norm() < 1e-15 * (1.0 + ny.norm());
                y = ny;
                z = nz;
                if done {
                    break;
                }
            }
            _ => break,
        }
    }
    y
}
