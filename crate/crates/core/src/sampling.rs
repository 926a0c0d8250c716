//! Seeded random instances: Hermitian and positive matrices, Haar unitaries,
//! PVMs, and the perturbation harness used by sweeps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{self, CMat};
use crate::spectral::{self, HermitianMatrix, SpectralFunction};
use crate::strategies::{CommutingStrategy, Povm, Pvm};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// GUE-like Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let g = complex_gaussian(dim, dim, rng);
    HermitianMatrix::from_hermitian_part(&g)
}

/// Hermitian matrix with operator norm one.
pub fn random_unit_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let h = random_hermitian(dim, rng);
    let r = h.eigh().spectral_radius();
    HermitianMatrix::from_hermitian_part(&h.matrix().map(|z| z / r))
}

/// Wishart-type positive matrix `G G* / dim` of the given rank.
pub fn random_psd_rank<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> HermitianMatrix {
    let g = complex_gaussian(dim, rank, rng);
    HermitianMatrix::from_hermitian_part(&((&g * g.adjoint()) / linalg::c(dim as f64)))
}

pub fn random_psd<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    random_psd_rank(dim, dim, rng)
}

/// Positive matrix with `Tr(x²) = 1`.
pub fn random_psd_unit_l2<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=dim);
    let x = random_psd_rank(dim, rank, rng);
    let n = linalg::frobenius(x.matrix());
    HermitianMatrix::from_hermitian_part(&x.matrix().map(|z| z / n))
}

/// Density matrix (unit trace) of random rank.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=dim);
    let x = random_psd_rank(dim, rank, rng);
    let t = linalg::trace(x.matrix()).re;
    HermitianMatrix::from_hermitian_part(&x.matrix().map(|z| z / t))
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let qr = complex_gaussian(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { linalg::ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Haar-distributed real orthogonal matrix, as a complex matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMat {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let (mut q, r) = g.qr().unpack();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q.map(linalg::c)
}

/// PVM built from the columns of `basis`, column `j` going to `assignment[j]`.
pub fn pvm_from_basis(basis: &CMat, assignment: &[usize], outcomes: usize) -> Pvm {
    let dim = basis.nrows();
    let mut elems = vec![linalg::zeros(dim); outcomes];
    for (j, &a) in assignment.iter().enumerate() {
        let v = basis.column(j);
        elems[a] += v * v.adjoint();
    }
    Pvm::new_unchecked(elems)
}

/// Random PVM: Haar basis with each vector assigned a uniform outcome.
pub fn random_pvm<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Pvm {
    let u = random_unitary(dim, rng);
    let assignment: Vec<usize> = (0..dim).map(|_| rng.random_range(0..outcomes)).collect();
    pvm_from_basis(&u, &assignment, outcomes)
}

pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    let g = complex_gaussian(dim, 1, rng);
    let n = g.norm();
    g.iter().map(|z| z / n).collect()
}

/// `(1 − noise) r_a + noise n_a` for a random PVM `r` and a random POVM `n`
/// with `n_a = S^{-1/2} G_a G_a* S^{-1/2}`, `S = Σ_a G_a G_a*`.
pub fn near_projective_povm<R: Rng + ?Sized>(dim: usize, outcomes: usize, noise: f64, rng: &mut R) -> Povm {
    let r = random_pvm(dim, outcomes, rng);
    let raw: Vec<CMat> = (0..outcomes)
        .map(|_| random_psd(dim, rng).into_inner())
        .collect();
    let mut total = linalg::zeros(dim);
    for a in &raw {
        total += a;
    }
    let w = spectral::functional_calculus(&HermitianMatrix::from_hermitian_part(&total), SpectralFunction::PinvSqrt)
        .expect("sum of positive matrices is positive")
        .into_inner();
    let elements = r
        .elements()
        .iter()
        .zip(&raw)
        .map(|(p, a)| linalg::hermitian_part(&(p * linalg::c(1.0 - noise) + (&w * a * &w) * linalg::c(noise))))
        .collect();
    Povm::new(elements).expect("convex combination of POVMs")
}

/// Maximally entangled strategy for a vertex coloring: question `v`
/// measures the standard basis of `C^colors` with answer `a` on
/// `e_{(a + coloring[v]) mod colors}`, and the B side uses the same
/// real projections.
pub fn coloring_strategy(coloring: &[usize], colors: usize) -> CommutingStrategy {
    let pvms = coloring
        .iter()
        .map(|&shift| {
            Pvm::new_unchecked(
                (0..colors)
                    .map(|a| {
                        let mut d = vec![0.0; colors];
                        d[(a + shift) % colors] = 1.0;
                        linalg::real_diagonal(&d)
                    })
                    .collect(),
            )
        })
        .collect();
    CommutingStrategy::maximally_entangled(pvms).expect("coordinate projections form PVMs")
}

/// Conjugates every B-side PVM element by `exp(i η K)` for a random
/// Hermitian `K` with `‖K‖ = 1`.
pub fn perturb_b_side<R: Rng + ?Sized>(s: &CommutingStrategy, eta: f64, rng: &mut R) -> CommutingStrategy {
    let k = random_unit_hermitian(s.dim_b(), rng);
    let u = spectral::unitary_exp(&k, eta);
    let conjugate = |p: &CMat| linalg::hermitian_part(&(&u * p * u.adjoint()));
    let pvms_b = s
        .pvms_b()
        .iter()
        .map(|family| Pvm::new_unchecked(family.elements().iter().map(conjugate).collect()))
        .collect();
    CommutingStrategy::new(s.pvms_a().to_vec(), pvms_b, s.xi().clone())
        .expect("unitary conjugation preserves the PVM invariants")
}
