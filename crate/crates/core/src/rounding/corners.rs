use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::strategies::DensityOperator;

/// Tolerance on `Σ_k w_k = 1`.
pub const CORNER_WEIGHT_TOL: f64 = 1e-9;

/// `P_k = χ_(t,∞)(ρ)` for `t ∈ (λ_{k+1}, λ_k)`.
#[derive(Debug, Clone)]
pub struct Corner {
    /// `λ_k`.
    pub value: f64,
    /// `λ_k − λ_{k+1}`, the length of the threshold interval.
    pub gap: f64,
    /// `(λ_k − λ_{k+1}) · rank P_k`.
    pub weight: f64,
    pub projection: CMat,
    /// Orthonormal columns spanning the range of `P_k`.
    pub basis: CMat,
}

impl Corner {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// `B* m B`: the compression of `m` to the corner in its own basis.
    pub fn compress(&self, m: &CMat) -> CMat {
        linalg::hermitian_part(&(self.basis.adjoint() * m * &self.basis))
    }
}

#[derive(Debug, Clone)]
pub struct CornerDecomposition {
    corners: Vec<Corner>,
    dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CornerSummary {
    pub value: f64,
    pub weight: f64,
    pub rank: usize,
}

impl CornerDecomposition {
    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.corners.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ_k (λ_k − λ_{k+1}) Tr(P_k z)`, which equals `Tr(ρ z)`.
    pub fn trace_against(&self, z: &CMat) -> num_complex::Complex64 {
        self.corners
            .iter()
            .map(|c| linalg::trace_product(&c.projection, z) * c.gap)
            .sum()
    }

    /// `Σ_k (λ_k − λ_{k+1}) P_k`.
    pub fn reassemble(&self) -> CMat {
        let mut m = linalg::zeros(self.dim);
        for c in &self.corners {
            m += c.projection.map(|z| z * c.gap);
        }
        m
    }

    pub fn summary(&self) -> Vec<CornerSummary> {
        self.corners
            .iter()
            .map(|c| CornerSummary {
                value: c.value,
                weight: c.weight,
                rank: c.rank(),
            })
            .collect()
    }
}

pub fn corner_decomposition(rho: &DensityOperator) -> Result<CornerDecomposition> {
    let d = rho.decomposition();
    let zero = d.zero_threshold();
    let positive: Vec<_> = d.clusters().iter().filter(|c| c.value > zero).collect();
    if positive.is_empty() {
        return Err(Error::InvalidState("density has no positive spectrum".into()));
    }
    let n = rho.dim();
    let mut corners = Vec::with_capacity(positive.len());
    let mut columns: Vec<usize> = Vec::new();
    for (k, cluster) in positive.iter().enumerate() {
        columns.extend(cluster.members.clone().rev());
        let next = positive.get(k + 1).map_or(0.0, |c| c.value);
        let gap = cluster.value - next;
        let basis = CMat::from_fn(n, columns.len(), |i, j| d.eigenvectors()[(i, columns[j])]);
        corners.push(Corner {
            value: cluster.value,
            gap,
            weight: gap * columns.len() as f64,
            projection: d.projection_onto(columns.iter().copied()),
            basis,
        });
    }
    let total: f64 = corners.iter().map(|c| c.weight).sum();
    if (total - 1.0).abs() > CORNER_WEIGHT_TOL {
        return Err(Error::Numerical(format!("corner weights sum to {total}")));
    }
    Ok(CornerDecomposition { corners, dim: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, real_diagonal};
    use crate::sampling;
    use crate::spectral::HermitianMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn density(diag: &[f64]) -> DensityOperator {
        DensityOperator::new(HermitianMatrix::from_real_diagonal(diag)).unwrap()
    }

    #[test]
    fn maximally_mixed_has_one_corner() {
        let c = corner_decomposition(&density(&[0.25; 4])).unwrap();
        assert_eq!(c.len(), 1);
        assert!((c.corners()[0].weight - 1.0).abs() < 1e-15);
        assert!(frobenius(&(&c.corners()[0].projection - linalg::identity(4))) < 1e-14);
    }

    #[test]
    fn two_level_density() {
        let c = corner_decomposition(&density(&[0.7, 0.3])).unwrap();
        assert_eq!(c.len(), 2);
        let (c1, c2) = (&c.corners()[0], &c.corners()[1]);
        assert!((c1.weight - 0.4).abs() < 1e-14 && (c2.weight - 0.6).abs() < 1e-14);
        assert!(frobenius(&(&c1.projection - real_diagonal(&[1.0, 0.0]))) < 1e-14);
        assert!(frobenius(&(&c2.projection - linalg::identity(2))) < 1e-14);
    }

    #[test]
    fn zero_eigenvalues_are_excluded() {
        let c = corner_decomposition(&density(&[0.5, 0.5, 0.0])).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.corners()[0].rank(), 2);
        assert!((c.corners()[0].weight - 1.0).abs() < 1e-15);
        assert!(frobenius(&(&c.corners()[0].projection - real_diagonal(&[1.0, 1.0, 0.0]))) < 1e-14);
    }

    #[test]
    fn corners_are_nested_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for dim in 1..=7 {
            let rho = DensityOperator::new(sampling::random_density(dim, &mut rng)).unwrap();
            let c = corner_decomposition(&rho).unwrap();
            let total: f64 = c.corners().iter().map(|k| k.weight).sum();
            assert!((total - 1.0).abs() < 1e-9);
            for k in c.corners() {
                assert!(frobenius(&(&k.projection * &k.projection - &k.projection)) < 1e-9);
                let b = &k.basis;
                assert!(frobenius(&(b.adjoint() * b - linalg::identity(k.rank()))) < 1e-9);
            }
            for w in c.corners().windows(2) {
                // P_k ≼ P_{k+1} ⇔ P_{k+1} P_k = P_k
                assert!(frobenius(&(&w[1].projection * &w[0].projection - &w[0].projection)) < 1e-9);
            }
            assert!(frobenius(&(c.reassemble() - rho.matrix())) < 1e-9);
        }
    }
}
