//! Dense Hermitian spectral calculus.
//!
//! Everything downstream reduces to eigendecompositions of small Hermitian
//! matrices: threshold projections `χ_(t,∞)(H)`, fractional powers of
//! positive operators and the clustering of nearly-equal eigenvalues that
//! fixes the corner structure of a density operator.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Relative tolerance for merging eigenvalues into one cluster.
pub const MERGE_RTOL: f64 = 1e-9;
/// Negative eigenvalues down to `-PSD_CLAMP` are treated as zero.
pub const PSD_CLAMP: f64 = 1e-10;
/// Relative tolerance of the Hermitian check.
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// A square complex matrix equal to its adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMat);

impl HermitianMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        let deviation = linalg::max_entry_norm(&(&m - m.adjoint()));
        let tolerance = HERMITIAN_RTOL * (1.0 + linalg::max_entry_norm(&m));
        if deviation > tolerance {
            return Err(Error::NotHermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self(m))
    }

    /// Projects onto the Hermitian part. Use only for matrices that are
    /// Hermitian in exact arithmetic (products like `a b a`).
    pub fn from_hermitian_part(m: &CMat) -> Self {
        Self(linalg::hermitian_part(m))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(linalg::real_diagonal(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self(linalg::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_inner(self) -> CMat {
        self.0
    }

    pub fn eigh(&self) -> SpectralDecomposition {
        eigh(self)
    }
}

impl AsRef<CMat> for HermitianMatrix {
    fn as_ref(&self) -> &CMat {
        &self.0
    }
}

/// A maximal run of eigenvalues that are equal up to the merge tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Mean of the member eigenvalues.
    pub value: f64,
    /// Member positions in the ascending eigenvalue list.
    pub members: std::ops::Range<usize>,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: CMat,
    /// Ordered by strictly decreasing value.
    clusters: Vec<Cluster>,
    merge_tol: f64,
}

/// Eigendecomposition with ascending eigenvalues.
///
/// Each eigenvector is rephased so that its first largest-magnitude
/// component is real and positive, which makes the output reproducible.
pub fn eigh(h: &HermitianMatrix) -> SpectralDecomposition {
    let n = h.dim();
    let eig = SymmetricEigen::new(h.matrix().clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = CMat::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(src);
        let peak = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = v
            .iter()
            .find(|z| z.norm() >= peak * (1.0 - 1e-12))
            .copied()
            .unwrap_or(linalg::ONE);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            linalg::ONE
        };
        eigenvectors.set_column(col, &(v * phase));
    }

    let radius = eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let merge_tol = MERGE_RTOL * (1.0 + radius);

    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || eigenvalues[i] - eigenvalues[i - 1] > merge_tol {
            let members = start..i;
            let value = eigenvalues[members.clone()].iter().sum::<f64>() / members.len() as f64;
            clusters.push(Cluster { value, members });
            start = i;
        }
    }
    clusters.reverse();

    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        clusters,
        merge_tol,
    }
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Unitary whose columns are the eigenvectors, in eigenvalue order.
    pub fn eigenvectors(&self) -> &CMat {
        &self.eigenvectors
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn merge_tolerance(&self) -> f64 {
        self.merge_tol
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    /// Eigenvalues at or below this are treated as exact zeros.
    pub fn zero_threshold(&self) -> f64 {
        self.merge_tol.max(PSD_CLAMP)
    }

    /// `V f(Λ) V*`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F) -> CMat {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).scale_mut(fl);
        }
        scaled * v.adjoint()
    }

    /// Orthogonal projection onto the span of the selected eigenvectors.
    pub fn projection_onto<I: IntoIterator<Item = usize>>(&self, columns: I) -> CMat {
        let n = self.dim();
        let mut p = CMat::zeros(n, n);
        for j in columns {
            let v = self.eigenvectors.column(j);
            p += v * v.adjoint();
        }
        p
    }

    /// `χ_(t,∞)(H)` with no collision check. Intended for quadrature
    /// oracles that probe arbitrary thresholds.
    pub fn projection_above_unchecked(&self, t: f64) -> CMat {
        let columns: Vec<usize> = (0..self.dim()).filter(|&j| self.eigenvalues[j] > t).collect();
        self.projection_onto(columns)
    }

    /// `χ_(t,∞)(H)`; `t` must be farther than the merge tolerance from
    /// every eigenvalue.
    pub fn projection_above(&self, t: f64) -> Result<CMat> {
        if let Some(&eigenvalue) = self
            .eigenvalues
            .iter()
            .find(|&&l| (l - t).abs() <= self.merge_tol)
        {
            return Err(Error::ThresholdCollision {
                threshold: t,
                eigenvalue,
                tolerance: self.merge_tol,
            });
        }
        Ok(self.projection_above_unchecked(t))
    }

    pub fn count_above(&self, t: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > t).count()
    }

    pub fn reconstruct(&self) -> CMat {
        self.apply(|l| l)
    }

    /// Eigenvalues clamped at zero; errors if any is below `-PSD_CLAMP`.
    pub fn require_psd(&self) -> Result<()> {
        let min = self.min_eigenvalue();
        if min < -PSD_CLAMP {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    /// Inner products `|<v_i, w_j>|²` between the eigenvectors of two
    /// decompositions of the same dimension.
    pub fn overlaps(&self, other: &SpectralDecomposition) -> Vec<Vec<f64>> {
        let g = self.eigenvectors.adjoint() * &other.eigenvectors;
        (0..self.dim())
            .map(|i| (0..other.dim()).map(|j| g[(i, j)].norm_sqr()).collect())
            .collect()
    }
}

/// Named real functions for [`functional_calculus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFunction {
    Sqrt,
    /// Moore-Penrose inverse square root: zero eigenvalues stay zero.
    PinvSqrt,
    /// `t^α` on PSD input; for `α < 0` zero eigenvalues map to zero.
    Power(f64),
    IndicatorAbove(f64),
}

impl SpectralFunction {
    fn needs_psd(self) -> bool {
        !matches!(self, SpectralFunction::IndicatorAbove(_))
    }
}

pub fn functional_calculus(h: &HermitianMatrix, f: SpectralFunction) -> Result<HermitianMatrix> {
    apply_function(&h.eigh(), f)
}

/// [`functional_calculus`] on an existing decomposition.
pub fn apply_function(d: &SpectralDecomposition, f: SpectralFunction) -> Result<HermitianMatrix> {
    if f.needs_psd() {
        d.require_psd()?;
    }
    let zero = d.zero_threshold();
    let m = match f {
        SpectralFunction::IndicatorAbove(t) => d.projection_above(t)?,
        SpectralFunction::Sqrt => d.apply(|l| l.max(0.0).sqrt()),
        SpectralFunction::PinvSqrt => d.apply(|l| if l > zero { 1.0 / l.sqrt() } else { 0.0 }),
        SpectralFunction::Power(alpha) => d.apply(|l| {
            let l = l.max(0.0);
            if alpha < 0.0 && l <= zero {
                0.0
            } else if alpha == 0.0 {
                1.0
            } else {
                l.powf(alpha)
            }
        }),
    };
    Ok(HermitianMatrix::from_hermitian_part(&m))
}

pub fn spectral_projection_above(h: &HermitianMatrix, t: f64) -> Result<HermitianMatrix> {
    functional_calculus(h, SpectralFunction::IndicatorAbove(t))
}

/// `exp(i s H)` for Hermitian `H`.
pub fn unitary_exp(h: &HermitianMatrix, s: f64) -> CMat {
    let d = h.eigh();
    let v = d.eigenvectors();
    let mut scaled = v.clone();
    for (j, &l) in d.eigenvalues().iter().enumerate() {
        let phase = Complex64::from_polar(1.0, s * l);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    scaled * v.adjoint()
}
