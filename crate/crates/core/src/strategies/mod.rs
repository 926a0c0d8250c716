//! Commuting strategies on `C^{dA} ⊗ C^{dB}`, tracial strategies, and the
//! operations that turn a strategy into correlations and densities.
//!
//! The shared state `ξ` is stored as its `dA × dB` coefficient matrix `Ξ`,
//! so that `(p ⊗ q) ξ` corresponds to `p Ξ qᵀ` and the A-side reduced
//! density is `ρ = Ξ Ξ*`.

mod io;
mod seesaw;
mod tracial;

pub use io::{
    load_strategy, load_tracial_strategy, matrix_from_json, matrix_to_json, save_strategy,
    save_tracial_strategy, JsonMatrix,
};
pub use seesaw::{seesaw_optimize, SeesawRun};
pub use tracial::{tracial_correlation, TracialBlock, TracialStrategy};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::games::{CorrelationTable, SynchronousGame};
use crate::linalg::{self, CMat};
use crate::spectral::{self, HermitianMatrix, SpectralDecomposition, SpectralFunction};

/// Tolerance for PVM and POVM invariants.
pub const MEASUREMENT_TOL: f64 = 1e-8;
/// Tolerance on `‖ξ‖ = 1`.
pub const STATE_NORM_TOL: f64 = 1e-10;
/// Largest imaginary part tolerated in a correlation entry.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;
/// Defining-identity residual above which the standard-form dual is rejected.
pub const DUAL_RESIDUAL_TOL: f64 = 1e-6;

/// A projection-valued measure: Hermitian idempotents summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm(Vec<CMat>);

impl Pvm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let dim = check_family(&elements).map_err(Error::InvalidPvm)?;
        for (a, p) in elements.iter().enumerate() {
            let idem = linalg::frobenius(&(p * p - p));
            if idem > MEASUREMENT_TOL {
                return Err(Error::InvalidPvm(format!(
                    "element {a} is not idempotent: ‖p² − p‖ = {idem:.3e}"
                )));
            }
        }
        check_sum(&elements, dim).map_err(Error::InvalidPvm)?;
        Ok(Self(elements))
    }

    /// Skips validation; for families that are PVMs by construction.
    pub(crate) fn new_unchecked(elements: Vec<CMat>) -> Self {
        Self(elements)
    }

    pub fn trivial(dim: usize) -> Self {
        Self(vec![linalg::identity(dim)])
    }

    pub fn elements(&self) -> &[CMat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0[0].nrows()
    }

    pub fn into_elements(self) -> Vec<CMat> {
        self.0
    }
}

/// Positive operators summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm(Vec<CMat>);

impl Povm {
    pub fn new(elements: Vec<CMat>) -> Result<Self> {
        let dim = check_family(&elements).map_err(Error::InvalidPovm)?;
        for (a, m) in elements.iter().enumerate() {
            let min = HermitianMatrix::from_hermitian_part(m).eigh().min_eigenvalue();
            if min < -MEASUREMENT_TOL {
                return Err(Error::InvalidPovm(format!(
                    "element {a} has negative eigenvalue {min:.3e}"
                )));
            }
        }
        check_sum(&elements, dim).map_err(Error::InvalidPovm)?;
        Ok(Self(elements))
    }

    pub fn elements(&self) -> &[CMat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.0[0].nrows()
    }
}

impl From<Pvm> for Povm {
    fn from(p: Pvm) -> Self {
        Povm(p.0)
    }
}

fn check_family(elements: &[CMat]) -> std::result::Result<usize, String> {
    let first = elements.first().ok_or("empty family")?;
    let dim = first.nrows();
    for (a, m) in elements.iter().enumerate() {
        if m.nrows() != dim || m.ncols() != dim {
            return Err(format!("element {a} is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols()));
        }
        if let Err(e) = HermitianMatrix::new(m.clone()) {
            return Err(format!("element {a}: {e}"));
        }
    }
    Ok(dim)
}

fn check_sum(elements: &[CMat], dim: usize) -> std::result::Result<(), String> {
    let mut sum = linalg::zeros(dim);
    for m in elements {
        sum += m;
    }
    let dev = linalg::frobenius(&(sum - linalg::identity(dim)));
    if dev > MEASUREMENT_TOL {
        return Err(format!("elements sum to identity only within {dev:.3e}"));
    }
    Ok(())
}

/// Bipartite commuting strategy: Alice's PVMs act on `C^{dA}`, Bob's on `C^{dB}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingStrategy {
    pvms_a: Vec<Pvm>,
    pvms_b: Vec<Pvm>,
    xi: CMat,
}

impl CommutingStrategy {
    pub fn new(pvms_a: Vec<Pvm>, pvms_b: Vec<Pvm>, xi: CMat) -> Result<Self> {
        let (dim_a, dim_b) = (xi.nrows(), xi.ncols());
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidState("empty state".into()));
        }
        if pvms_a.is_empty() || pvms_a.len() != pvms_b.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} A-side and {} B-side question families",
                pvms_a.len(),
                pvms_b.len()
            )));
        }
        let k = pvms_a[0].len();
        for (side, pvms, dim) in [("A", &pvms_a, dim_a), ("B", &pvms_b, dim_b)] {
            for (x, p) in pvms.iter().enumerate() {
                if p.len() != k {
                    return Err(Error::DimensionMismatch(format!(
                        "{side}-side question {x} has {} outcomes, expected {k}",
                        p.len()
                    )));
                }
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch(format!(
                        "{side}-side question {x} acts on dimension {}, expected {dim}",
                        p.dim()
                    )));
                }
            }
        }
        let norm = xi.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidState(format!("‖ξ‖ = {norm}, expected 1")));
        }
        Ok(Self { pvms_a, pvms_b, xi })
    }

    /// Maximally entangled state with Bob using the entrywise conjugates
    /// of Alice's PVMs; its correlation is `Tr(p^x_a p^y_b) / d`.
    pub fn maximally_entangled(pvms: Vec<Pvm>) -> Result<Self> {
        let d = pvms.first().map_or(0, Pvm::dim);
        let xi = linalg::identity(d).map(|z| z / (d as f64).sqrt());
        let pvms_b = pvms
            .iter()
            .map(|p| Pvm::new_unchecked(p.elements().iter().map(linalg::conj).collect()))
            .collect();
        Self::new(pvms, pvms_b, xi)
    }

    pub fn dim_a(&self) -> usize {
        self.xi.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.xi.ncols()
    }

    pub fn n_questions(&self) -> usize {
        self.pvms_a.len()
    }

    pub fn n_answers(&self) -> usize {
        self.pvms_a[0].len()
    }

    pub fn pvms_a(&self) -> &[Pvm] {
        &self.pvms_a
    }

    pub fn pvms_b(&self) -> &[Pvm] {
        &self.pvms_b
    }

    pub fn xi(&self) -> &CMat {
        &self.xi
    }

    pub(crate) fn check_game(&self, game: &SynchronousGame) -> Result<()> {
        if self.n_questions() != game.n_questions() || self.n_answers() != game.n_answers() {
            return Err(Error::DimensionMismatch(format!(
                "strategy has {} questions and {} answers, game has {} and {}",
                self.n_questions(),
                self.n_answers(),
                game.n_questions(),
                game.n_answers()
            )));
        }
        Ok(())
    }

    /// `Ξ* p Ξ` for every `(x, a)`; `⟨(p ⊗ q)ξ, ξ⟩ = Σ_ij (Ξ* p Ξ)_ij q_ij`.
    fn a_side_compressions(&self) -> Vec<Vec<CMat>> {
        let xi_adj = self.xi.adjoint();
        self.pvms_a
            .iter()
            .map(|f| f.elements().iter().map(|p| &xi_adj * p * &self.xi).collect())
            .collect()
    }

    /// `h(y, b) = Ξ (q^y_b)ᵀ Ξ*`: the A-side density of `⟨(· ⊗ q^y_b) ξ, ξ⟩`.
    pub fn b_side_densities(&self) -> Vec<Vec<CMat>> {
        let xi_adj = self.xi.adjoint();
        self.pvms_b
            .iter()
            .map(|f| {
                f.elements()
                    .iter()
                    .map(|q| linalg::hermitian_part(&(&self.xi * q.transpose() * &xi_adj)))
                    .collect()
            })
            .collect()
    }
}

/// `P_{x,y}(a,b) = ⟨(p^x_a ⊗ p̃^y_b) ξ, ξ⟩`.
pub fn correlation_of_commuting(s: &CommutingStrategy) -> Result<CorrelationTable> {
    let comp = s.a_side_compressions();
    let n = s.n_questions();
    let k = s.n_answers();
    let mut table = CorrelationTable::zeros(n, k);
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    let m = &comp[x][a];
                    let q = &s.pvms_b[y].elements()[b];
                    let v: Complex64 = m.iter().zip(q.iter()).map(|(u, w)| u * w).sum();
                    if v.im.abs() > IMAG_RESIDUE_TOL {
                        return Err(Error::Numerical(format!(
                            "P[{x},{y}]({a},{b}) has imaginary part {:.3e}",
                            v.im
                        )));
                    }
                    table.set(x, y, a, b, v.re);
                }
            }
        }
    }
    table.validate()?;
    Ok(table)
}

/// Unit-trace positive matrix together with its spectrum.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    rho: HermitianMatrix,
    decomposition: SpectralDecomposition,
}

impl DensityOperator {
    pub const TRACE_TOL: f64 = 1e-10;

    pub fn new(rho: HermitianMatrix) -> Result<Self> {
        let decomposition = rho.eigh();
        decomposition.require_psd()?;
        let tr = linalg::trace(rho.matrix()).re;
        if (tr - 1.0).abs() > Self::TRACE_TOL {
            return Err(Error::InvalidState(format!("density has trace {tr}, expected 1")));
        }
        Ok(Self { rho, decomposition })
    }

    pub fn matrix(&self) -> &CMat {
        self.rho.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.rho
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn sqrt(&self) -> CMat {
        spectral::apply_function(&self.decomposition, SpectralFunction::Sqrt)
            .expect("density is PSD")
            .into_inner()
    }

    pub fn pinv_sqrt(&self) -> CMat {
        spectral::apply_function(&self.decomposition, SpectralFunction::PinvSqrt)
            .expect("density is PSD")
            .into_inner()
    }

    /// Projection onto the range.
    pub fn support(&self) -> CMat {
        let zero = self.decomposition.zero_threshold();
        let ev = self.decomposition.eigenvalues();
        self.decomposition
            .projection_onto((0..ev.len()).filter(|&j| ev[j] > zero))
    }

    pub fn min_positive_eigenvalue(&self) -> f64 {
        let zero = self.decomposition.zero_threshold();
        self.decomposition
            .eigenvalues()
            .iter()
            .copied()
            .find(|&l| l > zero)
            .unwrap_or(0.0)
    }
}

/// Partial trace of `|ξ⟩⟨ξ|` over the B side.
pub fn reduced_density(s: &CommutingStrategy) -> Result<DensityOperator> {
    let rho = HermitianMatrix::from_hermitian_part(&(s.xi() * s.xi().adjoint()));
    DensityOperator::new(rho)
}

/// A-side POVMs `p′^y_b` with `⟨p^x_a p̃^y_b ξ, ξ⟩ = Tr(p^x_a ρ^{1/2} p′^y_b ρ^{1/2})`.
///
/// `p′^y_b = ρ^{-1/2} h(y,b) ρ^{-1/2}` with the pseudo-inverse, and the
/// complement of the support of `ρ` is added to the first answer.
pub fn standard_form_dual(s: &CommutingStrategy) -> Result<Vec<Povm>> {
    let rho = reduced_density(s)?;
    let w = rho.pinv_sqrt();
    let root = rho.sqrt();
    let complement = linalg::identity(s.dim_a()) - rho.support();
    let table = correlation_of_commuting(s)?;

    let duals: Vec<Vec<CMat>> = s
        .b_side_densities()
        .into_iter()
        .map(|family| {
            family
                .iter()
                .enumerate()
                .map(|(b, h)| {
                    let mut p = linalg::hermitian_part(&(&w * h * &w));
                    if b == 0 {
                        p += &complement;
                    }
                    p
                })
                .collect()
        })
        .collect();

    let mut residual: f64 = 0.0;
    for (x, fam) in s.pvms_a().iter().enumerate() {
        for (a, p) in fam.elements().iter().enumerate() {
            let left = p * &root;
            for (y, dual) in duals.iter().enumerate() {
                for (b, q) in dual.iter().enumerate() {
                    let v = linalg::trace_product(&left, &(q * &root)).re;
                    residual = residual.max((v - table.get(x, y, a, b)).abs());
                }
            }
        }
    }
    if residual > DUAL_RESIDUAL_TOL {
        return Err(Error::Conditioning {
            residual,
            min_positive_eigenvalue: rho.min_positive_eigenvalue(),
        });
    }
    duals.into_iter().map(Povm::new).collect()
}

/// `δ = 1 − Σ_x μ(x) Σ_a P_{x,x}(a,a)`, clamped to `[0, 1]`.
pub fn synchronicity_deficit(game: &SynchronousGame, s: &CommutingStrategy) -> Result<f64> {
    s.check_game(game)?;
    let p = correlation_of_commuting(s)?;
    Ok(deficit_of_table(game, &p))
}

pub(crate) fn deficit_of_table(game: &SynchronousGame, p: &CorrelationTable) -> f64 {
    let mut agree = 0.0;
    for x in 0..game.n_questions() {
        let m = game.mu(x);
        agree += m * (0..game.n_answers()).map(|a| p.get(x, x, a, a)).sum::<f64>();
    }
    (1.0 - agree).clamp(0.0, 1.0)
}
