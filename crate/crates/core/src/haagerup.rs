//! Haagerup `L_p` in the semifinite matrix model over `(M_d, Tr)`.
//!
//! For a semifinite algebra the core is `L_∞(R) ⊗ M_d` with trace
//! `∫ Tr(·) e^{-u} du`, and `x ∈ L_p(M)⁺` is the field `u ↦ e^{u/p} x`.
//! Substituting `t = e^{-u/p}` turns `χ_(1,∞)` of that field into the
//! fiber projection `χ_(t,∞)(x)` and the weight into `d(t^p)`, so every
//! core trace becomes `∫_0^∞ p t^{p-1} Tr(F(t)) dt`. The fiber integrands
//! here are piecewise constant between eigenvalues, and are integrated
//! exactly as `Σ (t_{i+1}^p − t_i^p) F(probe_i)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::spectral::{HermitianMatrix, SpectralDecomposition};
use crate::strategies::Pvm;

/// Slack used by every certificate comparison.
pub const CERTIFICATE_SLACK: f64 = 1e-9;
/// Eigenprojection pairs with overlap `Tr(P_i Q_j)` at or below this are dropped.
pub const OVERLAP_CUTOFF: f64 = 1e-12;
/// Atoms closer than this in `λ` are merged.
pub const ATOM_MERGE_TOL: f64 = 1e-12;
/// Required `| ‖x‖_2 − 1 |` for the commutator certificate.
pub const UNIT_NORM_TOL: f64 = 1e-8;

/// The fiber model for exponent `p`: the measure `d(t^p)` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemifiniteCoreModel {
    pub p: f64,
}

/// An open interval of thresholds on which all relevant projections are
/// constant, with a probe point safely away from every eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdInterval {
    pub lo: f64,
    pub hi: f64,
    pub probe: f64,
}

impl SemifiniteCoreModel {
    pub fn new(p: f64) -> Self {
        Self { p }
    }

    /// Core measure of the fiber interval `(lo, hi)`.
    pub fn interval_weight(&self, lo: f64, hi: f64) -> f64 {
        hi.powf(self.p) - lo.powf(self.p)
    }

    /// `∫ p t^{p-1} F(t) dt` for `F` constant on each interval.
    pub fn integrate<F>(&self, intervals: &[ThresholdInterval], mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut total = 0.0;
        for iv in intervals {
            total += self.interval_weight(iv.lo, iv.hi) * f(iv.probe)?;
        }
        Ok(total)
    }
}

/// Splits `(0, max)` at the positive eigenvalues of the given
/// decompositions. Eigenvalues within the merge tolerance of each other
/// share one breakpoint; eigenvalues within tolerance of zero open no
/// interval.
pub fn threshold_intervals(decomps: &[&SpectralDecomposition]) -> Vec<ThresholdInterval> {
    let tol = decomps
        .iter()
        .map(|d| d.merge_tolerance())
        .fold(0.0, f64::max);
    let mut values: Vec<f64> = decomps
        .iter()
        .flat_map(|d| d.eigenvalues().iter().copied())
        .filter(|&l| l > 3.0 * tol)
        .collect();
    values.sort_by(f64::total_cmp);

    // groups of breakpoints: (min, max, representative)
    let mut groups: Vec<(f64, f64, f64)> = Vec::new();
    for v in values {
        match groups.last_mut() {
            Some(g) if v - g.1 <= 3.0 * tol => g.1 = v,
            _ => groups.push((v, v, v)),
        }
    }
    for g in &mut groups {
        g.2 = 0.5 * (g.0 + g.1);
    }

    let mut intervals = Vec::with_capacity(groups.len());
    let mut lo = 0.0;
    let mut lo_edge = 0.0;
    for g in groups {
        intervals.push(ThresholdInterval {
            lo,
            hi: g.2,
            probe: 0.5 * (lo_edge + g.0),
        });
        lo = g.2;
        lo_edge = g.1;
    }
    intervals
}

fn psd_decomposition(x: &HermitianMatrix) -> Result<SpectralDecomposition> {
    let d = x.eigh();
    d.require_psd()?;
    Ok(d)
}

fn same_dim(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", x.dim(), y.dim())));
    }
    Ok(())
}

/// Finite atomic measure on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointSpectralMeasure {
    /// `(λ, mass)` sorted by `λ`.
    pub atoms: Vec<(f64, f64)>,
}

impl JointSpectralMeasure {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.atoms.iter().map(|&(l, m)| m * f(l)).sum()
    }

    /// `∫∫ f(λ/√r) g((1−λ)/√r) dr dμ(λ)` for `f = χ_(c_x,∞)`, `g = χ_(c_y,∞)`:
    /// the `r`-integral of an atom is `min(λ²/c_x², (1−λ)²/c_y²)`.
    pub fn indicator_pairing(&self, c_x: f64, c_y: f64) -> f64 {
        self.integrate(|l| ((l / c_x).powi(2)).min(((1.0 - l) / c_y).powi(2)))
    }
}

/// The measure `μ_{x,y}` of a positive pair:
/// atoms `λ = a/(a+b)` with mass `Tr(P_a Q_b)(a+b)²` over eigenvalue
/// pairs of `x` and `y`, excluding the pair `(0, 0)`.
pub fn joint_spectral_measure(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<JointSpectralMeasure> {
    same_dim(x, y)?;
    let dx = psd_decomposition(x)?;
    let dy = psd_decomposition(y)?;
    let overlaps = dx.overlaps(&dy);
    let clamp = |d: &SpectralDecomposition, v: f64| if v <= d.zero_threshold() { 0.0 } else { v };

    let mut atoms: Vec<(f64, f64)> = Vec::new();
    for cx in dx.clusters() {
        let a = clamp(&dx, cx.value);
        for cy in dy.clusters() {
            let b = clamp(&dy, cy.value);
            if a + b <= 0.0 {
                continue;
            }
            let overlap: f64 = cx
                .members
                .clone()
                .flat_map(|i| cy.members.clone().map(move |j| (i, j)))
                .map(|(i, j)| overlaps[i][j])
                .sum();
            if overlap <= OVERLAP_CUTOFF {
                continue;
            }
            atoms.push((a / (a + b), overlap * (a + b).powi(2)));
        }
    }
    atoms.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
    for (l, m) in atoms {
        match merged.last_mut() {
            Some(last) if l - last.0 <= ATOM_MERGE_TOL => {
                let total = last.1 + m;
                last.0 = (last.0 * last.1 + l * m) / total;
                last.1 = total;
            }
            _ => merged.push((l, m)),
        }
    }
    Ok(JointSpectralMeasure { atoms: merged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureMoments {
    /// `∫ λ² dμ = ‖x‖²`.
    pub norm_x_sq: f64,
    /// `∫ (1−λ)² dμ = ‖y‖²`.
    pub norm_y_sq: f64,
    /// `∫ |2λ − 1| dμ = ‖χ(x) − χ(y)‖²_{L2(τ)}`.
    pub chi_distance: f64,
    /// `∫ λ(1−λ) dμ = ⟨x, y⟩`.
    pub inner_product: f64,
    /// `∫ 1 dμ = ‖x + y‖²`.
    pub total_mass: f64,
}

pub fn measure_moments(m: &JointSpectralMeasure) -> MeasureMoments {
    MeasureMoments {
        norm_x_sq: m.integrate(|l| l * l),
        norm_y_sq: m.integrate(|l| (1.0 - l) * (1.0 - l)),
        chi_distance: m.integrate(|l| (2.0 * l - 1.0).abs()),
        inner_product: m.integrate(|l| l * (1.0 - l)),
        total_mass: m.total_mass(),
    }
}

/// `‖χ_(1,∞)(x̂) − χ_(1,∞)(ŷ)‖²_{L2(τ)} = ∫ 2t ‖χ_(t,∞)(x) − χ_(t,∞)(y)‖²_F dt`,
/// evaluated exactly between breakpoints.
pub fn threshold_chi_distance(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    same_dim(x, y)?;
    let dx = psd_decomposition(x)?;
    let dy = psd_decomposition(y)?;
    let model = SemifiniteCoreModel::new(2.0);
    let intervals = threshold_intervals(&[&dx, &dy]);
    model.integrate(&intervals, |t| {
        let p = dx.projection_above(t)?;
        let q = dy.projection_above(t)?;
        Ok(linalg::frobenius_sq(&(p - q)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnesCertificate {
    /// `‖x − y‖²`.
    pub lhs: f64,
    /// `‖χ(x) − χ(y)‖²_{L2(τ)}`.
    pub mid: f64,
    /// `‖x − y‖ ‖x + y‖`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn connes_certificate(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<ConnesCertificate> {
    let mid = threshold_chi_distance(x, y)?;
    let diff = linalg::frobenius_sq(&(x.matrix() - y.matrix()));
    let sum = linalg::frobenius_sq(&(x.matrix() + y.matrix()));
    let lhs = diff;
    let rhs = diff.sqrt() * sum.sqrt();
    Ok(ConnesCertificate {
        lhs,
        mid,
        rhs,
        holds: lhs <= mid + CERTIFICATE_SLACK && mid <= rhs + CERTIFICATE_SLACK,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorCertificate {
    /// `Σ_k ‖[p_k, x]‖²`.
    pub sum_comm_x: f64,
    /// `Σ_k ‖[p_k, q]‖²_{L2(τ)}` with `q = χ_(1,∞)(x̂)`.
    pub sum_comm_q: f64,
    /// `2 ‖x‖ (Σ_k ‖[p_k, x]‖²)^{1/2}`.
    pub upper: f64,
    pub holds: bool,
}

pub fn commutator_certificate(x: &HermitianMatrix, pvm: &[CMat]) -> Result<CommutatorCertificate> {
    let pvm = Pvm::new(pvm.to_vec())?;
    if pvm.dim() != x.dim() {
        return Err(Error::DimensionMismatch(format!(
            "PVM acts on dimension {}, x on {}",
            pvm.dim(),
            x.dim()
        )));
    }
    let norm = linalg::frobenius(x.matrix());
    if (norm - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::InvalidState(format!("‖x‖_2 = {norm}, expected 1")));
    }
    let dx = psd_decomposition(x)?;
    let sum_comm_x: f64 = pvm
        .elements()
        .iter()
        .map(|p| linalg::frobenius_sq(&linalg::commutator(p, x.matrix())))
        .sum();
    let model = SemifiniteCoreModel::new(2.0);
    let sum_comm_q = model.integrate(&threshold_intervals(&[&dx]), |t| {
        let q = dx.projection_above(t)?;
        Ok(pvm
            .elements()
            .iter()
            .map(|p| linalg::frobenius_sq(&linalg::commutator(p, &q)))
            .sum())
    })?;
    let upper = 2.0 * norm * sum_comm_x.sqrt();
    Ok(CommutatorCertificate {
        sum_comm_x,
        sum_comm_q,
        upper,
        holds: sum_comm_x <= sum_comm_q + CERTIFICATE_SLACK && sum_comm_q <= upper + CERTIFICATE_SLACK,
    })
}

/// `|Tr(xy) − ∫ p t^{p-1} Tr(x^{1-p} χ_(t,∞)(x) y) dt|` for PSD `x, y`, `p > 1`.
pub fn lp_duality_check(x: &HermitianMatrix, y: &HermitianMatrix, p: f64) -> Result<f64> {
    same_dim(x, y)?;
    if !(p > 1.0) {
        return Err(Error::Unsupported(format!("exponent p = {p}; need p > 1")));
    }
    let dx = psd_decomposition(x)?;
    psd_decomposition(y)?;
    let direct = linalg::trace_product(x.matrix(), y.matrix()).re;
    let zero = dx.zero_threshold();
    let model = SemifiniteCoreModel::new(p);
    let core = model.integrate(&threshold_intervals(&[&dx]), |t| {
        dx.projection_above(t)?;
        // x^{1-p} χ_(t,∞)(x) as one spectral function
        let weighted = dx.apply(|l| if l > t && l > zero { l.powf(1.0 - p) } else { 0.0 });
        Ok(linalg::trace_product(&weighted, y.matrix()).re)
    })?;
    Ok((direct - core).abs())
}
