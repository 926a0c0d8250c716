//! Greedy spectral rounding of a POVM to a PVM.
//!
//! Outcomes are visited in order of decreasing `tr(m_a)`. Each takes the
//! eigenvectors with eigenvalue above one half of `m_a` compressed to the
//! still unassigned subspace. Whatever remains at the end goes to the
//! outcome with the largest expectation on it.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{self, CMat};
use crate::spectral::HermitianMatrix;
use crate::strategies::{Povm, Pvm};

/// Absolute slack on the budget comparison.
pub const BUDGET_SLACK: f64 = 1e-12;
pub const BUDGET_CONSTANT: f64 = 9.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalizationReport {
    /// `Σ_a tr(|m_a − r_a|²)`, normalized trace.
    pub distance: f64,
    /// `9 (1 − Σ_a tr(m_a²))`, normalized trace.
    pub budget: f64,
    pub within_budget: bool,
}

pub fn orthogonalize_povm(povm: &Povm) -> (Pvm, OrthogonalizationReport) {
    let d = povm.dim();
    let k = povm.len();
    let m = povm.elements();
    let tr = |x: &CMat| linalg::trace(x).re;

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| tr(&m[j]).total_cmp(&tr(&m[i])));

    let mut ranges: Vec<Vec<DVector<Complex64>>> = vec![Vec::new(); k];
    let mut free = linalg::identity(d);
    for &a in &order {
        if free.ncols() == 0 {
            break;
        }
        let compressed = HermitianMatrix::from_hermitian_part(&(free.adjoint() * &m[a] * &free));
        let eig = compressed.eigh();
        let vecs = eig.eigenvectors();
        let (take, keep): (Vec<usize>, Vec<usize>) =
            (0..free.ncols()).partition(|&j| eig.eigenvalues()[j] > 0.5);
        for &j in &take {
            ranges[a].push(&free * vecs.column(j));
        }
        free = CMat::from_fn(d, keep.len(), |i, c| (&free * vecs.column(keep[c]))[i]);
    }
    if free.ncols() > 0 {
        let residual = &free * free.adjoint();
        let best = (0..k)
            .map(|a| linalg::trace_product(&residual, &m[a]).re)
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (a, v)| if v > acc.1 { (a, v) } else { acc })
            .0;
        for c in 0..free.ncols() {
            ranges[best].push(free.column(c).into_owned());
        }
    }

    let r: Vec<CMat> = ranges
        .iter()
        .map(|vs| {
            let mut p = linalg::zeros(d);
            for v in vs {
                p += v * v.adjoint();
            }
            p
        })
        .collect();

    let norm = d as f64;
    let distance: f64 = m.iter().zip(&r).map(|(x, y)| linalg::frobenius_sq(&(x - y))).sum::<f64>() / norm;
    let purity: f64 = m.iter().map(linalg::frobenius_sq).sum::<f64>() / norm;
    let budget = BUDGET_CONSTANT * (1.0 - purity);
    let report = OrthogonalizationReport {
        distance,
        budget,
        within_budget: distance <= budget + BUDGET_SLACK,
    };
    (Pvm::new_unchecked(r), report)
}
