//! From an almost-synchronous commuting strategy to a tracial strategy.
//!
//! With `ρ` the A-side reduced density and `δ` the synchronicity deficit,
//! the pipeline compares four correlation tables:
//!
//! 1. the original `⟨(p^x_a ⊗ p̃^y_b) ξ, ξ⟩`;
//! 2. the symmetrized `Tr(p^x_a ρ^{1/2} p^y_b ρ^{1/2})`;
//! 3. the corner table `Σ_k (λ_k − λ_{k+1}) Tr(P_k p^x_a P_k p^y_b P_k)`;
//! 4. the tracial table with each corner POVM `(P_k p^x_a P_k)_a` replaced
//!    by a PVM.
//!
//! Bounds, with `ν`-weighted `L1` distances:
//!
//! - symmetrization costs `3 δ^{1/4}` and the passage to corners costs
//!   `4 (4δ)^{1/4}`, so `d(1, 3) ≤ (3 + 4√2) δ^{1/4} ≤ 9 δ^{1/4}`;
//! - the corner and orthogonalization steps together cost `38 (4δ)^{1/4}`,
//!   so `d(1, 4) ≤ (3 + 38√2) δ^{1/4} ≤ 57 δ^{1/4}`;
//! - `α δ ≤ ε = 1 − value_in`, so when `ε ≤ α` the output value is at least
//!   `1 − ε − 57 (ε/α)^{1/4} ≥ 1 − 58 (ε/α)^{1/4}`; otherwise the bound is
//!   vacuous.

mod corners;
mod orthogonalize;

pub use corners::{corner_decomposition, Corner, CornerDecomposition, CornerSummary, CORNER_WEIGHT_TOL};
pub use orthogonalize::{orthogonalize_povm, OrthogonalizationReport, BUDGET_CONSTANT, BUDGET_SLACK};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::games::{self, CorrelationTable, SynchronousGame};
use crate::linalg::{self, CMat};
use crate::spectral::{self, SpectralFunction};
use crate::strategies::{
    self, correlation_of_commuting, reduced_density, tracial_correlation, CommutingStrategy, DensityOperator,
    Povm, Pvm, TracialBlock, TracialStrategy,
};

pub const FIRST_CONSTANT: f64 = 9.0;
pub const TOTAL_CONSTANT: f64 = 57.0;
pub const GAME_CONSTANT: f64 = 58.0;
/// Additive slack on the three bounds.
pub const BOUND_SLACK: f64 = 1e-6;
/// Additive slack on the dual-distance budgets.
pub const DUAL_SLACK: f64 = 1e-8;

fn check_pvms(pvms: &[Pvm], dim: usize) -> Result<(usize, usize)> {
    let n = pvms.len();
    let k = pvms.first().map_or(0, Pvm::len);
    if n == 0 || k == 0 {
        return Err(Error::DimensionMismatch("no questions or answers".into()));
    }
    if pvms.iter().any(|p| p.len() != k || p.dim() != dim) {
        return Err(Error::DimensionMismatch(format!(
            "every PVM must have {k} outcomes on dimension {dim}"
        )));
    }
    Ok((n, k))
}

/// `T(x,y,a,b) = Tr(p^x_a ρ^{1/2} p^y_b ρ^{1/2})`.
pub fn symmetrized_correlation(pvms: &[Pvm], rho: &DensityOperator) -> Result<CorrelationTable> {
    let (n, k) = check_pvms(pvms, rho.dim())?;
    let root = rho.sqrt();
    let sandwiched: Vec<Vec<CMat>> = pvms
        .iter()
        .map(|f| f.elements().iter().map(|p| &root * p * &root).collect())
        .collect();
    CorrelationTable::from_fn(n, k, |x, y, a, b| {
        linalg::trace_product(&pvms[x].elements()[a], &sandwiched[y][b]).re
    })
}

/// Corner compressions `B_k* p^x_a B_k`, indexed `[corner][question][answer]`.
fn compressions(pvms: &[Pvm], decomp: &CornerDecomposition) -> Vec<Vec<Vec<CMat>>> {
    decomp
        .corners()
        .iter()
        .map(|c| {
            pvms.iter()
                .map(|f| f.elements().iter().map(|p| c.compress(p)).collect())
                .collect()
        })
        .collect()
}

fn weighted_table(gaps: &[f64], ops: &[Vec<Vec<CMat>>], n: usize, k: usize) -> Result<CorrelationTable> {
    CorrelationTable::from_fn(n, k, |x, y, a, b| {
        gaps.iter()
            .zip(ops)
            .map(|(g, m)| g * linalg::trace_product(&m[x][a], &m[y][b]).re)
            .sum()
    })
}

/// `Σ_k (λ_k − λ_{k+1}) Tr(P_k p^x_a P_k p^y_b P_k)`.
pub fn corner_correlation(pvms: &[Pvm], decomp: &CornerDecomposition) -> Result<CorrelationTable> {
    let (n, k) = check_pvms(pvms, decomp.dim())?;
    let gaps: Vec<f64> = decomp.corners().iter().map(|c| c.gap).collect();
    weighted_table(&gaps, &compressions(pvms, decomp), n, k)
}

#[derive(Debug, Clone, Serialize)]
pub struct CornerReport {
    pub value: f64,
    pub weight: f64,
    pub rank: usize,
    /// One report per question.
    pub orthogonalization: Vec<OrthogonalizationReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualDistanceReport {
    pub delta: f64,
    /// `Σ_x μ(x) Σ_a ‖[p^x_a, ρ^{1/2}]‖²`.
    pub commutator_lhs: f64,
    /// `4 δ`.
    pub commutator_budget: f64,
    pub commutator_holds: bool,
    /// `Σ_x μ(x) Σ_a ‖ρ^{1/2} (p^x_a − (p′^x_a)^{1/2})‖²`.
    pub pandp_lhs: f64,
    /// `6 √δ`.
    pub pandp_budget: f64,
    pub pandp_holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoundingCertificate {
    pub delta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub value_in: f64,
    pub value_out: f64,
    /// original ↔ symmetrized.
    pub d1_sym: f64,
    /// symmetrized ↔ corner.
    pub d1_corner: f64,
    /// corner ↔ tracial.
    pub d1_pvm: f64,
    /// original ↔ corner.
    pub d1_first: f64,
    /// original ↔ tracial.
    pub d1_total: f64,
    pub bound_first: f64,
    pub bound_total: f64,
    pub bound_game: f64,
    pub holds_first: bool,
    pub holds_total: bool,
    pub holds_game: bool,
    /// `|value_in − value_out| ≤ d1_sym + d1_corner + d1_pvm`.
    pub holds_triangle: bool,
    /// `max |Σ_k (λ_k − λ_{k+1}) P_k − ρ|`, i.e. `τ(q·z) = Tr(ρ z)` on matrix units.
    pub corner_trace_residual: f64,
    /// Corner table with PVMs versus the assembled strategy's own correlation.
    pub tracial_residual: f64,
    pub budget_violations: usize,
    pub corners: Vec<CornerReport>,
    pub dual: Option<DualDistanceReport>,
    pub dual_error: Option<String>,
}

impl RoundingCertificate {
    /// The three bound flags.
    pub fn holds(&self) -> bool {
        self.holds_first && self.holds_total && self.holds_game
    }
}

#[derive(Debug, Clone)]
pub struct Rounding {
    pub tracial: TracialStrategy,
    pub certificate: RoundingCertificate,
    pub original: CorrelationTable,
    pub symmetrized: CorrelationTable,
    pub corner: CorrelationTable,
    pub output: CorrelationTable,
}

pub fn round_strategy(game: &SynchronousGame, s: &CommutingStrategy) -> Result<Rounding> {
    let alpha = games::alpha_of(game);
    if !(alpha > 0.0) {
        return Err(Error::Unsupported(
            "game has no diagonal question mass (alpha = 0); the value bound is vacuous".into(),
        ));
    }
    let delta = strategies::synchronicity_deficit(game, s)?;
    let rho = reduced_density(s)?;
    let original = correlation_of_commuting(s)?;
    let symmetrized = symmetrized_correlation(s.pvms_a(), &rho)?;
    let decomp = corner_decomposition(&rho)?;
    let (n, k) = (s.n_questions(), s.n_answers());
    let comp = compressions(s.pvms_a(), &decomp);
    let gaps: Vec<f64> = decomp.corners().iter().map(|c| c.gap).collect();
    let corner = weighted_table(&gaps, &comp, n, k)?;

    let mut blocks = Vec::with_capacity(decomp.len());
    let mut reports = Vec::with_capacity(decomp.len());
    let mut rounded: Vec<Vec<Vec<CMat>>> = Vec::with_capacity(decomp.len());
    for (c, m) in decomp.corners().iter().zip(&comp) {
        let mut pvms = Vec::with_capacity(n);
        let mut orth = Vec::with_capacity(n);
        for family in m {
            let povm = Povm::new(family.clone())?;
            let (r, rep) = orthogonalize_povm(&povm);
            pvms.push(r);
            orth.push(rep);
        }
        rounded.push(pvms.iter().map(|p| p.elements().to_vec()).collect());
        blocks.push(TracialBlock {
            weight: c.weight,
            pvms,
        });
        reports.push(CornerReport {
            value: c.value,
            weight: c.weight,
            rank: c.rank(),
            orthogonalization: orth,
        });
    }
    let pvm_table = weighted_table(&gaps, &rounded, n, k)?;
    let tracial = TracialStrategy::new(blocks)?;
    let output = tracial_correlation(&tracial);

    let value_in = games::game_value(game, &original)?;
    let value_out = games::game_value(game, &output)?;
    let d1_sym = original.l1_distance(&symmetrized, game)?;
    let d1_corner = symmetrized.l1_distance(&corner, game)?;
    let d1_pvm = corner.l1_distance(&output, game)?;
    let d1_first = original.l1_distance(&corner, game)?;
    let d1_total = original.l1_distance(&output, game)?;
    let epsilon = (1.0 - value_in).max(0.0);
    let root = delta.powf(0.25);
    let bound_first = FIRST_CONSTANT * root;
    let bound_total = TOTAL_CONSTANT * root;
    let bound_game = GAME_CONSTANT * (epsilon / alpha).powf(0.25);

    let (dual, dual_error) = match verify_dual_distance(game, s) {
        Ok(r) => (Some(r), None),
        Err(e @ Error::Conditioning { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let budget_violations = reports
        .iter()
        .flat_map(|r| &r.orthogonalization)
        .filter(|o| !o.within_budget)
        .count();

    let certificate = RoundingCertificate {
        delta,
        epsilon,
        alpha,
        value_in,
        value_out,
        d1_sym,
        d1_corner,
        d1_pvm,
        d1_first,
        d1_total,
        bound_first,
        bound_total,
        bound_game,
        holds_first: d1_first <= bound_first + BOUND_SLACK,
        holds_total: d1_total <= bound_total + BOUND_SLACK,
        holds_game: value_out >= 1.0 - bound_game - BOUND_SLACK,
        holds_triangle: (value_in - value_out).abs() <= d1_sym + d1_corner + d1_pvm + 1e-8,
        corner_trace_residual: linalg::max_entry_norm(&(decomp.reassemble() - rho.matrix())),
        tracial_residual: pvm_table.max_abs_difference(&output),
        budget_violations,
        corners: reports,
        dual,
        dual_error,
    };
    Ok(Rounding {
        tracial,
        certificate,
        original,
        symmetrized,
        corner,
        output,
    })
}

/// Evaluates both intermediate inequalities directly from the
/// standard-form dual POVMs.
pub fn verify_dual_distance(game: &SynchronousGame, s: &CommutingStrategy) -> Result<DualDistanceReport> {
    let delta = strategies::synchronicity_deficit(game, s)?;
    let rho = reduced_density(s)?;
    let duals = strategies::standard_form_dual(s)?;
    let root = rho.sqrt();
    let mut commutator_lhs = 0.0;
    let mut pandp_lhs = 0.0;
    for (x, (family, dual)) in s.pvms_a().iter().zip(&duals).enumerate() {
        let mu = game.mu(x);
        if mu == 0.0 {
            continue;
        }
        for (p, q) in family.elements().iter().zip(dual.elements()) {
            commutator_lhs += mu * linalg::frobenius_sq(&linalg::commutator(p, &root));
            let half = spectral::functional_calculus(&spectral::HermitianMatrix::from_hermitian_part(q), SpectralFunction::Sqrt)?
                .into_inner();
            pandp_lhs += mu * linalg::frobenius_sq(&(&root * (p - half)));
        }
    }
    let commutator_budget = 4.0 * delta;
    let pandp_budget = 6.0 * delta.sqrt();
    Ok(DualDistanceReport {
        delta,
        commutator_lhs,
        commutator_budget,
        commutator_holds: commutator_lhs <= commutator_budget + DUAL_SLACK,
        pandp_lhs,
        pandp_budget,
        pandp_holds: pandp_lhs <= pandp_budget + DUAL_SLACK,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, real_diagonal};
    use crate::sampling;
    use crate::spectral::HermitianMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn k2() -> SynchronousGame {
        games::graph_coloring_game(2, &[(0, 1)], 3, 0.5).unwrap()
    }

    fn diagonal_pvm(assign: &[usize], k: usize) -> Pvm {
        Pvm::new(
            (0..k)
                .map(|a| real_diagonal(&assign.iter().map(|&b| (a == b) as u8 as f64).collect::<Vec<_>>()))
                .collect(),
        )
        .unwrap()
    }

    fn density(diag: &[f64]) -> DensityOperator {
        DensityOperator::new(HermitianMatrix::from_real_diagonal(diag)).unwrap()
    }

    #[test]
    fn symmetrized_is_tracial_for_maximally_mixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pvms: Vec<Pvm> = (0..3).map(|_| sampling::random_pvm(4, 2, &mut rng)).collect();
        let t = symmetrized_correlation(&pvms, &density(&[0.25; 4])).unwrap();
        let c = corner_correlation(&pvms, &corner_decomposition(&density(&[0.25; 4])).unwrap()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        let want = linalg::trace_product(&pvms[x].elements()[a], &pvms[y].elements()[b]).re / 4.0;
                        assert!((t.get(x, y, a, b) - want).abs() < 1e-12);
                        assert!((c.get(x, y, a, b) - want).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_instance_is_classical() {
        let rho = [0.5, 0.3, 0.2];
        let pvms = vec![diagonal_pvm(&[0, 1, 1], 2), diagonal_pvm(&[1, 1, 0], 2)];
        let t = symmetrized_correlation(&pvms, &density(&rho)).unwrap();
        let c = corner_correlation(&pvms, &corner_decomposition(&density(&rho)).unwrap()).unwrap();
        let assign = [[0, 1, 1], [1, 1, 0]];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        let want: f64 = (0..3)
                            .filter(|&i| assign[x][i] == a && assign[y][i] == b)
                            .map(|i| rho[i])
                            .sum();
                        assert!((t.get(x, y, a, b) - want).abs() < 1e-14);
                        assert!((c.get(x, y, a, b) - want).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn symmetrized_diagonal_is_dominated_by_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityOperator::new(sampling::random_density(4, &mut rng)).unwrap();
        let pvms = vec![sampling::random_pvm(4, 3, &mut rng)];
        let t = symmetrized_correlation(&pvms, &rho).unwrap();
        for a in 0..3 {
            let marginal = linalg::trace_product(&pvms[0].elements()[a], rho.matrix()).re;
            assert!(t.get(0, 0, a, a) <= marginal + 1e-12);
        }
        assert!(t.symmetry_defect() < 1e-12);
        // commuting instance: equality
        let spectral_pvm = Pvm::new(vec![
            rho.decomposition().projection_onto([0, 1]),
            rho.decomposition().projection_onto([2, 3]),
        ])
        .unwrap();
        let t = symmetrized_correlation(std::slice::from_ref(&spectral_pvm), &rho).unwrap();
        for a in 0..2 {
            let marginal = linalg::trace_product(&spectral_pvm.elements()[a], rho.matrix()).re;
            assert!((t.get(0, 0, a, a) - marginal).abs() < 1e-12);
        }
    }

    #[test]
    fn corner_table_matches_threshold_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = DensityOperator::new(sampling::random_density(3, &mut rng)).unwrap();
        let pvms = vec![sampling::random_pvm(3, 2, &mut rng), sampling::random_pvm(3, 2, &mut rng)];
        let table = corner_correlation(&pvms, &corner_decomposition(&rho).unwrap()).unwrap();
        let d = rho.decomposition();
        let top = d.max_eigenvalue();
        let n = 20_000;
        let h = top / n as f64;
        let (p, q) = (&pvms[0].elements()[0], &pvms[1].elements()[1]);
        let quad: f64 = (0..n)
            .map(|i| {
                let qt = d.projection_above_unchecked((i as f64 + 0.5) * h);
                linalg::trace(&(&qt * p * &qt * q * &qt)).re * h
            })
            .sum();
        assert!((quad - table.get(0, 1, 0, 1)).abs() < 3.0 * 3.0 * h, "{quad} vs {}", table.get(0, 1, 0, 1));
    }

    #[test]
    fn corner_trace_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for dim in 1..=6 {
            let rho = DensityOperator::new(sampling::random_density(dim, &mut rng)).unwrap();
            let decomp = corner_decomposition(&rho).unwrap();
            for _ in 0..20 {
                let z = sampling::complex_gaussian(dim, dim, &mut rng);
                let lhs = decomp.trace_against(&z);
                let rhs = linalg::trace_product(rho.matrix(), &z);
                assert!((lhs - rhs).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn exact_synchronous_strategy_is_a_fixed_point() {
        let g = k2();
        let s = sampling::coloring_strategy(&[0, 1], 3);
        let r = round_strategy(&g, &s).unwrap();
        let c = &r.certificate;
        assert!(c.delta <= 1e-10);
        assert!((c.value_in - 1.0).abs() < 1e-12 && (c.value_out - 1.0).abs() < 1e-8);
        assert!(r.original.max_abs_difference(&r.output) < 1e-8);
        assert!(c.d1_sym <= 1e-8 && c.d1_corner <= 1e-8 && c.d1_pvm <= 1e-8);
        assert!(c.holds() && c.holds_triangle);
        let dual = c.dual.unwrap();
        assert!(dual.commutator_lhs <= 1e-8 && dual.pandp_lhs <= 1e-8);
    }

    #[test]
    fn single_answer_game() {
        let g = games::diagonal_game(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = sampling::complex_gaussian(3, 2, &mut rng);
        let norm = xi.norm();
        let s = CommutingStrategy::new(vec![Pvm::trivial(3); 2], vec![Pvm::trivial(2); 2], xi.map(|z| z / norm)).unwrap();
        let r = round_strategy(&g, &s).unwrap();
        assert!((r.certificate.value_in - 1.0).abs() < 1e-12);
        assert!((r.certificate.value_out - r.certificate.value_in).abs() < 1e-12);
        for b in r.tracial.blocks() {
            for p in &b.pvms {
                assert!(frobenius(&(&p.elements()[0] - linalg::identity(b.dim()))) < 1e-12);
            }
        }
    }

    #[test]
    fn alpha_zero_is_unsupported() {
        let g = games::load_game(
            r#"{"questions": ["u", "v"], "answers": ["r", "g", "b"],
                "nu": [{"x": "u", "y": "v", "w": "1/2"}],
                "predicate": {"default": 1}}"#,
        )
        .unwrap();
        let s = sampling::coloring_strategy(&[0, 1], 3);
        assert!(matches!(round_strategy(&g, &s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn perturbed_strategies_satisfy_every_bound() {
        let g = k2();
        let base = sampling::coloring_strategy(&[0, 1], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for &eta in &[0.02, 0.05, 0.1] {
            let s = sampling::perturb_b_side(&base, eta, &mut rng);
            let r = round_strategy(&g, &s).unwrap();
            let c = &r.certificate;
            assert!(c.delta > 0.0);
            assert!(c.holds() && c.holds_triangle, "{c:?}");
            assert!(c.tracial_residual < 1e-9 && c.corner_trace_residual < 1e-9);
            let dual = c.dual.unwrap();
            assert!(dual.commutator_holds && dual.pandp_holds, "{dual:?}");
        }
    }

    #[test]
    fn dual_budgets_hold_for_product_strategies() {
        let g = games::graph_coloring_game(3, &[(0, 1), (1, 2)], 2, 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let e = sampling::random_unit_vector(3, &mut rng);
            let f = sampling::random_unit_vector(3, &mut rng);
            let xi = CMat::from_fn(3, 3, |i, j| e[i] * f[j]);
            let pa = (0..3).map(|_| sampling::random_pvm(3, 2, &mut rng)).collect();
            let pb = (0..3).map(|_| sampling::random_pvm(3, 2, &mut rng)).collect();
            let s = CommutingStrategy::new(pa, pb, xi).unwrap();
            match verify_dual_distance(&g, &s) {
                Ok(d) => assert!(d.commutator_holds && d.pandp_holds, "{d:?}"),
                Err(Error::Conditioning { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}
