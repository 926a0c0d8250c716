//! Alternating maximization over Alice's PVMs, Bob's PVMs and the state.
//!
//! With two of the three fixed the value is linear in the third. For a
//! PVM family the objective `Σ_a Tr(p_a W_a)` is maximized over a set of
//! candidate orthonormal bases (eigenbases of the payoff operators `W_a`,
//! of their pairwise differences, and the basis adapted to the current
//! PVM), assigning each basis vector to the answer with the largest
//! expected payoff. The adapted basis always reproduces at least the
//! current objective, so no update can decrease the value. The state
//! update takes the top eigenvector of the global payoff operator.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::games::{self, SynchronousGame};
use crate::linalg::{self, CMat};
use crate::sampling;
use crate::spectral::HermitianMatrix;

use super::{correlation_of_commuting, CommutingStrategy, Pvm};

/// Minimum objective gain for accepting a new PVM.
const ACCEPT_GAIN: f64 = 1e-13;

#[derive(Debug, Clone)]
pub struct SeesawRun {
    pub strategy: CommutingStrategy,
    /// Game value of the initialization followed by the value after each
    /// full iteration.
    pub values: Vec<f64>,
}

pub fn seesaw_optimize(
    game: &SynchronousGame,
    dim_a: usize,
    dim_b: usize,
    iterations: usize,
    seed: u64,
) -> crate::Result<SeesawRun> {
    if dim_a == 0 || dim_b == 0 {
        return Err(crate::Error::DimensionMismatch("see-saw dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = game.n_questions();
    let k = game.n_answers();
    let pvms_a: Vec<Pvm> = (0..n).map(|_| sampling::random_pvm(dim_a, k, &mut rng)).collect();
    let pvms_b: Vec<Pvm> = (0..n).map(|_| sampling::random_pvm(dim_b, k, &mut rng)).collect();
    let xi = sampling::complex_gaussian(dim_a, dim_b, &mut rng);
    let norm = xi.norm();
    let mut s = CommutingStrategy::new(pvms_a, pvms_b, xi.map(|z| z / norm))?;
    s.check_game(game)?;

    let value = |s: &CommutingStrategy| -> crate::Result<f64> {
        games::game_value(game, &correlation_of_commuting(s)?)
    };
    let mut values = vec![value(&s)?];
    for _ in 0..iterations {
        s = update_a(game, &s);
        s = update_b(game, &s);
        s = update_state(game, &s);
        values.push(value(&s)?);
    }
    Ok(SeesawRun { strategy: s, values })
}

/// `max Σ_a Tr(p_a W_a)` over the candidate PVMs, starting from `current`.
fn best_pvm(payoffs: &[CMat], current: &Pvm) -> Pvm {
    let objective = |p: &Pvm| -> f64 {
        p.elements()
            .iter()
            .zip(payoffs)
            .map(|(e, w)| linalg::trace_product(e, w).re)
            .sum()
    };
    let k = payoffs.len();
    let mut candidates: Vec<CMat> = Vec::new();
    candidates.push(adapted_basis(current));
    for w in payoffs {
        candidates.push(HermitianMatrix::from_hermitian_part(w).eigh().eigenvectors().clone());
    }
    for a in 0..k {
        for b in (a + 1)..k {
            let diff = &payoffs[a] - &payoffs[b];
            candidates.push(HermitianMatrix::from_hermitian_part(&diff).eigh().eigenvectors().clone());
        }
    }

    let mut best = current.clone();
    let mut best_value = objective(current);
    for basis in &candidates {
        let assignment: Vec<usize> = (0..basis.ncols())
            .map(|j| {
                let v = basis.column(j);
                (0..k)
                    .map(|a| (v.adjoint() * &payoffs[a] * v)[(0, 0)].re)
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (a, e)| if e > acc.1 { (a, e) } else { acc })
                    .0
            })
            .collect();
        let cand = sampling::pvm_from_basis(basis, &assignment, k);
        let v = objective(&cand);
        if v > best_value + ACCEPT_GAIN {
            best = cand;
            best_value = v;
        }
    }
    best
}

/// Orthonormal basis whose vectors each lie in the range of one element.
fn adapted_basis(p: &Pvm) -> CMat {
    let dim = p.dim();
    let mut basis = CMat::zeros(dim, dim);
    let mut col = 0;
    for e in p.elements() {
        let d = HermitianMatrix::from_hermitian_part(e).eigh();
        for (j, &l) in d.eigenvalues().iter().enumerate() {
            if l > 0.5 && col < dim {
                basis.set_column(col, &d.eigenvectors().column(j));
                col += 1;
            }
        }
    }
    if col < dim {
        // numerically degenerate family; fall back to the standard basis
        return linalg::identity(dim);
    }
    basis
}

fn update_a(game: &SynchronousGame, s: &CommutingStrategy) -> CommutingStrategy {
    let n = game.n_questions();
    let k = game.n_answers();
    let h = s.b_side_densities();
    let pvms_a = (0..n)
        .map(|x| {
            let payoffs: Vec<CMat> = (0..k)
                .map(|a| {
                    let mut w = linalg::zeros(s.dim_a());
                    for y in 0..n {
                        let nu = game.nu(x, y);
                        if nu == 0.0 {
                            continue;
                        }
                        for b in 0..k {
                            if game.predicate(x, y, a, b) {
                                w += h[y][b].map(|z| z * nu);
                            }
                        }
                    }
                    w
                })
                .collect();
            best_pvm(&payoffs, &s.pvms_a()[x])
        })
        .collect();
    CommutingStrategy::new(pvms_a, s.pvms_b().to_vec(), s.xi().clone()).expect("PVM update keeps shapes")
}

fn update_b(game: &SynchronousGame, s: &CommutingStrategy) -> CommutingStrategy {
    let n = game.n_questions();
    let k = game.n_answers();
    // ⟨(p ⊗ q) ξ, ξ⟩ = Tr(q G) with G = (Ξ* p Ξ)ᵀ
    let xi_adj = s.xi().adjoint();
    let g: Vec<Vec<CMat>> = s
        .pvms_a()
        .iter()
        .map(|f| {
            f.elements()
                .iter()
                .map(|p| linalg::hermitian_part(&(&xi_adj * p * s.xi()).transpose()))
                .collect()
        })
        .collect();
    let pvms_b = (0..n)
        .map(|y| {
            let payoffs: Vec<CMat> = (0..k)
                .map(|b| {
                    let mut w = linalg::zeros(s.dim_b());
                    for x in 0..n {
                        let nu = game.nu(x, y);
                        if nu == 0.0 {
                            continue;
                        }
                        for a in 0..k {
                            if game.predicate(x, y, a, b) {
                                w += g[x][a].map(|z| z * nu);
                            }
                        }
                    }
                    w
                })
                .collect();
            best_pvm(&payoffs, &s.pvms_b()[y])
        })
        .collect();
    CommutingStrategy::new(s.pvms_a().to_vec(), pvms_b, s.xi().clone()).expect("PVM update keeps shapes")
}

fn update_state(game: &SynchronousGame, s: &CommutingStrategy) -> CommutingStrategy {
    let n = game.n_questions();
    let k = game.n_answers();
    let (da, db) = (s.dim_a(), s.dim_b());
    let mut total = linalg::zeros(da * db);
    for x in 0..n {
        for y in 0..n {
            let nu = game.nu(x, y);
            if nu == 0.0 {
                continue;
            }
            for a in 0..k {
                for b in 0..k {
                    if game.predicate(x, y, a, b) {
                        let term = linalg::kron(&s.pvms_a()[x].elements()[a], &s.pvms_b()[y].elements()[b]);
                        total += term.map(|z| z * nu);
                    }
                }
            }
        }
    }
    let d = HermitianMatrix::from_hermitian_part(&total).eigh();
    let top = d.eigenvectors().column(da * db - 1);
    let current = CMat::from_fn(da * db, 1, |i, _| s.xi()[(i / db, i % db)]);
    let current_value = (current.adjoint() * &total * &current)[(0, 0)].re;
    if d.max_eigenvalue() <= current_value + ACCEPT_GAIN {
        return s.clone();
    }
    let xi = CMat::from_fn(da, db, |i, j| top[i * db + j]);
    let norm = xi.norm();
    CommutingStrategy::new(s.pvms_a().to_vec(), s.pvms_b().to_vec(), xi.map(|z| z / norm))
        .expect("normalized eigenvector is a unit state")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_iterations_returns_valid_initialization() {
        let g = games::graph_coloring_game(2, &[(0, 1)], 3, 0.5).unwrap();
        let run = seesaw_optimize(&g, 2, 3, 0, 17).unwrap();
        assert_eq!(run.values.len(), 1);
        assert_eq!(run.strategy.dim_a(), 2);
        assert_eq!(run.strategy.dim_b(), 3);
        let again = seesaw_optimize(&g, 2, 3, 0, 17).unwrap();
        assert_eq!(again.strategy, run.strategy);
    }

    #[test]
    fn diagonal_game_reaches_one() {
        let g = games::diagonal_game(3, 2).unwrap();
        for dims in 1..=3 {
            let run = seesaw_optimize(&g, dims, dims, 10, 5).unwrap();
            let last = *run.values.last().unwrap();
            assert!((last - 1.0).abs() < 1e-9, "dims {dims}: {:?}", run.values);
        }
    }

    #[test]
    fn k2_coloring_reaches_one() {
        let g = games::graph_coloring_game(2, &[(0, 1)], 3, 0.5).unwrap();
        let run = seesaw_optimize(&g, 3, 3, 20, 1).unwrap();
        assert!(*run.values.last().unwrap() > 1.0 - 1e-9, "{:?}", run.values);
    }

    #[test]
    fn trajectory_is_monotone() {
        let g = games::graph_coloring_game(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 3, 0.3).unwrap();
        for seed in 0..5 {
            let run = seesaw_optimize(&g, 2, 2, 8, seed).unwrap();
            assert!(run.values.windows(2).all(|w| w[1] >= w[0] - 1e-10), "{:?}", run.values);
        }
    }
}
