use crate::error::{Error, Result};
use crate::games::CorrelationTable;
use crate::linalg;

use super::{Pvm, MEASUREMENT_TOL};

/// Tolerance on `Σ_k w_k = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

/// One matrix block `M_{dim}` with normalized trace and its PVM per question.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialBlock {
    pub weight: f64,
    pub pvms: Vec<Pvm>,
}

impl TracialBlock {
    pub fn dim(&self) -> usize {
        self.pvms[0].dim()
    }
}

/// Weighted direct sum of matrix blocks; its correlation is
/// `Σ_k w_k tr_k(r^x_a r^y_b)` with `tr_k = Tr / dim_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TracialStrategy {
    blocks: Vec<TracialBlock>,
}

impl TracialStrategy {
    pub fn new(blocks: Vec<TracialBlock>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::InvalidState("tracial strategy needs at least one block".into()))?;
        let nq = first.pvms.len();
        let k = first.pvms.first().map_or(0, Pvm::len);
        if nq == 0 || k == 0 {
            return Err(Error::InvalidState("block without questions or answers".into()));
        }
        let mut total = 0.0;
        for (i, b) in blocks.iter().enumerate() {
            if !(b.weight > 0.0) {
                return Err(Error::InvalidState(format!("block {i} has weight {}", b.weight)));
            }
            if b.pvms.len() != nq || b.pvms.iter().any(|p| p.len() != k) {
                return Err(Error::DimensionMismatch(format!(
                    "block {i} does not have {nq} questions with {k} answers"
                )));
            }
            let d = b.pvms[0].dim();
            if b.pvms.iter().any(|p| p.dim() != d) {
                return Err(Error::DimensionMismatch(format!("block {i} mixes dimensions")));
            }
            total += b.weight;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidState(format!("block weights sum to {total}")));
        }
        let s = Self { blocks };
        let defect = s.synchronicity_defect();
        if defect > MEASUREMENT_TOL {
            return Err(Error::Numerical(format!(
                "tracial correlation is not synchronous: off-diagonal mass {defect:.3e}"
            )));
        }
        Ok(s)
    }

    pub fn blocks(&self) -> &[TracialBlock] {
        &self.blocks
    }

    pub fn n_questions(&self) -> usize {
        self.blocks[0].pvms.len()
    }

    pub fn n_answers(&self) -> usize {
        self.blocks[0].pvms[0].len()
    }

    fn synchronicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n_questions() {
            for a in 0..self.n_answers() {
                for b in 0..self.n_answers() {
                    if a != b {
                        worst = worst.max(self.entry(x, x, a, b).abs());
                    }
                }
            }
        }
        worst
    }

    fn entry(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.blocks
            .iter()
            .map(|blk| {
                let r = &blk.pvms[x].elements()[a];
                let s = &blk.pvms[y].elements()[b];
                blk.weight * linalg::trace_product(r, s).re / blk.dim() as f64
            })
            .sum()
    }
}

pub fn tracial_correlation(t: &TracialStrategy) -> CorrelationTable {
    let n = t.n_questions();
    let k = t.n_answers();
    let mut table = CorrelationTable::zeros(n, k);
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    table.set(x, y, a, b, t.entry(x, y, a, b));
                }
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use crate::linalg::real_diagonal;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn basis_pvm(shift: usize) -> Pvm {
        Pvm::new(
            (0..3)
                .map(|a| real_diagonal(&std::array::from_fn::<f64, 3, _>(|i| (i == (a + shift) % 3) as u8 as f64)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn single_fixed_pvm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sampling::random_pvm(4, 3, &mut rng);
        let t = TracialStrategy::new(vec![TracialBlock {
            weight: 1.0,
            pvms: vec![r.clone(), r.clone()],
        }])
        .unwrap();
        let p = tracial_correlation(&t);
        for a in 0..3 {
            for b in 0..3 {
                let want = if a == b { linalg::trace(&r.elements()[a]).re / 4.0 } else { 0.0 };
                assert!((p.get(0, 1, a, b) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn blocks_combine_convexly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b1 = TracialBlock {
            weight: 0.4,
            pvms: (0..2).map(|_| sampling::random_pvm(2, 2, &mut rng)).collect(),
        };
        let b2 = TracialBlock {
            weight: 0.6,
            pvms: (0..2).map(|_| sampling::random_pvm(3, 2, &mut rng)).collect(),
        };
        let whole = tracial_correlation(&TracialStrategy::new(vec![b1.clone(), b2.clone()]).unwrap());
        let one = |b: &TracialBlock| {
            tracial_correlation(&TracialStrategy::new(vec![TracialBlock { weight: 1.0, ..b.clone() }]).unwrap())
        };
        let (p1, p2) = (one(&b1), one(&b2));
        for ((w, u), v) in whole.values().iter().zip(p1.values()).zip(p2.values()) {
            assert!((w - (0.4 * u + 0.6 * v)).abs() < 1e-12);
        }
        assert!(whole.symmetry_defect() < 1e-12);
        assert!(whole.synchronicity_defect() < 1e-12);
    }

    #[test]
    fn triangle_coloring_wins() {
        let tri = games::graph_coloring_game(3, &[(0, 1), (1, 2), (0, 2)], 3, 1.0 / 3.0).unwrap();
        let t = TracialStrategy::new(vec![TracialBlock {
            weight: 1.0,
            pvms: (0..3).map(basis_pvm).collect(),
        }])
        .unwrap();
        let v = games::game_value(&tri, &tracial_correlation(&t)).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_weights() {
        let blk = TracialBlock {
            weight: 0.5,
            pvms: vec![basis_pvm(0)],
        };
        assert!(TracialStrategy::new(vec![blk]).is_err());
    }
}
