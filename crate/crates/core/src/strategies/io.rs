//! JSON strategy files. Matrices are row-major nested arrays of `[re, im]`
//! pairs; PVM families are keyed by question label.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::games::SynchronousGame;
use crate::linalg::CMat;

use super::{CommutingStrategy, Pvm, TracialBlock, TracialStrategy};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    Ok(CMat::from_fn(n, m, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1])))
}

#[derive(Debug, Serialize, Deserialize)]
struct StrategyFile {
    #[serde(rename = "dimA")]
    dim_a: usize,
    #[serde(rename = "dimB")]
    dim_b: usize,
    xi: JsonMatrix,
    #[serde(rename = "pvmsA")]
    pvms_a: BTreeMap<String, Vec<JsonMatrix>>,
    #[serde(rename = "pvmsB")]
    pvms_b: BTreeMap<String, Vec<JsonMatrix>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TracialFile {
    blocks: Vec<BlockFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BlockFile {
    w: f64,
    dim: usize,
    pvms: BTreeMap<String, Vec<JsonMatrix>>,
}

fn families_in_game_order(
    game: &SynchronousGame,
    map: &BTreeMap<String, Vec<JsonMatrix>>,
    dim: usize,
    side: &str,
) -> Result<Vec<Pvm>> {
    if let Some(unknown) = map.keys().find(|k| game.question_index(k).is_none()) {
        return Err(Error::Parse(format!("{side}: unknown question label {unknown:?}")));
    }
    game.questions()
        .iter()
        .map(|q| {
            let mats = map
                .get(q)
                .ok_or_else(|| Error::Parse(format!("{side}: no PVM for question {q:?}")))?;
            let elems = mats.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
            if elems.iter().any(|m| m.nrows() != dim || m.ncols() != dim) {
                return Err(Error::DimensionMismatch(format!(
                    "{side}: PVM for question {q:?} is not {dim}x{dim}"
                )));
            }
            Pvm::new(elems).map_err(|e| Error::InvalidPvm(format!("{side}, question {q:?}: {e}")))
        })
        .collect()
}

fn families_to_json(game: &SynchronousGame, pvms: &[Pvm]) -> BTreeMap<String, Vec<JsonMatrix>> {
    game.questions()
        .iter()
        .zip(pvms)
        .map(|(q, p)| (q.clone(), p.elements().iter().map(matrix_to_json).collect()))
        .collect()
}

pub fn load_strategy(text: &str, game: &SynchronousGame) -> Result<CommutingStrategy> {
    let f: StrategyFile = serde_json::from_str(text)?;
    let xi = matrix_from_json(&f.xi)?;
    if xi.nrows() != f.dim_a || xi.ncols() != f.dim_b {
        return Err(Error::DimensionMismatch(format!(
            "xi is {}x{}, declared {}x{}",
            xi.nrows(),
            xi.ncols(),
            f.dim_a,
            f.dim_b
        )));
    }
    let pa = families_in_game_order(game, &f.pvms_a, f.dim_a, "pvmsA")?;
    let pb = families_in_game_order(game, &f.pvms_b, f.dim_b, "pvmsB")?;
    let s = CommutingStrategy::new(pa, pb, xi)?;
    s.check_game(game)?;
    Ok(s)
}

pub fn save_strategy(s: &CommutingStrategy, game: &SynchronousGame) -> Result<String> {
    s.check_game(game)?;
    let f = StrategyFile {
        dim_a: s.dim_a(),
        dim_b: s.dim_b(),
        xi: matrix_to_json(s.xi()),
        pvms_a: families_to_json(game, s.pvms_a()),
        pvms_b: families_to_json(game, s.pvms_b()),
    };
    Ok(serde_json::to_string_pretty(&f)?)
}

pub fn load_tracial_strategy(text: &str, game: &SynchronousGame) -> Result<TracialStrategy> {
    let f: TracialFile = serde_json::from_str(text)?;
    let blocks = f
        .blocks
        .iter()
        .map(|b| {
            Ok(TracialBlock {
                weight: b.w,
                pvms: families_in_game_order(game, &b.pvms, b.dim, "block")?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    TracialStrategy::new(blocks)
}

pub fn save_tracial_strategy(t: &TracialStrategy, game: &SynchronousGame) -> Result<String> {
    if t.n_questions() != game.n_questions() {
        return Err(Error::DimensionMismatch("tracial strategy and game disagree on questions".into()));
    }
    let f = TracialFile {
        blocks: t
            .blocks()
            .iter()
            .map(|b| BlockFile {
                w: b.weight,
                dim: b.dim(),
                pvms: families_to_json(game, &b.pvms),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&f)?)
}
