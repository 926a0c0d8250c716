//! Synchronous games: data model, file format, generators and the value
//! functional.

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of the total ν mass from one.
pub const NU_MASS_TOL: f64 = 1e-12;
/// Deviations up to this are renormalized; larger ones are rejected.
pub const NU_RENORMALIZE_TOL: f64 = 1e-9;

/// A question-distribution weight, kept exact when the file gives a fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Exact(Ratio<i64>),
    Float(f64),
}

impl Weight {
    pub fn value(self) -> f64 {
        match self {
            Weight::Exact(r) => *r.numer() as f64 / *r.denom() as f64,
            Weight::Float(w) => w,
        }
    }

    fn is_negative(self) -> bool {
        match self {
            Weight::Exact(r) => r < Ratio::from_integer(0),
            Weight::Float(w) => !(w >= 0.0),
        }
    }

    fn is_zero(self) -> bool {
        match self {
            Weight::Exact(r) => r == Ratio::from_integer(0),
            Weight::Float(w) => w == 0.0,
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Exact(r) => write!(f, "{r}"),
            Weight::Float(w) => write!(f, "{w}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynchronousGame {
    questions: Vec<String>,
    answers: Vec<String>,
    /// Row-major `|X| × |X|`.
    nu: Vec<Weight>,
    /// Dense `(x, y, a, b)` table.
    predicate: Vec<bool>,
}

impl SynchronousGame {
    /// Validates every structural invariant. `nu` is row-major over
    /// `questions × questions`; `predicate` is indexed `((x·n + y)·k + a)·k + b`.
    pub fn new(
        questions: Vec<String>,
        answers: Vec<String>,
        nu: Vec<Weight>,
        predicate: Vec<bool>,
    ) -> Result<Self> {
        let n = questions.len();
        let k = answers.len();
        if n == 0 || k == 0 {
            return Err(Error::InvalidGame("question and answer sets must be non-empty".into()));
        }
        check_unique(&questions, "question")?;
        check_unique(&answers, "answer")?;
        if nu.len() != n * n || predicate.len() != n * n * k * k {
            return Err(Error::DimensionMismatch("nu or predicate table has the wrong size".into()));
        }
        let mut game = Self {
            questions,
            answers,
            nu,
            predicate,
        };
        for x in 0..n {
            for y in 0..n {
                let w = game.nu[x * n + y];
                if w.is_negative() {
                    return Err(Error::InvalidGame(format!(
                        "negative weight nu({}, {}) = {w}",
                        game.questions[x], game.questions[y]
                    )));
                }
                if w != game.nu[y * n + x] {
                    return Err(Error::InvalidGame(format!(
                        "nu is not symmetric: nu({x}, {y}) = {w} but nu({y}, {x}) = {}",
                        game.nu[y * n + x],
                        x = game.questions[x],
                        y = game.questions[y]
                    )));
                }
            }
        }
        let total: f64 = game.nu.iter().map(|w| w.value()).sum();
        let deviation = (total - 1.0).abs();
        if deviation > NU_RENORMALIZE_TOL {
            return Err(Error::InvalidGame(format!("nu has total mass {total}, expected 1")));
        }
        if deviation > NU_MASS_TOL {
            for w in &mut game.nu {
                *w = Weight::Float(w.value() / total);
            }
        }
        for x in 0..n {
            for y in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        let v = game.predicate[game.pidx(x, y, a, b)];
                        if x == y && v != (a == b) {
                            return Err(Error::InvalidGame(format!(
                                "diagonal rule violated at D({q}, {q}, {}, {}) = {}",
                                game.answers[a],
                                game.answers[b],
                                v as u8,
                                q = game.questions[x]
                            )));
                        }
                        if v != game.predicate[game.pidx(y, x, b, a)] {
                            return Err(Error::InvalidGame(format!(
                                "predicate is not symmetric at ({}, {}, {}, {})",
                                game.questions[x], game.questions[y], game.answers[a], game.answers[b]
                            )));
                        }
                    }
                }
            }
        }
        Ok(game)
    }

    fn pidx(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        let n = self.questions.len();
        let k = self.answers.len();
        ((x * n + y) * k + a) * k + b
    }

    pub fn questions(&self) -> &[String] {
        &self.questions
    }

    pub fn answers(&self) -> &[String] {
        &self.answers
    }

    pub fn n_questions(&self) -> usize {
        self.questions.len()
    }

    pub fn n_answers(&self) -> usize {
        self.answers.len()
    }

    pub fn question_index(&self, label: &str) -> Option<usize> {
        self.questions.iter().position(|q| q == label)
    }

    pub fn weight(&self, x: usize, y: usize) -> Weight {
        self.nu[x * self.n_questions() + y]
    }

    pub fn nu(&self, x: usize, y: usize) -> f64 {
        self.weight(x, y).value()
    }

    /// Marginal `μ(x) = Σ_y ν(x, y)`.
    pub fn mu(&self, x: usize) -> f64 {
        (0..self.n_questions()).map(|y| self.nu(x, y)).sum()
    }

    pub fn predicate(&self, x: usize, y: usize, a: usize, b: usize) -> bool {
        self.predicate[self.pidx(x, y, a, b)]
    }

    pub fn alpha(&self) -> f64 {
        alpha_of(self)
    }

    /// Copy with one off-diagonal predicate entry (and its mirror) changed.
    pub fn with_predicate(&self, x: usize, y: usize, a: usize, b: usize, v: bool) -> Result<Self> {
        let mut p = self.predicate.clone();
        let i = self.pidx(x, y, a, b);
        let j = self.pidx(y, x, b, a);
        p[i] = v;
        p[j] = v;
        Self::new(self.questions.clone(), self.answers.clone(), self.nu.clone(), p)
    }
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if seen.insert(l.as_str(), i).is_some() {
            return Err(Error::InvalidGame(format!("duplicate {what} label {l:?}")));
        }
    }
    Ok(())
}

/// Largest `α` with `ν(x,x) ≥ α μ(x)` for all `x`; questions with zero
/// marginal are ignored.
pub fn alpha_of(game: &SynchronousGame) -> f64 {
    (0..game.n_questions())
        .filter_map(|x| {
            let m = game.mu(x);
            (m > 0.0).then(|| game.nu(x, x) / m)
        })
        .fold(f64::INFINITY, f64::min)
        .min(1.0)
}

/// One probability table `P_{x,y}(a, b)` per question pair.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    n_questions: usize,
    n_answers: usize,
    data: Vec<f64>,
}

impl CorrelationTable {
    pub const NEG_TOL: f64 = 1e-10;
    pub const SUM_TOL: f64 = 1e-8;

    pub fn zeros(n_questions: usize, n_answers: usize) -> Self {
        Self {
            n_questions,
            n_answers,
            data: vec![0.0; n_questions * n_questions * n_answers * n_answers],
        }
    }

    /// Fills a table from `f(x, y, a, b)` and validates it.
    pub fn from_fn<F>(n_questions: usize, n_answers: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize) -> f64,
    {
        let mut t = Self::zeros(n_questions, n_answers);
        for x in 0..n_questions {
            for y in 0..n_questions {
                for a in 0..n_answers {
                    for b in 0..n_answers {
                        t.set(x, y, a, b, f(x, y, a, b));
                    }
                }
            }
        }
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for x in 0..self.n_questions {
            for y in 0..self.n_questions {
                let mut sum = 0.0;
                for a in 0..self.n_answers {
                    for b in 0..self.n_answers {
                        let v = self.get(x, y, a, b);
                        if !(v >= -Self::NEG_TOL) {
                            return Err(Error::InvalidCorrelation(format!(
                                "P[{x},{y}]({a},{b}) = {v:.3e} is negative"
                            )));
                        }
                        sum += v;
                    }
                }
                if (sum - 1.0).abs() > Self::SUM_TOL {
                    return Err(Error::InvalidCorrelation(format!("P[{x},{y}] sums to {sum}")));
                }
            }
        }
        Ok(())
    }

    fn idx(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.n_questions + y) * self.n_answers + a) * self.n_answers + b
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        self.data[self.idx(x, y, a, b)]
    }

    pub fn set(&mut self, x: usize, y: usize, a: usize, b: usize, v: f64) {
        let i = self.idx(x, y, a, b);
        self.data[i] = v;
    }

    pub fn n_questions(&self) -> usize {
        self.n_questions
    }

    pub fn n_answers(&self) -> usize {
        self.n_answers
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs_difference(&self, other: &CorrelationTable) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// `∫ Σ_{a,b} |P − Q| dν(x, y)`.
    pub fn l1_distance(&self, other: &CorrelationTable, game: &SynchronousGame) -> Result<f64> {
        check_shape(game, self)?;
        check_shape(game, other)?;
        let mut total = 0.0;
        for x in 0..self.n_questions {
            for y in 0..self.n_questions {
                let w = game.nu(x, y);
                if w == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for a in 0..self.n_answers {
                    for b in 0..self.n_answers {
                        s += (self.get(x, y, a, b) - other.get(x, y, a, b)).abs();
                    }
                }
                total += w * s;
            }
        }
        Ok(total)
    }

    /// Largest `|P_{x,y}(a,b) − P_{y,x}(b,a)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n_questions {
            for y in 0..self.n_questions {
                for a in 0..self.n_answers {
                    for b in 0..self.n_answers {
                        worst = worst.max((self.get(x, y, a, b) - self.get(y, x, b, a)).abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest off-diagonal mass `P_{x,x}(a, b)`, `a ≠ b`.
    pub fn synchronicity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for x in 0..self.n_questions {
            for a in 0..self.n_answers {
                for b in 0..self.n_answers {
                    if a != b {
                        worst = worst.max(self.get(x, x, a, b).abs());
                    }
                }
            }
        }
        worst
    }
}

fn check_shape(game: &SynchronousGame, p: &CorrelationTable) -> Result<()> {
    if p.n_questions != game.n_questions() || p.n_answers != game.n_answers() {
        return Err(Error::DimensionMismatch(format!(
            "table is {}x{} (questions x answers), game is {}x{}",
            p.n_questions,
            p.n_answers,
            game.n_questions(),
            game.n_answers()
        )));
    }
    Ok(())
}

/// `∫ Σ_{a,b} D(x,y,a,b) P_{x,y}(a,b) dν(x,y)`.
pub fn game_value(game: &SynchronousGame, p: &CorrelationTable) -> Result<f64> {
    check_shape(game, p)?;
    let n = game.n_questions();
    let k = game.n_answers();
    let mut value = 0.0;
    for x in 0..n {
        for y in 0..n {
            let w = game.nu(x, y);
            if w == 0.0 {
                continue;
            }
            let mut s = 0.0;
            for a in 0..k {
                for b in 0..k {
                    if game.predicate(x, y, a, b) {
                        s += p.get(x, y, a, b);
                    }
                }
            }
            value += w * s;
        }
    }
    Ok(value)
}

/// Coloring game: `ν = λ·uniform(diagonal) + (1−λ)·uniform(ordered edges)`,
/// losing exactly when adjacent vertices get the same color.
pub fn graph_coloring_game(
    n_vertices: usize,
    edges: &[(usize, usize)],
    colors: usize,
    diagonal_mass: f64,
) -> Result<SynchronousGame> {
    if colors == 0 || n_vertices == 0 {
        return Err(Error::InvalidGame("need at least one vertex and one color".into()));
    }
    if !(diagonal_mass > 0.0 && diagonal_mass < 1.0) {
        return Err(Error::InvalidGame(format!(
            "diagonal mass must lie in (0, 1), got {diagonal_mass}"
        )));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGame(
            "empty edge list leaves no room for the off-diagonal mass".into(),
        ));
    }
    let n = n_vertices;
    let mut adjacent = vec![false; n * n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidGame(format!("edge ({u}, {v}) has an unknown vertex")));
        }
        if u == v {
            return Err(Error::InvalidGame(format!("self-loop at vertex {u}")));
        }
        if adjacent[u * n + v] {
            return Err(Error::InvalidGame(format!("duplicate edge ({u}, {v})")));
        }
        adjacent[u * n + v] = true;
        adjacent[v * n + u] = true;
    }
    let ordered_edges = 2 * edges.len();
    let diag = diagonal_mass / n as f64;
    let off = (1.0 - diagonal_mass) / ordered_edges as f64;
    let mut nu = vec![Weight::Float(0.0); n * n];
    for x in 0..n {
        nu[x * n + x] = Weight::Float(diag);
        for y in 0..n {
            if adjacent[x * n + y] {
                nu[x * n + y] = Weight::Float(off);
            }
        }
    }
    let k = colors;
    let mut predicate = vec![true; n * n * k * k];
    for x in 0..n {
        for y in 0..n {
            for a in 0..k {
                for b in 0..k {
                    let i = ((x * n + y) * k + a) * k + b;
                    predicate[i] = if x == y {
                        a == b
                    } else {
                        !(adjacent[x * n + y] && a == b)
                    };
                }
            }
        }
    }
    SynchronousGame::new(
        (0..n).map(|v| format!("v{v}")).collect(),
        (0..k).map(|c| format!("c{c}")).collect(),
        nu,
        predicate,
    )
}

/// Game whose ν lives on the diagonal: only the synchronicity condition is tested.
pub fn diagonal_game(n_questions: usize, n_answers: usize) -> Result<SynchronousGame> {
    let n = n_questions;
    let k = n_answers;
    let mut nu = vec![Weight::Exact(Ratio::from_integer(0)); n * n];
    for x in 0..n {
        nu[x * n + x] = Weight::Exact(Ratio::new(1, n as i64));
    }
    let mut predicate = vec![true; n * n * k * k];
    for x in 0..n {
        for a in 0..k {
            for b in 0..k {
                predicate[((x * n + x) * k + a) * k + b] = a == b;
            }
        }
    }
    SynchronousGame::new(
        (0..n).map(|q| format!("q{q}")).collect(),
        (0..k).map(|a| format!("a{a}")).collect(),
        nu,
        predicate,
    )
}

// ---------------------------------------------------------------------------
// File format

#[derive(Debug, Serialize, Deserialize)]
struct GameFile {
    questions: Vec<String>,
    answers: Vec<String>,
    nu: Vec<NuEntry>,
    predicate: PredicateSpec,
}

#[derive(Debug, Serialize, Deserialize)]
struct NuEntry {
    x: String,
    y: String,
    w: WeightRepr,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum WeightRepr {
    Number(f64),
    Fraction(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct PredicateSpec {
    default: u8,
    #[serde(default)]
    entries: Vec<PredicateEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PredicateEntry {
    x: String,
    y: String,
    a: String,
    b: String,
    v: u8,
}

fn parse_weight(w: &WeightRepr) -> Result<Weight> {
    match w {
        WeightRepr::Number(v) => Ok(Weight::Float(*v)),
        WeightRepr::Fraction(s) => s
            .trim()
            .parse::<Ratio<i64>>()
            .map(Weight::Exact)
            .map_err(|e| Error::Parse(format!("weight {s:?}: {e}"))),
    }
}

fn parse_bit(v: u8, context: &str) -> Result<bool> {
    match v {
        0 => Ok(false),
        1 => Ok(true),
        other => Err(Error::Parse(format!("{context}: expected 0 or 1, got {other}"))),
    }
}

pub fn load_game(text: &str) -> Result<SynchronousGame> {
    let file: GameFile = serde_json::from_str(text)?;
    let n = file.questions.len();
    let k = file.answers.len();
    check_unique(&file.questions, "question")?;
    check_unique(&file.answers, "answer")?;
    let qidx: HashMap<&str, usize> = file.questions.iter().enumerate().map(|(i, q)| (q.as_str(), i)).collect();
    let aidx: HashMap<&str, usize> = file.answers.iter().enumerate().map(|(i, a)| (a.as_str(), i)).collect();
    let q = |l: &str| {
        qidx.get(l)
            .copied()
            .ok_or_else(|| Error::InvalidGame(format!("unknown question label {l:?}")))
    };
    let a = |l: &str| {
        aidx.get(l)
            .copied()
            .ok_or_else(|| Error::InvalidGame(format!("unknown answer label {l:?}")))
    };

    let mut nu: Vec<Option<Weight>> = vec![None; n * n];
    for e in &file.nu {
        let (x, y) = (q(&e.x)?, q(&e.y)?);
        let w = parse_weight(&e.w)?;
        for (i, j) in [(x, y), (y, x)] {
            match nu[i * n + j] {
                Some(prev) if prev != w => {
                    return Err(Error::InvalidGame(format!(
                        "nu is not symmetric: ({}, {}) listed with weights {prev} and {w}",
                        e.x, e.y
                    )))
                }
                _ => nu[i * n + j] = Some(w),
            }
        }
    }
    let nu: Vec<Weight> = nu.into_iter().map(|w| w.unwrap_or(Weight::Float(0.0))).collect();

    let default = parse_bit(file.predicate.default, "predicate default")?;
    let mut explicit: Vec<Option<bool>> = vec![None; n * n * k * k];
    let pidx = |x: usize, y: usize, a: usize, b: usize| ((x * n + y) * k + a) * k + b;
    for e in &file.predicate.entries {
        let (x, y, ai, bi) = (q(&e.x)?, q(&e.y)?, a(&e.a)?, a(&e.b)?);
        let v = parse_bit(e.v, "predicate entry")?;
        if x == y && v != (ai == bi) {
            return Err(Error::InvalidGame(format!(
                "entry D({}, {}, {}, {}) = {} conflicts with the diagonal rule",
                e.x, e.y, e.a, e.b, e.v
            )));
        }
        for i in [pidx(x, y, ai, bi), pidx(y, x, bi, ai)] {
            match explicit[i] {
                Some(prev) if prev != v => {
                    return Err(Error::InvalidGame(format!(
                        "predicate is not symmetric: D({}, {}, {}, {}) conflicts with its mirror",
                        e.x, e.y, e.a, e.b
                    )))
                }
                _ => explicit[i] = Some(v),
            }
        }
    }
    let mut predicate = Vec::with_capacity(n * n * k * k);
    for x in 0..n {
        for y in 0..n {
            for ai in 0..k {
                for bi in 0..k {
                    let v = if x == y {
                        ai == bi
                    } else {
                        explicit[pidx(x, y, ai, bi)].unwrap_or(default)
                    };
                    predicate.push(v);
                }
            }
        }
    }
    SynchronousGame::new(file.questions, file.answers, nu, predicate)
}

pub fn save_game(game: &SynchronousGame) -> String {
    let n = game.n_questions();
    let k = game.n_answers();
    let mut nu = Vec::new();
    for x in 0..n {
        for y in x..n {
            let w = game.weight(x, y);
            if w.is_zero() {
                continue;
            }
            let w = match w {
                Weight::Exact(r) => WeightRepr::Fraction(r.to_string()),
                Weight::Float(v) => WeightRepr::Number(v),
            };
            nu.push(NuEntry {
                x: game.questions[x].clone(),
                y: game.questions[y].clone(),
                w,
            });
        }
    }
    let mut ones = 0usize;
    let mut total = 0usize;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                for a in 0..k {
                    for b in 0..k {
                        total += 1;
                        ones += game.predicate(x, y, a, b) as usize;
                    }
                }
            }
        }
    }
    let default = 2 * ones >= total;
    let mut entries = Vec::new();
    for x in 0..n {
        for y in (x + 1)..n {
            for a in 0..k {
                for b in 0..k {
                    let v = game.predicate(x, y, a, b);
                    if v != default {
                        entries.push(PredicateEntry {
                            x: game.questions[x].clone(),
                            y: game.questions[y].clone(),
                            a: game.answers[a].clone(),
                            b: game.answers[b].clone(),
                            v: v as u8,
                        });
                    }
                }
            }
        }
    }
    let file = GameFile {
        questions: game.questions.clone(),
        answers: game.answers.clone(),
        nu,
        predicate: PredicateSpec {
            default: default as u8,
            entries,
        },
    };
    serde_json::to_string_pretty(&file).expect("game file serializes")
}
