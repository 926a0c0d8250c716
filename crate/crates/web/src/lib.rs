//! Browser bindings for the demo page in `www/`. Every export returns a JSON string;
//! failures come back as `{"error": "..."}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use syncround::games;
use syncround::haagerup::{connes_certificate, joint_spectral_measure, measure_moments};
use syncround::rounding::{orthogonalize_povm, round_strategy};
use syncround::sampling;

const MAX_DIM: usize = 16;

fn finish(r: syncround::Result<Value>) -> String {
    r.unwrap_or_else(|e| json!({"error": e.to_string()})).to_string()
}

fn clamp_dim(dim: u32) -> usize {
    (dim as usize).clamp(1, MAX_DIM)
}

/// Two random positive matrices: the inequality chain plus the atoms of their joint measure.
#[wasm_bindgen]
pub fn connes_explore(dim: u32, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = clamp_dim(dim);
    let x = sampling::random_psd_rank(d, rng.random_range(1..=d), &mut rng);
    let y = sampling::random_psd_rank(d, rng.random_range(1..=d), &mut rng);
    finish((|| {
        let c = connes_certificate(&x, &y)?;
        let mu = joint_spectral_measure(&x, &y)?;
        let m = measure_moments(&mu);
        Ok(json!({"dim": d, "certificate": c, "moments": m, "atoms": mu.atoms}))
    })())
}

/// Rounds a B-side perturbation of the exact coloring strategy of one edge with three colors.
#[wasm_bindgen]
pub fn round_perturbed(eta: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eta = if eta.is_finite() { eta.clamp(0.0, 1.0) } else { 0.0 };
    finish((|| {
        let game = games::graph_coloring_game(2, &[(0, 1)], 3, 0.5)?;
        let s = sampling::perturb_b_side(&sampling::coloring_strategy(&[0, 1], 3), eta, &mut rng);
        let c = round_strategy(&game, &s)?.certificate;
        Ok(json!({
            "eta": eta,
            "delta": c.delta,
            "value_in": c.value_in,
            "value_out": c.value_out,
            "d1_first": c.d1_first,
            "d1_total": c.d1_total,
            "bound_first": c.bound_first,
            "bound_total": c.bound_total,
            "bound_game": c.bound_game,
            "holds": c.holds(),
        }))
    })())
}

/// Greedy orthogonalization of a noisy projective measurement.
#[wasm_bindgen]
pub fn orthogonalize(dim: u32, outcomes: u32, noise: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = clamp_dim(dim);
    let k = (outcomes as usize).clamp(1, 8);
    let noise = if noise.is_finite() { noise.clamp(0.0, 1.0) } else { 0.0 };
    let povm = sampling::near_projective_povm(d, k, noise, &mut rng);
    let (pvm, report) = orthogonalize_povm(&povm);
    let traces = |ms: &[syncround::linalg::CMat]| ms.iter().map(|m| m.trace().re).collect::<Vec<_>>();
    json!({
        "dim": d,
        "outcomes": k,
        "noise": noise,
        "povm_traces": traces(povm.elements()),
        "pvm_ranks": traces(pvm.elements()),
        "report": report,
    })
    .to_string()
}
