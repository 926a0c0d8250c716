use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use syncround::games;
use syncround::haagerup::{
    commutator_certificate, connes_certificate, joint_spectral_measure, lp_duality_check, measure_moments,
    threshold_chi_distance,
};
use syncround::linalg;
use syncround::rounding::{round_strategy, verify_dual_distance};
use syncround::sampling;
use syncround::spectral::HermitianMatrix;

use crate::report::RunReport;
use crate::Suite;

/// Identity tolerance of the measure and duality suites.
const MEASURE_TOL: f64 = 1e-9;
const DUALITY_TOL: f64 = 1e-8;
const ETAS: [f64; 3] = [0.02, 0.05, 0.1];

fn instance_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn psd<R: Rng>(d: usize, rng: &mut R) -> HermitianMatrix {
    let rank = rng.random_range(1..=d);
    let scale = rng.random_range(0.1..3.0);
    let x = sampling::random_psd_rank(d, rank, rng);
    HermitianMatrix::from_hermitian_part(&(x.matrix() * linalg::c(scale)))
}

fn pair<R: Rng>(dims: usize, rng: &mut R) -> (usize, HermitianMatrix, HermitianMatrix) {
    let d = rng.random_range(1..=dims);
    (d, psd(d, rng), psd(d, rng))
}

fn connes(index: usize, dims: usize, seed: u64) -> (Value, bool) {
    let mut rng = instance_rng(seed, index);
    let (d, x, y) = pair(dims, &mut rng);
    match connes_certificate(&x, &y) {
        Ok(c) => (json!({"index": index, "dim": d, "certificate": c}), c.holds),
        Err(e) => (json!({"index": index, "dim": d, "error": e.to_string()}), false),
    }
}

fn measure(index: usize, dims: usize, seed: u64) -> (Value, bool) {
    let mut rng = instance_rng(seed, index);
    let (d, x, y) = pair(dims, &mut rng);
    let result = (|| -> syncround::Result<_> {
        let m = measure_moments(&joint_spectral_measure(&x, &y)?);
        let chi = threshold_chi_distance(&x, &y)?;
        let (xm, ym) = (x.matrix(), y.matrix());
        let direct = [
            linalg::frobenius_sq(xm),
            linalg::frobenius_sq(ym),
            linalg::trace_product(xm, ym).re,
            linalg::frobenius_sq(&(xm + ym)),
            chi,
        ];
        let from_measure = [m.norm_x_sq, m.norm_y_sq, m.inner_product, m.total_mass, m.chi_distance];
        let deviation = direct
            .iter()
            .zip(&from_measure)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        Ok((m, deviation))
    })();
    match result {
        Ok((m, dev)) => (
            json!({"index": index, "dim": d, "moments": m, "max_deviation": dev}),
            dev <= MEASURE_TOL,
        ),
        Err(e) => (json!({"index": index, "dim": d, "error": e.to_string()}), false),
    }
}

fn commutator(index: usize, dims: usize, seed: u64) -> (Value, bool) {
    let mut rng = instance_rng(seed, index);
    let d = rng.random_range(1..=dims);
    let k = rng.random_range(1..=4);
    let x = sampling::random_psd_unit_l2(d, &mut rng);
    let p = sampling::random_pvm(d, k, &mut rng);
    match commutator_certificate(&x, p.elements()) {
        Ok(c) => (json!({"index": index, "dim": d, "outcomes": k, "certificate": c}), c.holds),
        Err(e) => (json!({"index": index, "dim": d, "error": e.to_string()}), false),
    }
}

fn duality(index: usize, dims: usize, seed: u64) -> (Value, bool) {
    let mut rng = instance_rng(seed, index);
    let (d, x, y) = pair(dims, &mut rng);
    let residuals: Result<Vec<f64>, _> = [2.0, 3.0].iter().map(|&p| lp_duality_check(&x, &y, p)).collect();
    match residuals {
        Ok(r) => (
            json!({"index": index, "dim": d, "residual_p2": r[0], "residual_p3": r[1]}),
            r.iter().all(|&v| v <= DUALITY_TOL),
        ),
        Err(e) => (json!({"index": index, "dim": d, "error": e.to_string()}), false),
    }
}

fn rounding(index: usize, seed: u64) -> (Value, bool) {
    let mut rng = instance_rng(seed, index);
    let eta = ETAS[index % ETAS.len()];
    let game = games::graph_coloring_game(2, &[(0, 1)], 3, 0.5).expect("fixed game is valid");
    let s = sampling::perturb_b_side(&sampling::coloring_strategy(&[0, 1], 3), eta, &mut rng);
    let result = round_strategy(&game, &s).and_then(|r| Ok((r.certificate, verify_dual_distance(&game, &s)?)));
    match result {
        Ok((c, d)) => {
            let holds = c.holds() && d.commutator_holds && d.pandp_holds;
            (
                json!({
                    "index": index,
                    "eta": eta,
                    "delta": c.delta,
                    "value_in": c.value_in,
                    "value_out": c.value_out,
                    "d1_total": c.d1_total,
                    "bound_total": c.bound_total,
                    "bound_game": c.bound_game,
                    "holds": c.holds(),
                    "dual": d,
                }),
                holds,
            )
        }
        Err(e) => (json!({"index": index, "eta": eta, "error": e.to_string()}), false),
    }
}

pub fn verify(suite: Suite, n: usize, dims: usize, seed: u64) -> RunReport {
    let results: Vec<(Value, bool)> = (0..n)
        .into_par_iter()
        .map(|i| match suite {
            Suite::Connes => connes(i, dims, seed),
            Suite::Measure => measure(i, dims, seed),
            Suite::Commutator => commutator(i, dims, seed),
            Suite::Duality => duality(i, dims, seed),
            Suite::Rounding => rounding(i, seed),
        })
        .collect();
    let mut report = RunReport::new(
        json!({"command": "verify", "suite": suite.name(), "n": n, "dims": dims, "seed": seed}),
        Some(seed),
    );
    for (v, holds) in results {
        report.instances.push(v);
        report.record(holds);
    }
    eprintln!("{} suite: {} instance(s)", suite.name(), n);
    report
}
