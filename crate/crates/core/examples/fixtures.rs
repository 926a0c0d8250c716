//! Writes the strategy files under `data/` for the two-vertex coloring game.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use syncround::games;
use syncround::sampling;
use syncround::strategies::save_strategy;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string("data/k2_coloring.json")?;
    let game = games::load_game(&text)?;
    let exact = sampling::coloring_strategy(&[0, 1], 3);
    std::fs::write("data/k2_synchronous.json", save_strategy(&exact, &game)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noisy = sampling::perturb_b_side(&exact, 0.05, &mut rng);
    std::fs::write("data/k2_perturbed.json", save_strategy(&noisy, &game)?)?;
    Ok(())
}
