//! Difficulty-targeted exercise sampling.
//!
//! cargo run -p kielo --example sampler -- [draws] [seed]

use kielo::learner::{sample_index, SamplerConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let draws: usize = args.next().map_or(10_000, |a| a.parse().expect("draws"));
    let seed: u64 = args.next().map_or(0, |a| a.parse().expect("seed"));
    let pool: Vec<f64> = (0..19).map(|i| 0.05 + 0.05 * f64::from(i)).collect();
    let config = SamplerConfig {
        seed,
        ..SamplerConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; pool.len()];
    for _ in 0..draws {
        counts[sample_index(&pool, &config, &mut rng).expect("non-empty pool")] += 1;
    }
    let mean: f64 = counts
        .iter()
        .zip(&pool)
        .map(|(&c, &p)| c as f64 * p)
        .sum::<f64>()
        / draws as f64;
    for (p, c) in pool.iter().zip(&counts) {
        println!("p={p:.2} {:>5} {}", c, "#".repeat(c * 200 / draws));
    }
    println!("mean predicted success {mean:.4}");
}
