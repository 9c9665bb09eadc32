//! Rasch parameter recovery on synthetic learners.
//!
//! cargo run --release -p kielo --example simulate -- [learners] [constructs] [answers] [seed]

use kielo::simulate::{simulate, SimulationSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse())
        .collect::<Result<_, _>>()?;
    let d = SimulationSpec::default();
    let spec = SimulationSpec {
        learners: n.first().map_or(d.learners, |&v| v as usize),
        constructs: n.get(1).map_or(d.constructs, |&v| v as usize),
        answers: n.get(2).map_or(d.answers, |&v| v as usize),
        seed: n.get(3).copied().unwrap_or(d.seed),
        ..d
    };
    let (_, report) = simulate(&spec)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
