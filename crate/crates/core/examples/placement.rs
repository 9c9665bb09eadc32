//! Adaptive placement against simulated examinees.
//!
//! Usage: `placement [runs] [seed]`

use kielo::simulate::placement_study;

fn main() {
    let mut args = std::env::args().skip(1);
    let runs: usize = args.next().map_or(100, |a| a.parse().expect("runs"));
    let seed: u64 = args.next().map_or(11, |a| a.parse().expect("seed"));
    let study = placement_study(runs, -2.0, 2.0, seed).expect("placement");
    let mut within = 0;
    for r in &study {
        let err = r.theta - r.planted;
        within += usize::from(err.abs() < 0.5);
        println!(
            "planted {:+.2}  estimate {:+.2}  se {:.3}  items {:2}  error {:+.2}",
            r.planted, r.theta, r.se, r.items, err
        );
    }
    println!("{within}/{} runs within 0.5", study.len());
}
