//! Compare the joint solver against the three restricted baselines: local
//! computing only, offloading only, and no energy recycling.

use wpmec::benchmarks::{solve_fcoa, solve_flca, solve_nera};
use wpmec::kkt::solve_zfba;
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();

    println!("seed        zfba        fcoa        nera        flca");
    let mut totals = [0.0f64; 4];
    for seed in 0..10u64 {
        let ch = draw_channels(&s, seed);
        let row = [
            solve_zfba(&s, &ch).unwrap().objective,
            solve_fcoa(&s, &ch).unwrap().objective,
            solve_nera(&s, &ch).unwrap().objective,
            solve_flca(&s, &ch).unwrap().objective,
        ];
        for (acc, v) in totals.iter_mut().zip(row) {
            *acc += v;
        }
        println!(
            "{seed:4}  {:10.1}  {:10.1}  {:10.1}  {:10.1}",
            row[0], row[1], row[2], row[3]
        );
    }

    println!();
    println!("mean bits over 10 seeds:");
    for (name, total) in ["zfba", "fcoa", "nera", "flca"].iter().zip(totals) {
        println!("  {name}: {:.1}", total / 10.0);
    }
    println!();
    println!("recycling gain (zfba vs nera): {:.1} bit", (totals[0] - totals[2]) / 10.0);
}
