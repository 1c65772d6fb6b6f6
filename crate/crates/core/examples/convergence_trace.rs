//! Print the per-iteration objective trace of each solver; the alternating
//! scheme settles in a handful of outer iterations.

use wpmec::kkt::{solve_cfba, solve_mfba, solve_zfba};
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);

    for (name, res) in [
        ("zfba", solve_zfba(&s, &ch).unwrap()),
        ("cfba a=1", solve_cfba(&s, &ch, 1.0).unwrap()),
        ("mfba", solve_mfba(&s, &ch).unwrap()),
    ] {
        println!("{name} ({} iterations):", res.iterations);
        let mut prev: Option<f64> = None;
        for (i, obj) in res.trace.iter().enumerate() {
            let change = match prev {
                Some(p) => format!("{:10.3e}", (obj - p).abs() / p.abs().max(1e-12)),
                None => "         -".to_string(),
            };
            println!("  iter {:2}: objective {obj:16.8e}  rel change {change}", i + 1);
            prev = Some(*obj);
        }
        println!();
    }
}
