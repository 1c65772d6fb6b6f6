//! Sweep the fairness parameter and watch total throughput trade against
//! Jain's index: higher alpha evens out the per-sensor rates at the cost of
//! total bits.

use wpmec::kkt::{solve_cfba, solve_zfba};
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);

    println!("alpha   total bits      jain    min bits    max bits");
    for alpha in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let res = if alpha == 0.0 {
            solve_zfba(&s, &ch)
        } else {
            solve_cfba(&s, &ch, alpha)
        }
        .expect("default scenario is feasible");
        let total: f64 = res.bits.iter().sum();
        let min = res.bits.iter().fold(f64::INFINITY, |m, b| m.min(*b));
        let max = res.bits.iter().fold(0.0f64, |m, b| m.max(*b));
        println!("{alpha:5.1}   {total:10.2}   {:.4}   {min:9.2}   {max:9.2}", res.jain);
    }
}
