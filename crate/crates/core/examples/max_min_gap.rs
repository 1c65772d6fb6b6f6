//! Compare the spread between best- and worst-served sensors under the three
//! fairness regimes: the max-min solver collapses the gap to numerical noise.

use wpmec::kkt::{solve_cfba, solve_mfba, solve_zfba, SolverResult};
use wpmec::scenario::{default_scenario, draw_channels};

fn spread(res: &SolverResult) -> (f64, f64) {
    let min = res.bits.iter().fold(f64::INFINITY, |m, b| m.min(*b));
    let max = res.bits.iter().fold(0.0f64, |m, b| m.max(*b));
    (max - min, res.bits.iter().sum::<f64>() / res.bits.len() as f64)
}

fn main() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);

    println!("solver        max-min gap [bit]   gap / mean rate");
    for (name, res) in [
        ("zfba", solve_zfba(&s, &ch).unwrap()),
        ("cfba a=1", solve_cfba(&s, &ch, 1.0).unwrap()),
        ("mfba", solve_mfba(&s, &ch).unwrap()),
    ] {
        let (gap, mean) = spread(&res);
        println!("{name:<12}  {gap:17.6e}   {:.3e}", gap / mean);
    }

    let mm = solve_mfba(&s, &ch).unwrap();
    println!();
    println!("mfba common rate (epigraph bound): {:.4} bit", mm.slack[0]);
}
