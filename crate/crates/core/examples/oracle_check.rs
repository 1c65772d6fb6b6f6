//! Cross-check the closed-form solvers against the interior-point reference
//! on a few channel draws.

use wpmec::kkt::{solve_cfba, solve_mfba, solve_zfba};
use wpmec::oracle;
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();

    println!("seed  case        solver obj      oracle obj      rel gap");
    for seed in 0..3u64 {
        let ch = draw_channels(&s, seed);
        let cases = [
            ("zfba", solve_zfba(&s, &ch).unwrap().objective,
             oracle::solve_generic(&s, &ch, 0.0).unwrap().objective),
            ("cfba a=1", solve_cfba(&s, &ch, 1.0).unwrap().objective,
             oracle::solve_generic(&s, &ch, 1.0).unwrap().objective),
            ("mfba", solve_mfba(&s, &ch).unwrap().objective,
             oracle::solve_maxmin_epigraph(&s, &ch).unwrap().objective),
        ];
        for (name, solver, reference) in cases {
            let rel = (solver - reference).abs() / reference.abs().max(1e-12);
            println!("{seed:4}  {name:<9}  {solver:13.6e}  {reference:13.6e}  {rel:.2e}");
        }
    }
}
