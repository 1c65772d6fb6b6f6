//! Solve the default four-sensor scenario with the throughput-optimal solver
//! and print the resulting allocation.

use wpmec::kkt::solve_zfba;
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);
    let res = solve_zfba(&s, &ch).expect("default scenario is feasible");

    println!("converged in {} outer iterations", res.iterations);
    println!("objective (total bits): {:.3}", res.objective);
    println!("Jain index: {:.4}", res.jain);
    println!();
    println!("ws      t [s]   ps energy [J]   tx energy [J]   cpu [Hz]      bits");
    for i in 0..s.num_ws {
        println!(
            "{i:2}  {:9.5}   {:13.6e}   {:13.6e}   {:8.2e}   {:9.2}",
            res.allocation.t[i],
            res.allocation.ps_energy[i],
            res.allocation.tx_energy[i],
            res.allocation.cpu_freq[i],
            res.bits[i],
        );
    }
    let sum_t: f64 = res.allocation.t.iter().sum();
    println!();
    println!("sum of slots {sum_t:.9} vs budget {:.9}", s.slot_budget());
}
