//! Restricted-strategy comparison schemes, each solved optimally inside its
//! own strategy space. All three are assessed fairness-neutral (throughput
//! objective), so every one of them is dominated by the joint design.

use crate::error::{Error, InfeasibilityReport};
use crate::fairness;
use crate::kkt::{self, DualState, Regime, SolveOptions, SolverResult};
use crate::physics::{self, Allocation, EnergyModel};
use crate::scenario::{ChannelRealization, Scenario};

/// Full local computing: nobody offloads; the PS radiates at full power for
/// the whole offloading window, so every sensor harvests simultaneously, and
/// each CPU runs as fast as its energy and hardware caps allow.
pub fn solve_flca(s: &Scenario, ch: &ChannelRealization) -> Result<SolverResult, Error> {
    s.ensure_valid()?;
    let k = s.num_ws;
    let budget = s.slot_budget();
    // slots retained only to shape the PS emission; any split is equivalent
    // under the linear harvesting model
    let t = vec![budget / k as f64; k];
    let ps_energy: Vec<f64> = t.iter().map(|ti| s.ps_power_max * ti).collect();
    let mut alloc = Allocation {
        t,
        ps_energy,
        tx_energy: vec![0.0; k],
        cpu_freq: vec![0.0; k],
    };
    for i in 0..k {
        let intake = physics::harvested_energy_one(s, ch, &alloc, EnergyModel::FullFramePs, i);
        let cap = (intake.total() / (s.frame_duration * s.switched_capacitance[i])).cbrt();
        alloc.cpu_freq[i] = s.cpu_freq_max[i].min(cap);
    }
    let bits: Vec<f64> = (0..k).map(|i| physics::local_bits(s, alloc.cpu_freq[i], i)).collect();
    for i in 0..k {
        if bits[i] < s.min_data[i] * (1.0 - 1e-12) {
            return Err(Error::Infeasible(InfeasibilityReport {
                binding_ws: i,
                required_bits: s.min_data[i],
                achievable_bits: bits[i],
            }));
        }
    }
    Ok(restricted_result(s, alloc, bits))
}

/// Full computation offloading: CPUs stay off and the joint machinery
/// optimizes the remaining variables.
pub fn solve_fcoa(s: &Scenario, ch: &ChannelRealization) -> Result<SolverResult, Error> {
    let mut opts = SolveOptions::for_regime(Regime::ZeroFairness);
    opts.force_zero_freq = true;
    kkt::solve_with_options(s, ch, &opts)
}

/// No cooperative energy recycling: the joint design with peer harvesting
/// removed from the energy model.
pub fn solve_nera(s: &Scenario, ch: &ChannelRealization) -> Result<SolverResult, Error> {
    let mut opts = SolveOptions::for_regime(Regime::ZeroFairness);
    opts.recycling = false;
    kkt::solve_with_options(s, ch, &opts)
}

fn restricted_result(s: &Scenario, alloc: Allocation, bits: Vec<f64>) -> SolverResult {
    let k = s.num_ws;
    let objective: f64 = bits.iter().sum();
    let jain = fairness::jain_index(&bits).unwrap_or(1.0);
    let original = kkt::recover_original(&alloc).expect("positive slots");
    SolverResult {
        allocation: alloc,
        original,
        bits,
        objective,
        jain,
        slack: Vec::new(),
        iterations: 1,
        trace: vec![objective],
        duals: DualState {
            regime: Regime::ZeroFairness,
            ps_cap: vec![0.0; k],
            time_budget: 0.0,
            energy: vec![0.0; k],
            freq_cap: vec![0.0; k],
            min_data: vec![0.0; k],
            rate_slack: Vec::new(),
            ps_cap_power: vec![0.0; k],
            energy_power: vec![0.0; k],
            min_data_power: vec![0.0; k],
            rate_slack_power: Vec::new(),
            tx_nonneg: vec![0.0; k],
        },
        converged: true,
    }
}
