//! Closed-form alternating solvers for the three fairness regimes.
//!
//! All regimes share one engine that alternates four block updates until the
//! objective stabilizes:
//!
//! 1. time step: slot lengths on the surface `sum t = T - eps`, found by
//!    equalizing each sensor's composite rate marginal. The marginal accounts
//!    for the fact that lengthening a sensor's own slot shortens everyone
//!    else's, which cuts the sensor's harvested energy at its saturated
//!    spending level. Prices are found by nested bisection (both the
//!    per-sensor marginal and the budget sum are strictly monotone).
//! 2. PS step: the power station always radiates at full power, so its slot
//!    energy is pinned to `P_max t_k`.
//! 3. frequency step: CPU frequency balances the local-computing marginal
//!    `T/C` against the offloading value of the energy it burns, clipped to
//!    the hardware cap and the energy budget.
//! 4. power step: offload energies saturate energy causality; the recycling
//!    coupling between sensors is resolved by Gauss-Seidel sweeps.
//!
//! The zero-fairness regime weights every sensor equally, the common-fairness
//! regime weights marginals by the utility derivative of the current rate,
//! and the max-min regime replaces price equalization with rate equalization.

pub mod kernel;

pub use kernel::{f_t, f_t_inverse, lambert_w0};

use crate::error::{Error, InfeasibilityReport};
use crate::fairness::{self, FairnessParam};
use crate::physics::{
    self, Allocation, OriginalAllocation,
};
use crate::scenario::{ChannelRealization, Scenario};

const LN2: f64 = std::f64::consts::LN_2;

/// Which objective the engine maximizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// Sum of rates (throughput maximization).
    ZeroFairness,
    /// Sum of alpha-fair utilities, finite alpha > 0.
    CommonFairness(f64),
    /// Smallest rate.
    MaxMin,
}

impl Regime {
    /// Marginal-utility weight used in the time step.
    fn weight(&self, bits: f64) -> f64 {
        match self {
            Regime::ZeroFairness => 1.0,
            Regime::CommonFairness(a) => bits.max(1e-300).powf(-a),
            Regime::MaxMin => 1.0,
        }
    }
}

/// Lagrange multipliers recovered at convergence, one entry per constraint
/// family. The same structure serves all three regimes; vectors that a regime
/// does not use are empty.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub regime: Regime,
    /// Time/frequency step: per-slot PS energy cap (coupling price).
    pub ps_cap: Vec<f64>,
    /// Time/frequency step: shared time budget price; positive at optimum.
    pub time_budget: f64,
    /// Time/frequency step: energy causality price [bit/J].
    pub energy: Vec<f64>,
    /// Time/frequency step: CPU frequency cap.
    pub freq_cap: Vec<f64>,
    /// Time/frequency step: minimum-data constraint.
    pub min_data: Vec<f64>,
    /// Time/frequency step: rate-slack link (utility epigraph); sums to 1 in
    /// the max-min regime.
    pub rate_slack: Vec<f64>,
    /// Power step: per-slot PS energy cap (equals the PS nonnegativity
    /// multiplier by stationarity, so both are stored once).
    pub ps_cap_power: Vec<f64>,
    /// Power step: energy causality price [bit/J].
    pub energy_power: Vec<f64>,
    /// Power step: minimum-data constraint.
    pub min_data_power: Vec<f64>,
    /// Power step: rate-slack link; sums to 1 in the max-min regime.
    pub rate_slack_power: Vec<f64>,
    /// Power step: offload-energy nonnegativity.
    pub tx_nonneg: Vec<f64>,
}

/// Converged output of one solver run.
#[derive(Debug, Clone)]
pub struct SolverResult {
    /// Substituted-variable allocation (energies per slot).
    pub allocation: Allocation,
    /// Original-variable allocation (powers per slot).
    pub original: OriginalAllocation,
    /// Per-sensor computed bits.
    pub bits: Vec<f64>,
    /// Objective value in the solved regime.
    pub objective: f64,
    /// Jain's fairness index of `bits`.
    pub jain: f64,
    /// Regime slack: per-sensor rate slack for common fairness, the common
    /// rate floor (single entry) for max-min, empty for zero fairness.
    pub slack: Vec<f64>,
    /// Outer iterations executed.
    pub iterations: usize,
    /// Objective after each outer iteration; non-decreasing.
    pub trace: Vec<f64>,
    pub duals: DualState,
    pub converged: bool,
}

/// Engine configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub regime: Regime,
    /// Include peer energy recycling in the harvest model.
    pub recycling: bool,
    /// Pin CPU frequencies to zero (offload-only operation).
    pub force_zero_freq: bool,
    pub max_outer: usize,
    /// Relative objective change below which (over two consecutive outer
    /// iterations) the run counts as converged.
    pub rel_tol: f64,
    /// Run the minimum-data feasibility pre-solve before the main loop.
    pub precheck: bool,
}

impl SolveOptions {
    pub fn for_regime(regime: Regime) -> Self {
        SolveOptions {
            regime,
            recycling: true,
            force_zero_freq: false,
            max_outer: 200,
            rel_tol: 1e-6,
            precheck: true,
        }
    }
}

/// Throughput-maximizing solve (alpha = 0).
pub fn solve_zfba(s: &Scenario, ch: &ChannelRealization) -> Result<SolverResult, Error> {
    solve_with_options(s, ch, &SolveOptions::for_regime(Regime::ZeroFairness))
}

/// Alpha-fair solve for finite alpha > 0.
pub fn solve_cfba(s: &Scenario, ch: &ChannelRealization, alpha: f64) -> Result<SolverResult, Error> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::domain("solve_cfba", format!("requires finite alpha > 0, got {alpha}")));
    }
    solve_with_options(s, ch, &SolveOptions::for_regime(Regime::CommonFairness(alpha)))
}

/// Max-min fair solve.
pub fn solve_mfba(s: &Scenario, ch: &ChannelRealization) -> Result<SolverResult, Error> {
    solve_with_options(s, ch, &SolveOptions::for_regime(Regime::MaxMin))
}

/// Map original-variable powers back from slot energies.
pub fn recover_original(a: &Allocation) -> Result<OriginalAllocation, Error> {
    let k = a.t.len();
    let mut ps_power = vec![0.0; k];
    let mut tx_power = vec![0.0; k];
    for i in 0..k {
        if a.t[i] > 0.0 {
            ps_power[i] = a.ps_energy[i] / a.t[i];
            tx_power[i] = a.tx_energy[i] / a.t[i];
        } else if a.ps_energy[i] > 0.0 || a.tx_energy[i] > 0.0 {
            return Err(Error::InfeasibleAllocation(format!(
                "slot {i} carries energy but has zero length"
            )));
        }
    }
    Ok(OriginalAllocation {
        t: a.t.clone(),
        ps_power,
        tx_power,
        cpu_freq: a.cpu_freq.clone(),
    })
}

/// Smallest slot length considered by the scalar searches, relative to the
/// budget.
const T_EPS_REL: f64 = 1e-12;

/// Full solve with explicit options; the regime entry points wrap this.
pub fn solve_with_options(
    s: &Scenario,
    ch: &ChannelRealization,
    opts: &SolveOptions,
) -> Result<SolverResult, Error> {
    s.ensure_valid()?;
    let mut eng = Engine::new(s, ch, opts)?;
    if opts.precheck && s.min_data.iter().any(|r| *r > 0.0) {
        eng.precheck()?;
    }
    eng.run()
}

/// Mutable solver state plus precomputed channel constants.
#[derive(Clone)]
struct Engine<'a> {
    s: &'a Scenario,
    opts: &'a SolveOptions,
    budget: f64,
    /// Post-combining AP gain over noise power [s/J]: slot SNR = snr_gain *
    /// tx_energy / t.
    snr_gain: Vec<f64>,
    /// Harvest per second of peer slot time from the PS at full power [J/s].
    harvest_rate: Vec<f64>,
    /// recycle[i][k]: joules landing at sensor k per joule sensor i radiates.
    recycle: Vec<Vec<f64>>,
    /// Local bits per hertz of CPU frequency.
    local_per_hz: Vec<f64>,
    // state
    t: Vec<f64>,
    ps: Vec<f64>,
    tx: Vec<f64>,
    freq: Vec<f64>,
    /// Local-computing energy per sensor at the current frequency [J].
    e_lc: Vec<f64>,
    /// Recycled energy per sensor at the current peer spending [J].
    rec: Vec<f64>,
    bits: Vec<f64>,
    /// Whether the minimum-data floor pinned each slot in the last time step.
    floor_active: Vec<bool>,
    /// Last time-step equalization level (price or common rate).
    level: f64,
}

impl<'a> Engine<'a> {
    fn new(s: &'a Scenario, ch: &ChannelRealization, opts: &'a SolveOptions) -> Result<Self, Error> {
        let k = s.num_ws;
        let mut snr_gain = Vec::with_capacity(k);
        for i in 0..k {
            let bf = physics::mrc_beamformer(ch, i)?;
            snr_gain.push(bf.effective_gain / s.noise_power);
        }
        let harvest_rate: Vec<f64> = (0..k)
            .map(|i| s.eh_efficiency * s.ps_power_max * ch.ps_gain(i))
            .collect();
        let recycle: Vec<Vec<f64>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if i == j || !opts.recycling {
                            0.0
                        } else {
                            s.eh_efficiency * ch.ws_gain(i, j)
                        }
                    })
                    .collect()
            })
            .collect();
        let local_per_hz: Vec<f64> =
            (0..k).map(|i| s.frame_duration / s.cycles_per_bit[i]).collect();

        let budget = s.slot_budget();
        let t = vec![budget / k as f64; k];
        let ps: Vec<f64> = t.iter().map(|ti| s.ps_power_max * ti).collect();
        let freq: Vec<f64> = if opts.force_zero_freq {
            vec![0.0; k]
        } else {
            s.cpu_freq_max.iter().map(|f| f / 2.0).collect()
        };
        let e_lc: Vec<f64> =
            (0..k).map(|i| physics::local_energy(s, freq[i], i)).collect();
        // conservative spending start: half the PS harvest, no recycling yet
        let tx: Vec<f64> = (0..k)
            .map(|i| (0.5 * (harvest_rate[i] * (budget - t[i]) - e_lc[i])).max(0.0))
            .collect();

        let mut eng = Engine {
            s,
            opts,
            budget,
            snr_gain,
            harvest_rate,
            recycle,
            local_per_hz,
            t,
            ps,
            tx,
            freq,
            e_lc,
            rec: vec![0.0; k],
            bits: vec![0.0; k],
            floor_active: vec![false; k],
            level: 0.0,
        };
        eng.refresh_recycled();
        eng.refresh_bits();
        Ok(eng)
    }

    fn k(&self) -> usize {
        self.s.num_ws
    }

    fn t_eps(&self) -> f64 {
        T_EPS_REL * self.budget
    }

    fn refresh_recycled(&mut self) {
        for k in 0..self.k() {
            self.rec[k] = (0..self.k()).map(|i| self.recycle[i][k] * self.tx[i]).sum();
        }
    }

    fn refresh_bits(&mut self) {
        for k in 0..self.k() {
            self.bits[k] = self.local_per_hz[k] * self.freq[k] + self.offload_bits(k, self.t[k], self.tx[k]);
        }
    }

    fn offload_bits(&self, k: usize, t: f64, e: f64) -> f64 {
        if t <= 0.0 || e <= 0.0 {
            return 0.0;
        }
        t * self.s.bandwidth * (self.snr_gain[k] * e / t).ln_1p() / LN2
    }

    /// Offload energy available to sensor k if its slot has length `t` and it
    /// saturates energy causality (peer recycling lagged).
    fn tx_budget_at(&self, k: usize, t: f64) -> f64 {
        (self.harvest_rate[k] * (self.budget - t) + self.rec[k] - self.e_lc[k]).max(0.0)
    }

    /// Total bits of sensor k as a function of its own slot length, with the
    /// offload energy saturated.
    fn bits_at(&self, k: usize, t: f64) -> f64 {
        self.local_per_hz[k] * self.freq[k] + self.offload_bits(k, t, self.tx_budget_at(k, t))
    }

    /// Marginal value of offload energy for sensor k [bit/J].
    fn energy_marginal(&self, k: usize, t: f64, e: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let c = self.snr_gain[k];
        self.s.bandwidth * c * t / (LN2 * (t + c * e))
    }

    /// Composite rate marginal of sensor k's slot length on the full-budget
    /// surface: the direct slot gain minus the own-harvest loss.
    fn rate_marginal(&self, k: usize, t: f64) -> f64 {
        let e = self.tx_budget_at(k, t);
        if e <= 0.0 {
            // beyond the spend-exhaustion point the rate only shrinks
            return -self.s.bandwidth;
        }
        let x = self.snr_gain[k] * e / t;
        self.s.bandwidth * f_t(x) - self.harvest_rate[k] * self.energy_marginal(k, t, e)
    }

    /// Slot length where sensor k's composite marginal crosses zero; its
    /// saturated rate is increasing below and decreasing above.
    fn zero_marginal_slot(&self, k: usize) -> f64 {
        let lo = self.t_eps();
        if self.rate_marginal(k, lo) <= 0.0 {
            return lo;
        }
        if self.rate_marginal(k, self.budget) > 0.0 {
            return self.budget;
        }
        let (mut lo, mut hi) = (lo, self.budget);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.rate_marginal(k, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Utility-weighted marginal used by the price-driven time step.
    fn weighted_marginal(&self, k: usize, t: f64) -> f64 {
        let m = self.rate_marginal(k, t);
        if m <= 0.0 {
            return m;
        }
        self.opts.regime.weight(self.bits_at(k, t)) * m
    }

    /// Slot length at which sensor k's weighted marginal equals `price`.
    fn slot_for_price(&self, k: usize, price: f64, t_star: f64) -> f64 {
        let lo0 = self.t_eps();
        if self.weighted_marginal(k, lo0) <= price {
            return lo0;
        }
        if self.weighted_marginal(k, t_star) >= price {
            return t_star;
        }
        let (mut lo, mut hi) = (lo0, t_star);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.weighted_marginal(k, mid) > price {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Smallest slot length reaching `target` bits, with the saturation flag
    /// set when even the zero-marginal slot falls short.
    fn slot_for_target(&self, k: usize, target: f64, t_star: f64) -> (f64, bool) {
        if self.bits_at(k, self.t_eps()) >= target {
            return (0.0, false);
        }
        if self.bits_at(k, t_star) < target {
            return (t_star, true);
        }
        let (mut lo, mut hi) = (self.t_eps(), t_star);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.bits_at(k, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (0.5 * (lo + hi), false)
    }

    /// Minimum slot lengths implied by the minimum-data constraints.
    fn floor_slots(&self, t_star: &[f64]) -> Vec<f64> {
        (0..self.k())
            .map(|k| {
                if self.s.min_data[k] <= 0.0 {
                    0.0
                } else {
                    self.slot_for_target(k, self.s.min_data[k], t_star[k]).0
                }
            })
            .collect()
    }

    /// Price-driven time step (zero and common fairness): bisect the shared
    /// time price until the slots fill the budget, then rescale exactly.
    fn time_step_price(&mut self) -> Result<(), Error> {
        let k = self.k();
        self.refresh_recycled();
        if k == 1 {
            self.t[0] = self.budget;
            self.floor_active[0] = false;
            self.level = 0.0;
            return Ok(());
        }
        let t_star: Vec<f64> = (0..k).map(|i| self.zero_marginal_slot(i)).collect();
        let floors = self.floor_slots(&t_star);
        let floor_sum: f64 = floors.iter().sum();
        if floor_sum > self.budget * (1.0 + 1e-9) {
            return Err(Error::NonConvergence(
                "minimum-data slot floors exceed the time budget".into(),
            ));
        }

        let slots_at = |eng: &Self, price: f64| -> Vec<f64> {
            (0..k)
                .map(|i| eng.slot_for_price(i, price, t_star[i]).max(floors[i]))
                .collect()
        };
        let mut hi = (0..k)
            .map(|i| self.weighted_marginal(i, self.t_eps()))
            .fold(0.0f64, f64::max)
            .max(1e-300);
        let mut lo = 0.0;
        // price 0 pushes every slot to its zero-marginal point; the sum there
        // exceeds the budget in any non-degenerate instance
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let sum: f64 = slots_at(self, mid).iter().sum();
            if sum > self.budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-15 * hi {
                break;
            }
        }
        let price = 0.5 * (lo + hi);
        let mut t = slots_at(self, price);
        let sum: f64 = t.iter().sum();
        if sum > 0.0 {
            let scale = self.budget / sum;
            for x in t.iter_mut() {
                *x *= scale;
            }
        } else {
            t = vec![self.budget / k as f64; k];
        }
        for i in 0..k {
            self.floor_active[i] = floors[i] > 0.0 && t[i] <= floors[i] * (1.0 + 1e-9);
        }
        self.level = price;
        self.t = t;
        Ok(())
    }

    /// Equalizing time step (max-min): bisect the common rate target until
    /// the required slots fill the budget. Targets are floored per sensor by
    /// the minimum-data demand.
    fn time_step_equalize(&mut self) -> Result<(), Error> {
        let k = self.k();
        self.refresh_recycled();
        if k == 1 {
            self.t[0] = self.budget;
            self.floor_active[0] = false;
            self.level = self.bits_at(0, self.budget);
            return Ok(());
        }
        let t_star: Vec<f64> = (0..k).map(|i| self.zero_marginal_slot(i)).collect();
        let cap = (0..k)
            .map(|i| self.bits_at(i, t_star[i]))
            .fold(f64::INFINITY, f64::min);
        let need_total = |eng: &Self, gamma: f64| -> f64 {
            (0..k)
                .map(|i| {
                    let target = gamma.max(eng.s.min_data[i]);
                    eng.slot_for_target(i, target, t_star[i]).0
                })
                .sum()
        };
        if need_total(self, 0.0) > self.budget * (1.0 + 1e-9) {
            return Err(Error::NonConvergence(
                "minimum-data slot floors exceed the time budget".into(),
            ));
        }
        let (mut lo, mut hi) = (0.0, cap);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if need_total(self, mid) < self.budget {
                lo = mid;
            } else {
                hi = mid;
            }
            if (hi - lo) <= 1e-15 * hi.max(1.0) {
                break;
            }
        }
        let gamma = lo;
        let mut t: Vec<f64> = (0..k)
            .map(|i| {
                let target = gamma.max(self.s.min_data[i]);
                self.slot_for_target(i, target, t_star[i]).0
            })
            .collect();
        let sum: f64 = t.iter().sum();
        if sum > 0.0 {
            let scale = self.budget / sum;
            for x in t.iter_mut() {
                *x *= scale;
            }
        } else {
            t = vec![self.budget / k as f64; k];
        }
        for i in 0..k {
            self.floor_active[i] = self.s.min_data[i] > gamma;
        }
        self.level = gamma;
        self.t = t;
        Ok(())
    }

    /// PS step: full-power radiation in every slot.
    fn ps_step(&mut self) {
        for i in 0..self.k() {
            self.ps[i] = self.s.ps_power_max * self.t[i];
        }
    }

    /// Frequency step: balance the local-computing marginal against the
    /// offloading value of the energy burned, then clip to the hardware cap
    /// and the harvested budget.
    fn freq_step(&mut self) {
        if self.opts.force_zero_freq {
            return;
        }
        let s = self.s;
        for k in 0..self.k() {
            let value = self.energy_marginal(k, self.t[k], self.tx[k]);
            let stationary = if value > 0.0 {
                (1.0 / (3.0 * s.cycles_per_bit[k] * s.switched_capacitance[k] * value)).sqrt()
            } else {
                f64::INFINITY
            };
            let ps_in: f64 = (0..self.k())
                .filter(|i| *i != k)
                .map(|i| s.eh_efficiency * self.ps[i])
                .sum::<f64>()
                * (self.harvest_rate[k] / (s.eh_efficiency * s.ps_power_max)).max(0.0);
            let intake = ps_in + self.rec[k];
            let energy_cap = if intake > 0.0 {
                (intake / (s.frame_duration * s.switched_capacitance[k])).cbrt()
            } else {
                0.0
            };
            self.freq[k] = s.cpu_freq_max[k].min(stationary).min(energy_cap);
            self.e_lc[k] = physics::local_energy(s, self.freq[k], k);
        }
    }

    /// Power step: saturate energy causality, sweeping in sensor order until
    /// the recycling coupling settles.
    fn tx_step(&mut self) {
        let k = self.k();
        let ps_in: Vec<f64> = (0..k)
            .map(|j| {
                let gain = self.harvest_rate[j] / self.s.ps_power_max;
                (0..k).filter(|i| *i != j).map(|i| gain * self.ps[i]).sum()
            })
            .collect();
        for _ in 0..2000 {
            let mut delta = 0.0f64;
            for j in 0..k {
                let recycled: f64 = (0..k).map(|i| self.recycle[i][j] * self.tx[i]).sum();
                let next = (ps_in[j] + recycled - self.e_lc[j]).max(0.0);
                delta = delta.max((next - self.tx[j]).abs());
                self.tx[j] = next;
            }
            let scale: f64 = self.tx.iter().fold(1e-300, |a, b| a.max(*b));
            if delta <= 1e-14 * scale {
                break;
            }
        }
        self.refresh_recycled();
    }

    fn objective(&self) -> Result<f64, Error> {
        match self.opts.regime {
            Regime::ZeroFairness => Ok(self.bits.iter().sum()),
            Regime::CommonFairness(a) => {
                let mut sum = 0.0;
                for b in &self.bits {
                    sum += fairness::utility(FairnessParam::Alpha(a), *b)?;
                }
                Ok(sum)
            }
            Regime::MaxMin => {
                Ok(self.bits.iter().fold(f64::INFINITY, |m, b| m.min(*b)))
            }
        }
    }

    fn outer_iteration(&mut self) -> Result<f64, Error> {
        match self.opts.regime {
            Regime::MaxMin => self.time_step_equalize()?,
            _ => self.time_step_price()?,
        }
        self.ps_step();
        self.freq_step();
        self.tx_step();
        self.refresh_bits();
        self.objective()
    }

    /// Minimum-data feasibility pre-solve: equalize the shifted rates
    /// `bits_k - min_data_k` and demand a nonnegative common level.
    fn precheck(&mut self) -> Result<(), Error> {
        let mut probe = self.clone();
        let k = probe.k();
        let mut shift_level = f64::NEG_INFINITY;
        for _ in 0..40 {
            probe.refresh_recycled();
            if k == 1 {
                probe.t[0] = probe.budget;
            } else {
                let t_star: Vec<f64> = (0..k).map(|i| probe.zero_marginal_slot(i)).collect();
                let cap = (0..k)
                    .map(|i| probe.bits_at(i, t_star[i]) - probe.s.min_data[i])
                    .fold(f64::INFINITY, f64::min);
                let top = probe.s.min_data.iter().fold(0.0f64, |a, b| a.max(*b));
                let need_total = |eng: &Engine, gamma: f64| -> f64 {
                    (0..k)
                        .map(|i| {
                            eng.slot_for_target(i, gamma + eng.s.min_data[i], t_star[i]).0
                        })
                        .sum()
                };
                let (mut lo, mut hi) = (-top, cap);
                for _ in 0..120 {
                    let mid = 0.5 * (lo + hi);
                    if need_total(&probe, mid) < probe.budget {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                shift_level = lo;
                for i in 0..k {
                    probe.t[i] = probe
                        .slot_for_target(i, shift_level + probe.s.min_data[i], t_star[i])
                        .0;
                }
                let sum: f64 = probe.t.iter().sum();
                if sum > 0.0 {
                    let scale = probe.budget / sum;
                    for x in probe.t.iter_mut() {
                        *x *= scale;
                    }
                }
            }
            probe.ps_step();
            probe.freq_step();
            probe.tx_step();
            probe.refresh_bits();
            if k == 1 {
                shift_level = probe.bits[0] - probe.s.min_data[0];
            }
        }
        let scale = probe.s.min_data.iter().fold(1.0f64, |a, b| a.max(*b));
        if shift_level < -1e-6 * scale {
            let binding = (0..k)
                .map(|i| (i, probe.bits[i] - probe.s.min_data[i]))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            return Err(Error::Infeasible(InfeasibilityReport {
                binding_ws: binding,
                required_bits: probe.s.min_data[binding],
                achievable_bits: probe.s.min_data[binding] + shift_level,
            }));
        }
        Ok(())
    }

    fn run(mut self) -> Result<SolverResult, Error> {
        let mut trace: Vec<f64> = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        let mut prev_change = f64::INFINITY;
        for _ in 0..self.opts.max_outer {
            let snapshot = (
                self.t.clone(),
                self.ps.clone(),
                self.tx.clone(),
                self.freq.clone(),
                self.e_lc.clone(),
                self.bits.clone(),
            );
            let obj = self.outer_iteration()?;
            iterations += 1;
            if let Some(&prev) = trace.last() {
                if obj < prev - 1e-12 * prev.abs() {
                    // alternation fixed point reached; keep the better iterate
                    (self.t, self.ps, self.tx, self.freq, self.e_lc, self.bits) = snapshot;
                    converged = true;
                    break;
                }
                let change = (obj - prev).abs() / prev.abs().max(1e-12);
                trace.push(obj.max(prev));
                if change < self.opts.rel_tol && prev_change < self.opts.rel_tol {
                    converged = true;
                    break;
                }
                prev_change = change;
            } else {
                trace.push(obj);
            }
        }

        let allocation = Allocation {
            t: self.t.clone(),
            ps_energy: self.ps.clone(),
            tx_energy: self.tx.clone(),
            cpu_freq: self.freq.clone(),
        };
        let original = recover_original(&allocation)?;
        let objective = self.objective()?;
        let jain = fairness::jain_index(&self.bits)?;
        let slack = match self.opts.regime {
            Regime::ZeroFairness => Vec::new(),
            Regime::CommonFairness(_) => self.bits.clone(),
            Regime::MaxMin => vec![self.bits.iter().fold(f64::INFINITY, |m, b| m.min(*b))],
        };
        let duals = self.recover_duals();
        Ok(SolverResult {
            allocation,
            original,
            bits: self.bits.clone(),
            objective,
            jain,
            slack,
            iterations,
            trace,
            duals,
            converged,
        })
    }

    /// Reconstruct a consistent multiplier set from the converged primals.
    fn recover_duals(&self) -> DualState {
        let k = self.k();
        let s = self.s;
        // energy price per sensor: marginal offloading value of one joule
        let rho: Vec<f64> =
            (0..k).map(|i| self.energy_marginal(i, self.t[i], self.tx[i])).collect();
        // per-sensor utility weights implied by the regime
        let weight: Vec<f64> = match self.opts.regime {
            Regime::ZeroFairness => vec![1.0; k],
            Regime::CommonFairness(a) => {
                self.bits.iter().map(|b| b.max(1e-300).powf(-a)).collect()
            }
            Regime::MaxMin => {
                // weights equalize the composite marginals and sum to 1
                let raw: Vec<f64> = (0..k)
                    .map(|i| {
                        let m = self.rate_marginal(i, self.t[i]);
                        if m > 0.0 {
                            1.0 / m
                        } else {
                            0.0
                        }
                    })
                    .collect();
                let sum: f64 = raw.iter().sum();
                if sum > 0.0 {
                    raw.iter().map(|w| w / sum).collect()
                } else {
                    vec![1.0 / k as f64; k]
                }
            }
        };
        let energy: Vec<f64> = (0..k).map(|i| weight[i] * rho[i]).collect();
        let ps_cap: Vec<f64> = (0..k)
            .map(|i| {
                (0..k)
                    .filter(|j| *j != i)
                    .map(|j| energy[j] * s.eh_efficiency * self.harvest_rate[j]
                        / (s.eh_efficiency * s.ps_power_max))
                    .sum()
            })
            .collect();
        // shared time price consistent with the slot stationarity conditions
        let stationary: Vec<f64> = (0..k)
            .map(|i| {
                let x = if self.t[i] > 0.0 && self.tx[i] > 0.0 {
                    self.snr_gain[i] * self.tx[i] / self.t[i]
                } else {
                    0.0
                };
                weight[i] * s.bandwidth * f_t(x) + ps_cap[i] * s.ps_power_max
            })
            .collect();
        let active: Vec<usize> = (0..k).filter(|i| !self.floor_active[*i]).collect();
        let time_budget = if active.is_empty() {
            stationary.iter().sum::<f64>() / k as f64
        } else {
            active.iter().map(|i| stationary[*i]).sum::<f64>() / active.len() as f64
        };
        // minimum-data multipliers absorb the gap for floored slots
        let mut min_data = vec![0.0; k];
        let mut rate_slack = vec![0.0; k];
        for i in 0..k {
            let x = if self.t[i] > 0.0 && self.tx[i] > 0.0 {
                self.snr_gain[i] * self.tx[i] / self.t[i]
            } else {
                0.0
            };
            let ft = s.bandwidth * f_t(x);
            match self.opts.regime {
                Regime::ZeroFairness => {
                    if self.floor_active[i] && ft > 0.0 {
                        min_data[i] = ((time_budget - ps_cap[i] * s.ps_power_max) / ft - 1.0)
                            .max(0.0);
                    }
                }
                Regime::CommonFairness(_) => {
                    rate_slack[i] = weight[i];
                    if self.floor_active[i] && ft > 0.0 {
                        let needed = (time_budget - ps_cap[i] * s.ps_power_max) / ft;
                        if needed > weight[i] {
                            rate_slack[i] = needed;
                            min_data[i] = needed - weight[i];
                        }
                    }
                }
                Regime::MaxMin => {
                    rate_slack[i] = weight[i];
                    if self.floor_active[i] && ft > 0.0 {
                        let needed = (time_budget - ps_cap[i] * s.ps_power_max) / ft;
                        if needed > weight[i] {
                            min_data[i] = needed - weight[i];
                        }
                    }
                }
            }
        }
        // frequency-cap multiplier from the frequency stationarity condition
        let freq_cap: Vec<f64> = (0..k)
            .map(|i| {
                let lead = match self.opts.regime {
                    Regime::ZeroFairness => 1.0 + min_data[i],
                    Regime::CommonFairness(_) => rate_slack[i],
                    Regime::MaxMin => min_data[i] + rate_slack[i],
                };
                (lead * s.frame_duration / s.cycles_per_bit[i]
                    - 3.0 * energy[i]
                        * s.frame_duration
                        * s.switched_capacitance[i]
                        * self.freq[i]
                        * self.freq[i])
                    .max(0.0)
            })
            .collect();
        // power-step family: stationarity pins the energy price to the
        // offloading marginal; cap and sign multipliers vanish
        let energy_power = rho.clone();
        let (min_data_power, rate_slack_power) = match self.opts.regime {
            Regime::ZeroFairness => (vec![0.0; k], Vec::new()),
            Regime::CommonFairness(_) => (vec![0.0; k], weight.clone()),
            Regime::MaxMin => (vec![0.0; k], weight.clone()),
        };
        let energy_power = match self.opts.regime {
            Regime::ZeroFairness => energy_power,
            _ => (0..k).map(|i| weight[i] * rho[i]).collect(),
        };
        DualState {
            regime: self.opts.regime,
            ps_cap,
            time_budget,
            energy,
            freq_cap,
            min_data,
            rate_slack: match self.opts.regime {
                Regime::ZeroFairness => Vec::new(),
                _ => rate_slack,
            },
            ps_cap_power: vec![0.0; k],
            energy_power,
            min_data_power,
            rate_slack_power,
            tx_nonneg: vec![0.0; k],
        }
    }
}

/// Scaled residuals of the stationarity conditions at a converged result,
/// one entry per condition instance. All entries should be small.
pub fn kkt_residuals(s: &Scenario, ch: &ChannelRealization, res: &SolverResult) -> Vec<f64> {
    let k = s.num_ws;
    let d = &res.duals;
    let mut out = Vec::new();
    for i in 0..k {
        let gain = ch.ap_gain(i) / s.noise_power;
        let (t, e, f) = (res.allocation.t[i], res.allocation.tx_energy[i], res.allocation.cpu_freq[i]);
        let x = if t > 0.0 { gain * e / t } else { 0.0 };
        let ft = s.bandwidth * f_t(x);
        let rho = if t > 0.0 { s.bandwidth * gain * t / (LN2 * (t + gain * e)) } else { 0.0 };
        let (lead_t, lead_p) = match d.regime {
            Regime::ZeroFairness => (1.0 + d.min_data[i], 1.0 + d.min_data_power[i]),
            Regime::CommonFairness(_) => (d.rate_slack[i], d.rate_slack_power[i]),
            Regime::MaxMin => (d.min_data[i] + d.rate_slack[i], d.min_data_power[i] + d.rate_slack_power[i]),
        };
        // slot-length stationarity
        let r_t = lead_t * ft + d.ps_cap[i] * s.ps_power_max - d.time_budget;
        out.push(r_t.abs() / d.time_budget.max(1e-300));
        // frequency stationarity (complementary slackness at the cap)
        let lc = lead_t * s.frame_duration / s.cycles_per_bit[i];
        let r_f = lc
            - 3.0 * d.energy[i] * s.frame_duration * s.switched_capacitance[i] * f * f
            - d.freq_cap[i];
        out.push(r_f.abs() / lc.max(1e-300));
        // offload-energy stationarity
        if e > 0.0 {
            let r_p = lead_p * rho - d.energy_power[i] + d.tx_nonneg[i];
            out.push(r_p.abs() / d.energy_power[i].max(1e-300));
        }
        // utility / epigraph slack links
        if let Regime::CommonFairness(a) = d.regime {
            let u = res.bits[i].max(1e-300).powf(-a);
            let r_chi = u + d.min_data[i] - d.rate_slack[i];
            out.push(r_chi.abs() / d.rate_slack[i].max(1e-300));
            let r_chi_p = u + d.min_data_power[i] - d.rate_slack_power[i];
            out.push(r_chi_p.abs() / d.rate_slack_power[i].max(1e-300));
        }
    }
    if matches!(d.regime, Regime::MaxMin) {
        let sum_t: f64 = d.rate_slack.iter().sum();
        let sum_p: f64 = d.rate_slack_power.iter().sum();
        out.push((1.0 - sum_t).abs());
        out.push((1.0 - sum_p).abs());
    }
    out
}

/// Literal time/frequency update for the zero-fairness regime with the power
/// variables held fixed: the shared time price is bisected until the slots
/// fill the budget, then frequencies follow their stationarity condition.
pub fn zfba_time_freq_step(
    s: &Scenario,
    ch: &ChannelRealization,
    tx_energy: &[f64],
    duals: &DualState,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let k = s.num_ws;
    let budget = s.slot_budget();
    let slot = |i: usize, price: f64| -> Result<f64, Error> {
        if tx_energy[i] <= 0.0 {
            return Ok(0.0);
        }
        let y = (price - duals.ps_cap[i] * s.ps_power_max)
            / ((1.0 + duals.min_data[i]) * s.bandwidth);
        if y <= 0.0 {
            return Err(Error::DualInfeasible(format!(
                "time price {price} not above the PS coupling level of WS {i}"
            )));
        }
        let x = f_t_inverse(y);
        Ok(tx_energy[i] * ch.ap_gain(i) / (s.noise_power * x))
    };
    let total = |price: f64| -> Result<f64, Error> {
        let mut sum = 0.0;
        for i in 0..k {
            sum += slot(i, price)?;
        }
        Ok(sum)
    };
    let floor = (0..k)
        .map(|i| duals.ps_cap[i] * s.ps_power_max)
        .fold(0.0f64, f64::max);
    let mut lo = floor + 1e-12 * floor.max(1.0);
    let mut hi = lo;
    while total(hi)? > budget {
        hi = floor + (hi - floor) * 2.0 + 1.0;
        if hi > 1e18 {
            return Err(Error::DualInfeasible("time price bracket exhausted".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid)? > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let price = 0.5 * (lo + hi);
    let mut t: Vec<f64> = (0..k).map(|i| slot(i, price)).collect::<Result<_, _>>()?;
    let sum: f64 = t.iter().sum();
    if sum > 0.0 {
        let scale = budget / sum;
        for x in t.iter_mut() {
            *x *= scale;
        }
    }

    let f: Vec<f64> = (0..k)
        .map(|i| {
            if duals.energy[i] <= 0.0 {
                // no energy pressure: the cap's complementary slackness pins
                // the frequency at its maximum
                return s.cpu_freq_max[i];
            }
            let num = (1.0 + duals.min_data[i]) * s.frame_duration / s.cycles_per_bit[i]
                - duals.freq_cap[i];
            if num <= 0.0 {
                return 0.0;
            }
            let val = (num
                / (3.0 * duals.energy[i] * s.frame_duration * s.switched_capacitance[i]))
                .sqrt();
            val.min(s.cpu_freq_max[i])
        })
        .collect();
    Ok((t, f))
}

/// Literal power update for the zero-fairness regime with time and frequency
/// fixed: the PS saturates its cap, and each offload energy follows its
/// stationarity form clipped by energy causality, swept in sensor order until
/// the recycling coupling settles.
pub fn zfba_power_step(
    s: &Scenario,
    ch: &ChannelRealization,
    t: &[f64],
    freq: &[f64],
    duals: &DualState,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let k = s.num_ws;
    let ps: Vec<f64> = (0..k).map(|i| s.ps_power_max * t[i]).collect();
    let mut tx = vec![0.0; k];
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for j in 0..k {
            let spread = duals.energy_power[j] - duals.tx_nonneg[j];
            let unconstrained = if t[j] <= 0.0 {
                0.0
            } else {
                if spread <= 0.0 {
                    return Err(Error::DualInfeasible(format!(
                        "energy price of WS {j} not above its sign multiplier"
                    )));
                }
                ((1.0 + duals.min_data_power[j]) * s.bandwidth * t[j] / (LN2 * spread)
                    - t[j] * s.noise_power / ch.ap_gain(j))
                .max(0.0)
            };
            let mut cap = -physics::local_energy(s, freq[j], j);
            for i in 0..k {
                if i != j {
                    cap += s.eh_efficiency * (ps[i] * ch.ps_gain(j) + tx[i] * ch.ws_gain(i, j));
                }
            }
            let next = unconstrained.min(cap.max(0.0));
            delta = delta.max((next - tx[j]).abs());
            tx[j] = next;
        }
        if delta <= 1e-16 {
            break;
        }
    }
    Ok((ps, tx))
}
