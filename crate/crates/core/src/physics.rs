//! Physical-layer primitives: beamforming, energy harvesting, computing and
//! offloading models, and allocation feasibility checks.
//!
//! All solvers work in the substituted energy variables: `ps_energy[k]` is the
//! energy the power station radiates during slot k (power times slot length)
//! and `tx_energy[k]` is the energy sensor k spends on offloading. This keeps
//! every constraint jointly convex in `(t, ps_energy, tx_energy, cpu_freq)`.

use crate::error::Error;
use crate::scenario::{ChannelRealization, Scenario};

/// Minimal complex scalar; only what MRC combining needs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cplx {
    pub re: f64,
    pub im: f64,
}

impl Cplx {
    pub fn new(re: f64, im: f64) -> Self {
        Cplx { re, im }
    }

    pub fn conj(self) -> Self {
        Cplx { re: self.re, im: -self.im }
    }

    pub fn norm_sq(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        Cplx { re: self.re * s, im: self.im * s }
    }

    pub fn mul(self, other: Cplx) -> Self {
        Cplx {
            re: self.re * other.re - self.im * other.im,
            im: self.re * other.im + self.im * other.re,
        }
    }
}

/// One candidate solution in substituted variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// Offloading slot lengths t_k [s].
    pub t: Vec<f64>,
    /// PS radiated energy per slot [J].
    pub ps_energy: Vec<f64>,
    /// Sensor offloading energy per slot [J].
    pub tx_energy: Vec<f64>,
    /// Sensor CPU frequency, constant over the frame [Hz].
    pub cpu_freq: Vec<f64>,
}

impl Allocation {
    pub fn zeros(k: usize) -> Self {
        Allocation {
            t: vec![0.0; k],
            ps_energy: vec![0.0; k],
            tx_energy: vec![0.0; k],
            cpu_freq: vec![0.0; k],
        }
    }
}

/// Original-variable view of an allocation: per-slot powers instead of
/// energies.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginalAllocation {
    pub t: Vec<f64>,
    /// PS transmit power per slot [W].
    pub ps_power: Vec<f64>,
    /// Sensor offloading power per slot [W].
    pub tx_power: Vec<f64>,
    pub cpu_freq: Vec<f64>,
}

/// Receive beamformer for one sensor (unit-norm weight vector).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    pub weights: Vec<Cplx>,
    /// Post-combining channel power gain, equals ||g_k||^2 for MRC.
    pub effective_gain: f64,
}

/// Harvested-energy breakdown for one sensor [J].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyIntake {
    /// Energy harvested from the power station.
    pub from_ps: f64,
    /// Energy recycled from peer offloading transmissions.
    pub recycled: f64,
}

impl EnergyIntake {
    pub fn total(&self) -> f64 {
        self.from_ps + self.recycled
    }
}

/// How sensors harvest: the TDMA schedule of the joint design, or a power
/// station that radiates at full power for the whole frame with silent peers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyModel {
    /// PS active only in other sensors' slots; peer recycling optional.
    SlotTdma { recycling: bool },
    /// PS active for the entire offloading window; a sensor harvests during
    /// its own slot too and no peer energy exists.
    FullFramePs,
}

/// The joint design's energy model.
pub const DEFAULT_ENERGY_MODEL: EnergyModel = EnergyModel::SlotTdma { recycling: true };

/// Per-sensor data accounting [bit].
#[derive(Debug, Clone, PartialEq)]
pub struct DataReport {
    pub local_bits: Vec<f64>,
    pub offload_bits: Vec<f64>,
    pub total_bits: Vec<f64>,
}

/// Per-sensor energy accounting [J].
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// Harvested energy, split into PS and recycled parts.
    pub intake: Vec<EnergyIntake>,
    /// Local computing energy.
    pub local: Vec<f64>,
    /// Offloading energy (equals tx_energy).
    pub offload: Vec<f64>,
}

impl EnergyReport {
    /// Total consumed energy of sensor k.
    pub fn consumed(&self, k: usize) -> f64 {
        self.local[k] + self.offload[k]
    }
}

/// Maximum-ratio combining weights `w = g / ||g||` for sensor k.
pub fn mrc_beamformer(ch: &ChannelRealization, k: usize) -> Result<Beamformer, Error> {
    let g = &ch.g_ap[k];
    let norm_sq: f64 = g.iter().map(|c| c.norm_sq()).sum();
    if norm_sq <= 0.0 {
        return Err(Error::DegenerateChannel(k));
    }
    let inv = 1.0 / norm_sq.sqrt();
    Ok(Beamformer {
        weights: g.iter().map(|c| c.scale(inv)).collect(),
        effective_gain: norm_sq,
    })
}

/// Energy harvested by every sensor under the given model [J].
pub fn harvested_energy(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
    model: EnergyModel,
) -> Vec<EnergyIntake> {
    (0..s.num_ws).map(|k| harvested_energy_one(s, ch, alloc, model, k)).collect()
}

/// Energy harvested by sensor k under the given model [J].
pub fn harvested_energy_one(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
    model: EnergyModel,
    k: usize,
) -> EnergyIntake {
    let eta = s.eh_efficiency;
    match model {
        EnergyModel::SlotTdma { recycling } => {
            let mut from_ps = 0.0;
            let mut recycled = 0.0;
            for i in 0..s.num_ws {
                if i == k {
                    continue;
                }
                from_ps += eta * alloc.ps_energy[i] * ch.ps_gain(k);
                if recycling {
                    recycled += eta * alloc.tx_energy[i] * ch.ws_gain(i, k);
                }
            }
            EnergyIntake { from_ps, recycled }
        }
        EnergyModel::FullFramePs => EnergyIntake {
            from_ps: eta * s.ps_power_max * s.slot_budget() * ch.ps_gain(k),
            recycled: 0.0,
        },
    }
}

/// Locally computed bits and the energy they cost, per sensor.
pub fn local_data_energy(s: &Scenario, alloc: &Allocation) -> (Vec<f64>, Vec<f64>) {
    let bits = (0..s.num_ws).map(|k| local_bits(s, alloc.cpu_freq[k], k)).collect();
    let energy = (0..s.num_ws).map(|k| local_energy(s, alloc.cpu_freq[k], k)).collect();
    (bits, energy)
}

/// Bits computed locally by sensor k over the frame, `T f_k / C_k`.
pub fn local_bits(s: &Scenario, cpu_freq: f64, k: usize) -> f64 {
    s.frame_duration * cpu_freq / s.cycles_per_bit[k]
}

/// Energy spent on local computing by sensor k, `T phi_k f_k^3` [J].
pub fn local_energy(s: &Scenario, cpu_freq: f64, k: usize) -> f64 {
    s.frame_duration * s.switched_capacitance[k] * cpu_freq.powi(3)
}

/// Offloaded bits for every sensor.
pub fn offload_data(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
) -> Result<Vec<f64>, Error> {
    (0..s.num_ws)
        .map(|k| offload_bits(s, ch.ap_gain(k), alloc.t[k], alloc.tx_energy[k]))
        .collect()
}

/// Bits offloaded in a slot of length `t` spending energy `e`, after MRC
/// combining: `t B log2(1 + e ||g_k||^2 / (t delta^2))`.
///
/// The `t -> 0` limit is 0 when `e = 0`; positive energy in a zero-length
/// slot is rejected.
pub fn offload_bits(s: &Scenario, ap_gain: f64, t: f64, e: f64) -> Result<f64, Error> {
    if t < 0.0 || e < 0.0 {
        return Err(Error::domain("offload_bits", format!("negative t={t} or e={e}")));
    }
    if t == 0.0 {
        if e > 0.0 {
            return Err(Error::InfeasibleAllocation(
                "positive offload energy in a zero-length slot".into(),
            ));
        }
        return Ok(0.0);
    }
    Ok(t * s.bandwidth * (1.0 + e * ap_gain / (t * s.noise_power)).log2())
}

/// Evaluate the data and energy accounting of an allocation.
pub fn evaluate(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
    model: EnergyModel,
) -> Result<(DataReport, EnergyReport), Error> {
    let (local_bits, local) = local_data_energy(s, alloc);
    let offload_bits = offload_data(s, ch, alloc)?;
    let total_bits = local_bits
        .iter()
        .zip(&offload_bits)
        .map(|(a, b)| a + b)
        .collect();
    let intake = harvested_energy(s, ch, alloc, model);
    Ok((
        DataReport { local_bits, offload_bits, total_bits },
        EnergyReport { intake, local, offload: alloc.tx_energy.clone() },
    ))
}

/// Absolute tolerance for energy and time slack checks [J], [s].
pub const SLACK_ABS_TOL: f64 = 1e-9;
/// Relative tolerance for minimum-data checks.
pub const DATA_REL_TOL: f64 = 1e-6;

/// Check every constraint of the joint problem; returns the list of violated
/// constraints, empty iff the allocation is feasible.
pub fn feasibility(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
    model: EnergyModel,
) -> Vec<String> {
    let k = s.num_ws;
    let mut v = Vec::new();
    for (name, vec) in [
        ("t", &alloc.t),
        ("ps_energy", &alloc.ps_energy),
        ("tx_energy", &alloc.tx_energy),
        ("cpu_freq", &alloc.cpu_freq),
    ] {
        if vec.len() != k {
            return vec![format!("{name}: expected {k} entries, got {}", vec.len())];
        }
        if vec.iter().any(|x| *x < -SLACK_ABS_TOL || !x.is_finite()) {
            v.push(format!("{name}: negative or non-finite entry"));
        }
    }
    if !v.is_empty() {
        return v;
    }
    let t_sum: f64 = alloc.t.iter().sum();
    if t_sum > s.slot_budget() + SLACK_ABS_TOL {
        v.push(format!("time budget: slots sum to {t_sum}, budget {}", s.slot_budget()));
    }
    let (data, energy) = match evaluate(s, ch, alloc, model) {
        Ok(pair) => pair,
        Err(e) => return vec![format!("evaluation: {e}")],
    };
    for i in 0..k {
        if alloc.ps_energy[i] > s.ps_power_max * alloc.t[i] + SLACK_ABS_TOL {
            v.push(format!("PS power cap: slot {i} energy exceeds P_max * t"));
        }
        if alloc.cpu_freq[i] > s.cpu_freq_max[i] * (1.0 + DATA_REL_TOL) {
            v.push(format!("CPU cap: WS {i} frequency exceeds its maximum"));
        }
        let spent = energy.consumed(i);
        let harvest = energy.intake[i].total();
        if spent > harvest + SLACK_ABS_TOL {
            v.push(format!(
                "energy causality: WS {i} spends {spent:.3e} J, harvests {harvest:.3e} J"
            ));
        }
        if data.total_bits[i] < s.min_data[i] * (1.0 - DATA_REL_TOL) {
            v.push(format!(
                "minimum data: WS {i} computes {:.3} bit, demand {:.3} bit",
                data.total_bits[i], s.min_data[i]
            ));
        }
    }
    v
}

/// [`feasibility`] folded into a Result, with the evaluation on success.
pub fn check_feasible(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
    model: EnergyModel,
) -> Result<(DataReport, EnergyReport), Error> {
    let violations = feasibility(s, ch, alloc, model);
    if violations.is_empty() {
        evaluate(s, ch, alloc, model)
    } else {
        Err(Error::InfeasibleAllocation(violations.join("; ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{default_scenario, draw_channels};
    use proptest::prelude::*;

    fn two_ws_scenario() -> Scenario {
        let mut s = Scenario::generate(2, 1, 0);
        s.min_data = vec![0.0, 0.0];
        s
    }

    #[test]
    fn mrc_real_channel() {
        let s = default_scenario();
        let mut ch = draw_channels(&s, 0);
        ch.g_ap[0] =
            vec![Cplx::new(3.0, 0.0), Cplx::new(4.0, 0.0), Cplx::default(), Cplx::default()];
        let bf = mrc_beamformer(&ch, 0).unwrap();
        assert!((bf.weights[0].re - 0.6).abs() < 1e-15);
        assert!((bf.weights[1].re - 0.8).abs() < 1e-15);
        assert!((bf.effective_gain - 25.0).abs() < 1e-12);
        // unit norm, and the combined channel w^H g recovers ||g||^2
        let n: f64 = bf.weights.iter().map(|w| w.norm_sq()).sum();
        assert!((n - 1.0).abs() < 1e-14);
        let combined = bf
            .weights
            .iter()
            .zip(&ch.g_ap[0])
            .fold(Cplx::default(), |acc, (w, g)| {
                let p = w.conj().mul(*g);
                Cplx::new(acc.re + p.re, acc.im + p.im)
            });
        assert!((combined.norm_sq() - 25.0).abs() < 1e-12);
    }

    #[test]
    fn mrc_rejects_zero_channel() {
        let s = default_scenario();
        let mut ch = draw_channels(&s, 0);
        ch.g_ap[1] = vec![Cplx::default(); 4];
        assert!(matches!(mrc_beamformer(&ch, 1), Err(Error::DegenerateChannel(1))));
    }

    #[test]
    fn harvested_energy_hand_example() {
        // K = 2, eta = 0.8, first WS radiates 0.5 J PS energy in its slot and
        // spends 0.05 J offloading; |h|^2 = 0.01 and |g|^2 = 0.04 at the
        // second WS give E_EH = 0.8 (0.5 * 0.01 + 0.05 * 0.04) = 0.0056 J.
        let mut s = two_ws_scenario();
        s.eh_efficiency = 0.8;
        let mut ch = draw_channels(&s, 0);
        ch.h = vec![0.05, 0.1];
        ch.g_ws = vec![vec![0.0, 0.2], vec![0.3, 0.0]];
        let mut alloc = Allocation::zeros(2);
        alloc.t = vec![0.5, 0.5];
        alloc.ps_energy = vec![0.5, 0.0];
        alloc.tx_energy = vec![0.05, 0.0];
        let e = harvested_energy(&s, &ch, &alloc, EnergyModel::SlotTdma { recycling: true });
        assert!((e[1].total() - 0.0056).abs() < 1e-15);
        assert!((e[1].from_ps - 0.004).abs() < 1e-15);
        assert!((e[1].recycled - 0.0016).abs() < 1e-15);
        // without recycling only the PS term remains
        let en = harvested_energy(&s, &ch, &alloc, EnergyModel::SlotTdma { recycling: false });
        assert_eq!(en[1].recycled, 0.0);
        assert_eq!(en[1].from_ps, e[1].from_ps);
        // linearity: doubling all radiated energies doubles every intake
        alloc.ps_energy = vec![1.0, 0.0];
        alloc.tx_energy = vec![0.1, 0.0];
        let e2 = harvested_energy(&s, &ch, &alloc, EnergyModel::SlotTdma { recycling: true });
        assert!((e2[1].total() - 2.0 * e[1].total()).abs() < 1e-15);
    }

    #[test]
    fn full_frame_model_ignores_allocation() {
        let s = two_ws_scenario();
        let ch = draw_channels(&s, 5);
        let alloc = Allocation::zeros(2);
        let e = harvested_energy(&s, &ch, &alloc, EnergyModel::FullFramePs);
        let expected = s.eh_efficiency * s.ps_power_max * s.slot_budget() * ch.ps_gain(0);
        assert!((e[0].total() - expected).abs() < 1e-18);
    }

    #[test]
    fn offload_zero_slot_convention() {
        let s = default_scenario();
        assert_eq!(offload_bits(&s, 1.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(matches!(
            offload_bits(&s, 1.0, 0.0, 1e-6),
            Err(Error::InfeasibleAllocation(_))
        ));
    }

    #[test]
    fn offload_unit_snr() {
        // SNR of exactly 1 over a full 1 s slot at B = 1 kHz carries 1000 bit
        let s = default_scenario();
        let e = 2.0 * s.noise_power;
        let gain = 0.5;
        let bits = offload_bits(&s, gain, 1.0, e).unwrap();
        assert!((bits - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn offload_substitution_consistency() {
        // t B log2(1 + p ||g||^2 / delta^2) with e = p t must equal the
        // energy form for any slot length.
        let s = default_scenario();
        let gain = 2.5e-4;
        let p = 3e-3;
        for &t in &[0.1, 0.25, 0.9] {
            let direct = t * s.bandwidth * (1.0 + p * gain / s.noise_power).log2();
            let via_energy = offload_bits(&s, gain, t, p * t).unwrap();
            assert!((direct - via_energy).abs() < 1e-9 * direct);
        }
    }

    #[test]
    fn offload_monotone_in_energy_and_time() {
        let s = default_scenario();
        let gain = 1e-4;
        let base = offload_bits(&s, gain, 0.3, 1e-3).unwrap();
        assert!(offload_bits(&s, gain, 0.3, 2e-3).unwrap() > base);
        // more time at fixed energy also helps (bandwidth gain beats SNR loss)
        assert!(offload_bits(&s, gain, 0.6, 1e-3).unwrap() > base);
        // joint scaling is exactly homogeneous
        let scaled = offload_bits(&s, gain, 0.6, 2e-3).unwrap();
        assert!((scaled - 2.0 * base).abs() < 1e-9 * scaled);
    }

    #[test]
    fn local_model_example() {
        let s = default_scenario();
        assert!((local_bits(&s, 1e6, 0) - 1000.0).abs() < 1e-9);
        assert!((local_energy(&s, 1e6, 0) - 1e-12).abs() < 1e-24);
        assert_eq!(local_bits(&s, 0.0, 0), 0.0);
    }

    #[test]
    fn evaluate_assembles_reports() {
        let s = two_ws_scenario();
        let ch = draw_channels(&s, 2);
        let mut alloc = Allocation::zeros(2);
        alloc.t = vec![0.4, 0.6];
        alloc.ps_energy = vec![0.4, 0.6];
        alloc.tx_energy = vec![1e-4, 2e-4];
        alloc.cpu_freq = vec![1e6, 5e5];
        let (data, energy) = evaluate(&s, &ch, &alloc, DEFAULT_ENERGY_MODEL).unwrap();
        for k in 0..2 {
            let sum = data.local_bits[k] + data.offload_bits[k];
            assert!((data.total_bits[k] - sum).abs() < 1e-12 * sum);
            let consumed = energy.consumed(k);
            let expected = alloc.tx_energy[k]
                + s.frame_duration * s.switched_capacitance[k] * alloc.cpu_freq[k].powi(3);
            assert!((consumed - expected).abs() < 1e-18);
        }
    }

    #[test]
    fn feasibility_zero_allocation() {
        let s = two_ws_scenario();
        let ch = draw_channels(&s, 1);
        assert!(feasibility(&s, &ch, &Allocation::zeros(2), DEFAULT_ENERGY_MODEL).is_empty());
    }

    #[test]
    fn feasibility_catches_ps_cap_and_overspend() {
        let s = two_ws_scenario();
        let ch = draw_channels(&s, 1);
        let mut alloc = Allocation::zeros(2);
        alloc.t = vec![0.5, 0.5];
        alloc.ps_energy = vec![2.0 * s.ps_power_max * 0.5, 0.5];
        alloc.tx_energy = vec![1.0, 0.0];
        let v = feasibility(&s, &ch, &alloc, DEFAULT_ENERGY_MODEL);
        assert!(v.iter().any(|m| m.contains("PS power cap")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("energy causality")), "{v:?}");
    }

    #[test]
    fn feasibility_accepts_harvest_limited_spend() {
        let s = two_ws_scenario();
        let ch = draw_channels(&s, 1);
        let mut alloc = Allocation::zeros(2);
        alloc.t = vec![0.5, 0.5];
        alloc.ps_energy = vec![0.5, 0.5];
        let model = EnergyModel::SlotTdma { recycling: false };
        for i in 0..2 {
            alloc.tx_energy[i] = harvested_energy_one(&s, &ch, &alloc, model, i).total();
        }
        assert!(feasibility(&s, &ch, &alloc, model).is_empty());
    }

    proptest! {
        // offload_bits is concave in (t, e) jointly: midpoint value dominates
        // the chord midpoint.
        #[test]
        fn offload_midpoint_concavity(
            t1 in 0.01f64..1.0, t2 in 0.01f64..1.0,
            e1 in 1e-7f64..1e-2, e2 in 1e-7f64..1e-2,
        ) {
            let s = default_scenario();
            let gain = 1e-4;
            let f1 = offload_bits(&s, gain, t1, e1).unwrap();
            let f2 = offload_bits(&s, gain, t2, e2).unwrap();
            let fm = offload_bits(&s, gain, 0.5 * (t1 + t2), 0.5 * (e1 + e2)).unwrap();
            prop_assert!(fm >= 0.5 * (f1 + f2) - 1e-9 * fm.abs().max(1.0));
        }
    }
}
