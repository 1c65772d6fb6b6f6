//! System parameters and random channel realizations.
//!
//! Channels follow distance-dependent path loss applied to the amplitude,
//! `h = rho * d^(-beta)`, with `rho` a unit-variance Rayleigh fade
//! (`E[rho^2] = 1`). Draws are deterministic given `(Scenario, seed)`: each
//! channel family (PS->WS, WS->WS, WS->AP) gets its own ChaCha substream so
//! that, for a fixed seed, the fading of one family does not depend on the
//! geometry or on how many values another family consumes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::fairness::FairnessParam;
use crate::kv::KvDoc;
use crate::physics::Cplx;

/// All static system parameters for one network instance.
///
/// Per-sensor vectors are indexed `0..K`. Powers are in watts, times in
/// seconds, frequencies in hertz, distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Number of wireless sensors (K).
    pub num_ws: usize,
    /// Number of AP receive antennas (N).
    pub num_antennas: usize,
    /// Frame duration T [s].
    pub frame_duration: f64,
    /// Edge-computing reserve epsilon [s]; the offloading window is T - epsilon.
    pub edge_reserve: f64,
    /// System bandwidth B [Hz].
    pub bandwidth: f64,
    /// Energy-conversion efficiency eta, in (0, 1].
    pub eh_efficiency: f64,
    /// Maximum PS transmit power P_max [W].
    pub ps_power_max: f64,
    /// Per-sensor maximum CPU frequency [Hz].
    pub cpu_freq_max: Vec<f64>,
    /// Per-sensor CPU cycles per bit.
    pub cycles_per_bit: Vec<f64>,
    /// Per-sensor switched capacitance coefficient.
    pub switched_capacitance: Vec<f64>,
    /// Per-sensor minimum computable data R_min [bit].
    pub min_data: Vec<f64>,
    /// MEC receiver noise power delta_M^2 [W].
    pub noise_power: f64,
    /// Fairness control parameter.
    pub alpha: FairnessParam,
    /// Path-loss exponent beta.
    pub path_loss_exp: f64,
    /// PS -> WS distances [m].
    pub d_ps_ws: Vec<f64>,
    /// WS -> AP distances [m].
    pub d_ws_ap: Vec<f64>,
    /// Inter-WS distances [m]; symmetric with zero diagonal.
    pub d_ws_ws: Vec<Vec<f64>>,
    /// Seed the distances were drawn from (kept for regeneration at other K).
    pub distance_seed: u64,
}

/// One random draw of every channel in the network.
///
/// Scalars are channel *amplitudes*; square them for power gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// PS -> WS amplitudes.
    pub h: Vec<f64>,
    /// WS i -> WS k amplitudes, zero diagonal.
    pub g_ws: Vec<Vec<f64>>,
    /// WS k -> AP complex channel vectors (N entries each).
    pub g_ap: Vec<Vec<Cplx>>,
    /// Seed used for the draw.
    pub seed: u64,
}

impl ChannelRealization {
    /// PS -> WS power gain |h_k|^2.
    pub fn ps_gain(&self, k: usize) -> f64 {
        self.h[k] * self.h[k]
    }

    /// WS i -> WS k power gain |g_{i,k}|^2.
    pub fn ws_gain(&self, i: usize, k: usize) -> f64 {
        self.g_ws[i][k] * self.g_ws[i][k]
    }

    /// WS -> AP channel power ||g_k||^2.
    pub fn ap_gain(&self, k: usize) -> f64 {
        self.g_ap[k].iter().map(|c| c.norm_sq()).sum()
    }
}

/// Scenario with the paper-standard simulation constants: K = 4, N = 4,
/// T = 1 s, epsilon = 0, eta = 0.8, beta = 2.2, C = 1000 cycles/bit,
/// phi = 1e-30, noise -90 dBm, B = 1 kHz, P_max = 1 W, f_max = 1 MHz,
/// R_min = 100 bit, alpha = 0. Distances are drawn from seed 0.
pub fn default_scenario() -> Scenario {
    default_scenario_with_seed(0)
}

/// As [`default_scenario`], drawing distances from the given seed.
pub fn default_scenario_with_seed(distance_seed: u64) -> Scenario {
    Scenario::generate(4, 4, distance_seed)
}

impl Scenario {
    /// Build a scenario with the default constants for arbitrary `(K, N)`,
    /// drawing distances uniformly from (1, 15] m (PS-WS and WS-AP) and
    /// (0.5, 5] m (inter-WS, symmetric) using `distance_seed`.
    pub fn generate(num_ws: usize, num_antennas: usize, distance_seed: u64) -> Scenario {
        let k = num_ws;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(distance_seed, 0xd15));
        let d_ps_ws: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..=15.0)).collect();
        let d_ws_ap: Vec<f64> = (0..k).map(|_| rng.gen_range(1.0..=15.0)).collect();
        let mut d_ws_ws = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in (i + 1)..k {
                let d = rng.gen_range(0.5..=5.0);
                d_ws_ws[i][j] = d;
                d_ws_ws[j][i] = d;
            }
        }
        Scenario {
            num_ws: k,
            num_antennas,
            frame_duration: 1.0,
            edge_reserve: 0.0,
            bandwidth: 1e3,
            eh_efficiency: 0.8,
            ps_power_max: 1.0,
            cpu_freq_max: vec![1e6; k],
            cycles_per_bit: vec![1000.0; k],
            switched_capacitance: vec![1e-30; k],
            min_data: vec![100.0; k],
            noise_power: dbm_to_watts(-90.0),
            alpha: FairnessParam::Alpha(0.0),
            path_loss_exp: 2.2,
            d_ps_ws,
            d_ws_ap,
            d_ws_ws,
            distance_seed,
        }
    }

    /// Rebuild this scenario at a different network size, redrawing the
    /// geometry from `distance_seed` and replicating the first entry of each
    /// per-sensor vector (sweep templates are homogeneous).
    pub fn resized(&self, num_ws: usize, num_antennas: usize) -> Scenario {
        let mut out = Scenario::generate(num_ws, num_antennas, self.distance_seed);
        out.frame_duration = self.frame_duration;
        out.edge_reserve = self.edge_reserve;
        out.bandwidth = self.bandwidth;
        out.eh_efficiency = self.eh_efficiency;
        out.ps_power_max = self.ps_power_max;
        out.noise_power = self.noise_power;
        out.alpha = self.alpha;
        out.path_loss_exp = self.path_loss_exp;
        out.cpu_freq_max = vec![self.cpu_freq_max[0]; num_ws];
        out.cycles_per_bit = vec![self.cycles_per_bit[0]; num_ws];
        out.switched_capacitance = vec![self.switched_capacitance[0]; num_ws];
        out.min_data = vec![self.min_data[0]; num_ws];
        out
    }

    /// Offloading window T - epsilon [s].
    pub fn slot_budget(&self) -> f64 {
        self.frame_duration - self.edge_reserve
    }

    /// Check every scenario invariant; the returned list is empty iff the
    /// scenario is valid. Each violation names the offending field.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let k = self.num_ws;
        if k < 1 {
            v.push("num_ws: K must be >= 1".into());
        }
        if self.num_antennas < 1 {
            v.push("num_antennas: N must be >= 1".into());
        }
        if !(self.frame_duration > 0.0) {
            v.push("frame_duration: T must be > 0".into());
        }
        if !(self.edge_reserve >= 0.0 && self.edge_reserve < self.frame_duration) {
            v.push("edge_reserve: requires 0 <= epsilon < T".into());
        }
        if !(self.bandwidth > 0.0) {
            v.push("bandwidth: B must be > 0".into());
        }
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency <= 1.0) {
            v.push("eh_efficiency: eta must be in (0, 1]".into());
        }
        if !(self.ps_power_max > 0.0) {
            v.push("ps_power_max: P_max must be > 0".into());
        }
        if !(self.noise_power > 0.0) {
            v.push("noise_power: must be > 0".into());
        }
        match self.alpha {
            FairnessParam::Alpha(a) if !(a.is_finite() && a >= 0.0) => {
                v.push("alpha: must be >= 0 or max-min".into());
            }
            _ => {}
        }
        if !(self.path_loss_exp > 0.0) {
            v.push("path_loss_exp: beta must be > 0".into());
        }
        for (name, vec) in [
            ("cpu_freq_max", &self.cpu_freq_max),
            ("cycles_per_bit", &self.cycles_per_bit),
            ("switched_capacitance", &self.switched_capacitance),
            ("min_data", &self.min_data),
            ("d_ps_ws", &self.d_ps_ws),
            ("d_ws_ap", &self.d_ws_ap),
        ] {
            if vec.len() != k {
                v.push(format!("{name}: expected {k} entries, got {}", vec.len()));
            }
        }
        if self.cpu_freq_max.iter().any(|f| !(*f > 0.0)) {
            v.push("cpu_freq_max: all entries must be > 0".into());
        }
        if self.cycles_per_bit.iter().any(|c| !(*c >= 1.0)) {
            v.push("cycles_per_bit: all entries must be >= 1".into());
        }
        if self.switched_capacitance.iter().any(|p| !(*p > 0.0)) {
            v.push("switched_capacitance: all entries must be > 0".into());
        }
        if self.min_data.iter().any(|r| !(*r >= 0.0)) {
            v.push("min_data: all entries must be >= 0".into());
        }
        if self.d_ps_ws.iter().chain(self.d_ws_ap.iter()).any(|d| !(*d > 0.0)) {
            v.push("d_ps_ws/d_ws_ap: distances must be positive".into());
        }
        if self.d_ws_ws.len() != k || self.d_ws_ws.iter().any(|row| row.len() != k) {
            v.push(format!("d_ws_ws: expected {k}x{k} matrix", k = k));
        } else {
            for i in 0..k {
                if self.d_ws_ws[i][i] != 0.0 {
                    v.push(format!("d_ws_ws: diagonal entry [{i}][{i}] must be 0"));
                }
                for j in 0..k {
                    if i != j && !(self.d_ws_ws[i][j] > 0.0) {
                        v.push(format!("d_ws_ws: off-diagonal entry [{i}][{j}] must be > 0"));
                    }
                }
            }
        }
        v
    }

    pub fn ensure_valid(&self) -> Result<(), Error> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidScenario(v.join("; ")))
        }
    }

    pub fn to_kv(&self) -> KvDoc {
        let mut doc = KvDoc::new();
        doc.set_usize("num_ws", self.num_ws);
        doc.set_usize("num_antennas", self.num_antennas);
        doc.set_f64("frame_duration", self.frame_duration);
        doc.set_f64("edge_reserve", self.edge_reserve);
        doc.set_f64("bandwidth", self.bandwidth);
        doc.set_f64("eh_efficiency", self.eh_efficiency);
        doc.set_f64("ps_power_max", self.ps_power_max);
        doc.set_vec("cpu_freq_max", &self.cpu_freq_max);
        doc.set_vec("cycles_per_bit", &self.cycles_per_bit);
        doc.set_vec("switched_capacitance", &self.switched_capacitance);
        doc.set_vec("min_data", &self.min_data);
        doc.set_f64("noise_power", self.noise_power);
        doc.set("alpha", self.alpha.to_string());
        doc.set_f64("path_loss_exp", self.path_loss_exp);
        doc.set_vec("d_ps_ws", &self.d_ps_ws);
        doc.set_vec("d_ws_ap", &self.d_ws_ap);
        doc.set_matrix("d_ws_ws", &self.d_ws_ws);
        doc.set_u64("distance_seed", self.distance_seed);
        doc
    }

    /// Parse a scenario from a key-value document. `noise_power_dbm` is
    /// accepted as an alternative to `noise_power` (explicit dBm suffix);
    /// distances may be given explicitly or regenerated from `distance_seed`.
    pub fn from_kv(doc: &KvDoc) -> Result<Scenario, Error> {
        let num_ws = doc.get_usize("num_ws")?;
        let num_antennas = doc.get_usize("num_antennas")?;
        let distance_seed = if doc.contains("distance_seed") {
            doc.get_u64("distance_seed")?
        } else {
            0
        };
        let mut s = Scenario::generate(num_ws, num_antennas, distance_seed);
        if doc.contains("frame_duration") {
            s.frame_duration = doc.get_f64("frame_duration")?;
        }
        if doc.contains("edge_reserve") {
            s.edge_reserve = doc.get_f64("edge_reserve")?;
        }
        if doc.contains("bandwidth") {
            s.bandwidth = doc.get_f64("bandwidth")?;
        }
        if doc.contains("eh_efficiency") {
            s.eh_efficiency = doc.get_f64("eh_efficiency")?;
        }
        if doc.contains("ps_power_max") {
            s.ps_power_max = doc.get_f64("ps_power_max")?;
        }
        if doc.contains("cpu_freq_max") {
            s.cpu_freq_max = expand(doc.get_vec("cpu_freq_max")?, num_ws);
        }
        if doc.contains("cycles_per_bit") {
            s.cycles_per_bit = expand(doc.get_vec("cycles_per_bit")?, num_ws);
        }
        if doc.contains("switched_capacitance") {
            s.switched_capacitance = expand(doc.get_vec("switched_capacitance")?, num_ws);
        }
        if doc.contains("min_data") {
            s.min_data = expand(doc.get_vec("min_data")?, num_ws);
        }
        if doc.contains("noise_power_dbm") {
            s.noise_power = dbm_to_watts(doc.get_f64("noise_power_dbm")?);
        }
        if doc.contains("noise_power") {
            s.noise_power = doc.get_f64("noise_power")?;
        }
        if let Some(raw) = doc.get("alpha") {
            s.alpha = parse_alpha(raw)?;
        }
        if doc.contains("path_loss_exp") {
            s.path_loss_exp = doc.get_f64("path_loss_exp")?;
        }
        if doc.contains("d_ps_ws") {
            s.d_ps_ws = doc.get_vec("d_ps_ws")?;
        }
        if doc.contains("d_ws_ap") {
            s.d_ws_ap = doc.get_vec("d_ws_ap")?;
        }
        if doc.contains("d_ws_ws") {
            s.d_ws_ws = doc.get_matrix("d_ws_ws")?;
        }
        Ok(s)
    }
}

pub fn parse_alpha(raw: &str) -> Result<FairnessParam, Error> {
    let raw = raw.trim();
    if raw.eq_ignore_ascii_case("max-min") || raw.eq_ignore_ascii_case("maxmin") {
        return Ok(FairnessParam::MaxMin);
    }
    raw.parse::<f64>()
        .map(FairnessParam::Alpha)
        .map_err(|_| Error::Parse { line: 0, message: format!("invalid alpha `{raw}`") })
}

fn expand(values: Vec<f64>, k: usize) -> Vec<f64> {
    if values.len() == 1 {
        vec![values[0]; k]
    } else {
        values
    }
}

/// Standard dBm -> W conversion, `W = 10^((dBm - 30)/10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Upper bound on the recycling loop gain of an accepted channel draw.
///
/// The far-field path-loss model can report inter-WS power gains above 1 at
/// sub-metre distances. If the spectral radius of the resulting
/// eta-weighted recycling matrix reaches 1, a passive network amplifies
/// energy and the allocation problem becomes unbounded, so such draws are
/// rejected and redrawn.
pub const MAX_RECYCLING_LOOP_GAIN: f64 = 0.95;

/// Spectral radius of the recycling energy-transfer matrix
/// `M[k][i] = eta |g_{i,k}|^2` (zero diagonal), by power iteration.
pub fn recycling_loop_gain(s: &Scenario, ch: &ChannelRealization) -> f64 {
    let k = s.num_ws;
    if k < 2 {
        return 0.0;
    }
    let mut v = vec![1.0; k];
    let mut radius = 0.0;
    for _ in 0..200 {
        let mut next = vec![0.0; k];
        for row in 0..k {
            for col in 0..k {
                if row != col {
                    next[row] += s.eh_efficiency * ch.ws_gain(col, row) * v[col];
                }
            }
        }
        let norm = next.iter().fold(0.0f64, |a, b| a.max(*b));
        if norm == 0.0 {
            return 0.0;
        }
        let prev = radius;
        radius = norm;
        for x in next.iter_mut() {
            *x /= norm;
        }
        v = next;
        if (radius - prev).abs() <= 1e-12 * radius {
            break;
        }
    }
    radius
}

/// Draw all channel fades for `(s, seed)`. Pure: identical inputs produce
/// bit-identical realizations.
///
/// Draws whose recycling loop gain reaches [`MAX_RECYCLING_LOOP_GAIN`] are
/// rejected and redrawn from a derived seed, deterministically.
pub fn draw_channels(s: &Scenario, seed: u64) -> ChannelRealization {
    for attempt in 0..64u64 {
        let stream = if attempt == 0 { seed } else { mix_seed(seed, 0xfade_0000 + attempt) };
        let ch = draw_channels_raw(s, stream, seed);
        if recycling_loop_gain(s, &ch) < MAX_RECYCLING_LOOP_GAIN {
            return ch;
        }
    }
    unreachable!("64 consecutive amplification-loop channel draws");
}

fn draw_channels_raw(s: &Scenario, stream: u64, seed: u64) -> ChannelRealization {
    let k = s.num_ws;
    let beta = s.path_loss_exp;

    // One substream per channel family; fades are drawn before distance
    // scaling so that the fading pattern is a function of (seed, index) only.
    let mut rng_h = ChaCha8Rng::seed_from_u64(mix_seed(stream, 1));
    let h: Vec<f64> = (0..k)
        .map(|i| rayleigh_unit(&mut rng_h) * s.d_ps_ws[i].powf(-beta))
        .collect();

    let mut rng_ws = ChaCha8Rng::seed_from_u64(mix_seed(stream, 2));
    let mut g_ws = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            // fixed draw order independent of the diagonal skip
            let fade = rayleigh_unit(&mut rng_ws);
            if i != j {
                g_ws[i][j] = fade * s.d_ws_ws[i][j].powf(-beta);
            }
        }
    }

    let mut rng_ap = ChaCha8Rng::seed_from_u64(mix_seed(stream, 3));
    let g_ap: Vec<Vec<Cplx>> = (0..k)
        .map(|i| {
            let scale = s.d_ws_ap[i].powf(-beta);
            (0..s.num_antennas)
                .map(|_| {
                    let amp = rayleigh_unit(&mut rng_ap) * scale;
                    let phase = rng_ap.gen_range(0.0..std::f64::consts::TAU);
                    Cplx::new(amp * phase.cos(), amp * phase.sin())
                })
                .collect()
        })
        .collect();

    ChannelRealization { h, g_ws, g_ap, seed }
}

/// Rayleigh amplitude with E[rho^2] = 1 (rho^2 ~ Exp(1)).
fn rayleigh_unit(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    (-u.ln()).sqrt()
}

fn mix_seed(seed: u64, family: u64) -> u64 {
    // splitmix64 finalizer over (seed, family)
    let mut z = seed ^ family.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_matches_paper_constants() {
        let s = default_scenario();
        assert_eq!(s.eh_efficiency, 0.8);
        assert!((s.noise_power - 1e-12).abs() < 1e-24);
        assert_eq!(s.frame_duration - s.edge_reserve, 1.0);
        assert_eq!(s.num_ws, 4);
        assert_eq!(s.num_antennas, 4);
        assert!(s.validate().is_empty());
    }

    #[test]
    fn validate_flags_fields() {
        let mut s = default_scenario();
        s.eh_efficiency = 1.5;
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("eh_efficiency"));

        let mut s = default_scenario();
        s.edge_reserve = s.frame_duration;
        let v = s.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("edge_reserve"));
    }

    #[test]
    fn channel_determinism() {
        let s = default_scenario();
        let a = draw_channels(&s, 42);
        let b = draw_channels(&s, 42);
        assert_eq!(a, b);
        let c = draw_channels(&s, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn channel_shape() {
        let s = default_scenario();
        let ch = draw_channels(&s, 7);
        assert_eq!(ch.g_ap.len(), 4);
        for k in 0..4 {
            assert_eq!(ch.g_ap[k].len(), s.num_antennas);
            assert!(ch.ps_gain(k) > 0.0);
            assert_eq!(ch.g_ws[k][k], 0.0);
        }
    }

    #[test]
    fn path_loss_monotone_in_distance() {
        let s = default_scenario();
        let ch = draw_channels(&s, 3);
        let mut far = s.clone();
        for d in far.d_ps_ws.iter_mut() {
            *d *= 2.0;
        }
        let ch_far = draw_channels(&far, 3);
        for k in 0..4 {
            assert!(ch_far.ps_gain(k) < ch.ps_gain(k));
            // same fade, doubled distance: amplitude scales by 2^-beta
            let ratio = ch_far.h[k] / ch.h[k];
            assert!((ratio - 2f64.powf(-s.path_loss_exp)).abs() < 1e-12);
        }
    }

    #[test]
    fn rayleigh_unit_second_moment() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 100_000;
        let mean_sq: f64 = (0..n).map(|_| rayleigh_unit(&mut rng).powi(2)).sum::<f64>() / n as f64;
        // rho^2 ~ Exp(1): var 1, so 3 sigma over 1e5 samples is ~0.95%
        assert!((mean_sq - 1.0).abs() < 0.02, "mean_sq = {mean_sq}");
    }

    #[test]
    fn loop_gain_bounded_on_accepted_draws() {
        let s = default_scenario();
        for seed in 0..200 {
            let ch = draw_channels(&s, seed);
            assert!(recycling_loop_gain(&s, &ch) < MAX_RECYCLING_LOOP_GAIN, "seed {seed}");
        }
    }

    #[test]
    fn kv_round_trip_lossless() {
        let s = default_scenario_with_seed(11);
        let text = s.to_kv().emit();
        let parsed = Scenario::from_kv(&KvDoc::parse(&text).unwrap()).unwrap();
        assert_eq!(s, parsed);
        // and byte-stable on re-emission
        assert_eq!(text, parsed.to_kv().emit());
    }

    #[test]
    fn dbm_key_accepted() {
        let doc = KvDoc::parse("num_ws = 2\nnum_antennas = 2\nnoise_power_dbm = -90\n").unwrap();
        let s = Scenario::from_kv(&doc).unwrap();
        assert!((s.noise_power - 1e-12).abs() < 1e-24);
    }
}
