//! Analytic model of the offloading-capacity gain from cooperative energy
//! recycling, under equal time division, constant PS power, and full
//! offloading. Rates are normalized to unit bandwidth and unit frame.

use crate::error::Error;
use crate::physics;
use crate::scenario::{ChannelRealization, Scenario};

/// Fixed-power symmetric setting: every sensor gets a `1/K` slot, the PS
/// radiates a constant power, and sensor transmit powers are exogenous.
#[derive(Debug, Clone, PartialEq)]
pub struct CerSetting {
    pub num_ws: usize,
    /// Constant PS transmit power [W].
    pub ps_power: f64,
    /// Per-sensor transmit power [W].
    pub tx_power: Vec<f64>,
    /// PS-to-sensor power gains.
    pub ps_gain: Vec<f64>,
    /// Inter-sensor power gains, zero diagonal; `ws_gain[i][k]` couples
    /// transmitter i to harvester k.
    pub ws_gain: Vec<Vec<f64>>,
    /// Post-combining sensor-to-AP power gains.
    pub ap_gain: Vec<f64>,
    /// Receiver noise power [W].
    pub noise_power: f64,
    /// RF-to-DC conversion efficiency, in (0, 1].
    pub eh_efficiency: f64,
}

impl CerSetting {
    pub fn validate(&self) -> Result<(), Error> {
        let k = self.num_ws;
        if k < 2 {
            return Err(Error::domain("cer", "needs at least two sensors"));
        }
        let shapes_ok = self.tx_power.len() == k
            && self.ps_gain.len() == k
            && self.ap_gain.len() == k
            && self.ws_gain.len() == k
            && self.ws_gain.iter().all(|row| row.len() == k);
        if !shapes_ok {
            return Err(Error::domain("cer", "field lengths disagree with num_ws"));
        }
        let nonneg = self.ps_power >= 0.0
            && self.tx_power.iter().all(|p| *p >= 0.0)
            && self.ps_gain.iter().all(|g| *g >= 0.0)
            && self.ap_gain.iter().all(|g| *g >= 0.0)
            && self.ws_gain.iter().all(|row| row.iter().all(|g| *g >= 0.0));
        if !nonneg {
            return Err(Error::domain("cer", "negative power or gain"));
        }
        if (0..k).any(|i| self.ws_gain[i][i] != 0.0) {
            return Err(Error::domain("cer", "inter-sensor gain diagonal must be zero"));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::domain("cer", "noise power must be positive"));
        }
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency <= 1.0) {
            return Err(Error::domain("cer", "efficiency must lie in (0, 1]"));
        }
        Ok(())
    }

    /// Illustrative setting derived from a scenario draw: PS at its cap, and
    /// sensor powers from spending the full harvested budget, with one
    /// fixed-point pass to fold in first-order recycling.
    pub fn from_scenario(s: &Scenario, ch: &ChannelRealization) -> Result<CerSetting, Error> {
        s.ensure_valid()?;
        let k = s.num_ws;
        let mut ap_gain = Vec::with_capacity(k);
        for i in 0..k {
            ap_gain.push(physics::mrc_beamformer(ch, i)?.effective_gain);
        }
        let mut setting = CerSetting {
            num_ws: k,
            ps_power: s.ps_power_max,
            tx_power: vec![0.0; k],
            ps_gain: (0..k).map(|i| ch.ps_gain(i)).collect(),
            ws_gain: (0..k)
                .map(|i| (0..k).map(|j| if i == j { 0.0 } else { ch.ws_gain(i, j) }).collect())
                .collect(),
            ap_gain,
            noise_power: s.noise_power,
            eh_efficiency: s.eh_efficiency,
        };
        // full spend of the PS-delivered budget over a 1/K slot
        let base: Vec<f64> = (0..k)
            .map(|i| k as f64 * ps_energy_without_er(&setting, i))
            .collect();
        // one pass folding in the recycling those powers would produce
        setting.tx_power = (0..k)
            .map(|i| {
                let recycled: f64 = (0..k)
                    .filter(|j| *j != i)
                    .map(|j| {
                        setting.eh_efficiency * base[j] * setting.ws_gain[j][i] / k as f64
                    })
                    .sum();
                base[i] + k as f64 * recycled
            })
            .collect();
        setting.validate()?;
        Ok(setting)
    }
}

/// Energy a sensor can spend per slot when peers recycle [J, unit frame].
fn ps_energy_without_er(c: &CerSetting, k: usize) -> f64 {
    let kk = c.num_ws as f64;
    (kk - 1.0) / kk * c.eh_efficiency * c.ps_power * c.ps_gain[k]
}

fn recycled_energy(c: &CerSetting, k: usize) -> f64 {
    let kk = c.num_ws as f64;
    (0..c.num_ws)
        .filter(|i| *i != k)
        .map(|i| c.eh_efficiency * c.tx_power[i] * c.ws_gain[i][k] / kk)
        .sum()
}

fn rate_of_energy(c: &CerSetting, k: usize, energy: f64) -> f64 {
    let kk = c.num_ws as f64;
    (kk * c.ap_gain[k] * energy / c.noise_power).ln_1p() / (kk * std::f64::consts::LN_2)
}

/// Offloading rate with cooperative recycling [bit, unit bandwidth].
pub fn rate_with_er(c: &CerSetting, k: usize) -> Result<f64, Error> {
    c.validate()?;
    check_index(c, k)?;
    Ok(rate_of_energy(c, k, ps_energy_without_er(c, k) + recycled_energy(c, k)))
}

/// Offloading rate with PS harvesting only [bit, unit bandwidth].
pub fn rate_without_er(c: &CerSetting, k: usize) -> Result<f64, Error> {
    c.validate()?;
    check_index(c, k)?;
    Ok(rate_of_energy(c, k, ps_energy_without_er(c, k)))
}

/// Exact recycling gain: always nonnegative.
pub fn gap_exact(c: &CerSetting, k: usize) -> Result<f64, Error> {
    Ok(rate_with_er(c, k)? - rate_without_er(c, k)?)
}

/// Noise-free approximation of the gain: depends only on the ratio of
/// recycled to PS-delivered energy.
pub fn gap_approx(c: &CerSetting, k: usize) -> Result<f64, Error> {
    c.validate()?;
    check_index(c, k)?;
    let kk = c.num_ws as f64;
    let ps_side: f64 = (0..c.num_ws)
        .filter(|i| *i != k)
        .map(|_| c.ps_power * c.ps_gain[k])
        .sum();
    if ps_side <= 0.0 {
        return Err(Error::domain("cer", "approximation undefined without PS-side energy"));
    }
    let recycled: f64 = (0..c.num_ws)
        .filter(|i| *i != k)
        .map(|i| c.tx_power[i] * c.ws_gain[i][k])
        .sum();
    Ok((recycled / ps_side).ln_1p() / (kk * std::f64::consts::LN_2))
}

fn check_index(c: &CerSetting, k: usize) -> Result<(), Error> {
    if k >= c.num_ws {
        return Err(Error::domain("cer", format!("sensor index {k} out of range")));
    }
    Ok(())
}
