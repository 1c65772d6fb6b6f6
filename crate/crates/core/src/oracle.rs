//! Independent reference solver used to validate the closed-form engines.
//!
//! The joint allocation problem is concave after the per-slot energy
//! substitution, so a primal log-barrier method with exact gradients and
//! Hessians converges to the same optimum as the alternating solvers while
//! sharing none of their structure. Variables are diagonally rescaled to
//! unit order before each Newton solve; the normal equations go through a
//! dense Cholesky factorization with escalating ridge regularization.
//!
//! The barrier keeps every iterate strictly interior, so the time budget and
//! the PS energy caps finish epsilon-slack; a final polish rescales the slots
//! onto the budget surface, saturates the PS, and re-saturates the offload
//! energies, all of which only increase rates.

use crate::error::Error;
use crate::fairness::{self, FairnessParam};
use crate::physics::{self, Allocation};
use crate::scenario::{ChannelRealization, Scenario};

const LN2: f64 = std::f64::consts::LN_2;

/// Barrier solver output.
#[derive(Debug, Clone)]
pub struct OracleResult {
    pub allocation: Allocation,
    pub bits: Vec<f64>,
    /// Objective in the requested regime (utility sum, or the rate floor).
    pub objective: f64,
    /// Common rate floor; present only for the max-min run.
    pub gamma: Option<f64>,
}

/// Reference solve of the alpha-fair problem for finite alpha >= 0.
pub fn solve_generic(s: &Scenario, ch: &ChannelRealization, alpha: f64) -> Result<OracleResult, Error> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::domain("oracle", format!("requires finite alpha >= 0, got {alpha}")));
    }
    solve_barrier(s, ch, Mode::Utility(alpha))
}

/// Reference solve of the max-min problem via its epigraph form.
pub fn solve_maxmin_epigraph(s: &Scenario, ch: &ChannelRealization) -> Result<OracleResult, Error> {
    solve_barrier(s, ch, Mode::MaxMin)
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Utility(f64),
    MaxMin,
}

/// Utility objective evaluated at an allocation, in the solver's units.
pub fn objective_value(
    s: &Scenario,
    ch: &ChannelRealization,
    alpha: FairnessParam,
    alloc: &Allocation,
) -> Result<f64, Error> {
    let (bits, _) = rates(s, ch, alloc)?;
    match alpha {
        FairnessParam::MaxMin => Ok(bits.iter().fold(f64::INFINITY, |m, b| m.min(*b))),
        FairnessParam::Alpha(_) => {
            let mut sum = 0.0;
            for b in &bits {
                sum += fairness::utility(alpha, *b)?;
            }
            Ok(sum)
        }
    }
}

/// Analytic gradient of the utility objective with respect to the flattened
/// variable vector `[t, ps_energy, tx_energy, cpu_freq]`. The PS block is
/// identically zero because rates depend on PS energy only through the
/// (inactive here) energy-causality constraint.
pub fn objective_gradient(
    s: &Scenario,
    ch: &ChannelRealization,
    alpha: f64,
    alloc: &Allocation,
) -> Result<Vec<f64>, Error> {
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::domain("oracle", "gradient requires finite alpha >= 0"));
    }
    let k = s.num_ws;
    let (bits, gain) = rates(s, ch, alloc)?;
    let mut grad = vec![0.0; 4 * k];
    for i in 0..k {
        let w = fairness::utility_derivative(FairnessParam::Alpha(alpha), bits[i])?;
        let (t, e) = (alloc.t[i], alloc.tx_energy[i]);
        let c = gain[i];
        let x = if t > 0.0 { c * e / t } else { 0.0 };
        grad[i] = w * s.bandwidth * crate::kkt::f_t(x);
        grad[2 * k + i] = if t > 0.0 {
            w * s.bandwidth * c * t / (LN2 * (t + c * e))
        } else {
            0.0
        };
        grad[3 * k + i] = w * s.frame_duration / s.cycles_per_bit[i];
    }
    Ok(grad)
}

fn rates(
    s: &Scenario,
    ch: &ChannelRealization,
    alloc: &Allocation,
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let k = s.num_ws;
    let mut gain = Vec::with_capacity(k);
    for i in 0..k {
        gain.push(physics::mrc_beamformer(ch, i)?.effective_gain / s.noise_power);
    }
    let mut bits = Vec::with_capacity(k);
    for i in 0..k {
        let local = physics::local_bits(s, alloc.cpu_freq[i], i);
        bits.push(local + physics::offload_bits(s, ch.ap_gain(i), alloc.t[i], alloc.tx_energy[i])?);
    }
    Ok((bits, gain))
}

/// Layout of the barrier variable vector: K slots, K PS energies, K offload
/// energies, K frequencies, plus the rate floor for the max-min run.
struct Problem<'a> {
    s: &'a Scenario,
    mode: Mode,
    gain: Vec<f64>,
    /// Harvest per joule the PS spends in a peer slot.
    ps_coef: Vec<Vec<f64>>,
    /// Harvest per joule a peer sensor radiates.
    ws_coef: Vec<Vec<f64>>,
    r_ref: f64,
    t_min: f64,
    with_min_data: bool,
    n: usize,
}

impl<'a> Problem<'a> {
    fn k(&self) -> usize {
        self.s.num_ws
    }

    fn scales(&self) -> Vec<f64> {
        let k = self.k();
        let mut sc = Vec::with_capacity(self.n);
        let budget = self.s.slot_budget();
        sc.extend(std::iter::repeat(budget).take(k));
        sc.extend(std::iter::repeat(self.s.ps_power_max * budget).take(k));
        let e_ref = self
            .s
            .eh_efficiency
            .max(1e-6)
            * self.s.ps_power_max
            * budget
            * 1e-2;
        sc.extend(std::iter::repeat(e_ref).take(k));
        sc.extend(self.s.cpu_freq_max.iter().copied());
        if self.mode == Mode::MaxMin {
            sc.push(self.r_ref);
        }
        sc
    }

    fn bits(&self, x: &[f64]) -> Vec<f64> {
        let k = self.k();
        (0..k)
            .map(|i| {
                let (t, e, f) = (x[i], x[2 * k + i], x[3 * k + i]);
                let local = self.s.frame_duration * f / self.s.cycles_per_bit[i];
                let off = if t > 0.0 && e > 0.0 {
                    t * self.s.bandwidth * (self.gain[i] * e / t).ln_1p() / LN2
                } else {
                    0.0
                };
                local + off
            })
            .collect()
    }

    fn causality_slack(&self, x: &[f64], i: usize) -> f64 {
        let k = self.k();
        let mut intake = 0.0;
        for j in 0..k {
            if j != i {
                intake += self.ps_coef[j][i] * x[k + j] + self.ws_coef[j][i] * x[2 * k + j];
            }
        }
        let e_lc = self.s.frame_duration
            * self.s.switched_capacitance[i]
            * x[3 * k + i].powi(3);
        intake - x[2 * k + i] - e_lc
    }

    fn num_slacks(&self) -> usize {
        let k = self.k();
        let mut m = k + 1 + 6 * k;
        if self.with_min_data {
            m += k;
        }
        if self.mode == Mode::MaxMin {
            m += k;
        }
        m
    }

    /// Barrier-augmented value, gradient, and Hessian at `x` for weight `tau`
    /// on the (negated, normalized) objective.
    fn eval(&self, x: &[f64], tau: f64) -> Option<(f64, Vec<f64>, Vec<Vec<f64>>)> {
        let k = self.k();
        let n = self.n;
        // reject anything outside the box before touching rate kernels
        for i in 0..k {
            if x[i] <= self.t_min
                || x[k + i] <= 0.0
                || x[2 * k + i] <= 0.0
                || x[3 * k + i] <= 0.0
                || x[3 * k + i] >= self.s.cpu_freq_max[i]
            {
                return None;
            }
        }
        let mut val = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = vec![vec![0.0; n]; n];
        let bits = self.bits(x);
        if bits.iter().any(|b| *b <= 0.0) {
            return None;
        }

        // rate derivatives reused by the objective and the rate constraints
        let mut dr = vec![[0.0f64; 3]; k]; // d bits / d (t, e, f)
        let mut d2r = vec![[0.0f64; 3]; k]; // (tt, te, ee) curvature
        for i in 0..k {
            let (t, e) = (x[i], x[2 * k + i]);
            let c = self.gain[i];
            let xs = c * e / t;
            dr[i][0] = self.s.bandwidth * crate::kkt::f_t(xs);
            dr[i][1] = self.s.bandwidth * c * t / (LN2 * (t + c * e));
            dr[i][2] = self.s.frame_duration / self.s.cycles_per_bit[i];
            let base = self.s.bandwidth * c * c / (LN2 * (t + c * e) * (t + c * e));
            d2r[i][0] = -base * e * e / t;
            d2r[i][1] = base * e;
            d2r[i][2] = -base * t;
        }
        let add_rate_outer = |hess: &mut Vec<Vec<f64>>, i: usize, w_outer: f64, w_curv: f64| {
            // w_outer * grad_R grad_R^T + w_curv * hess_R over (t_i, e_i, f_i)
            let idx = [i, 2 * k + i, 3 * k + i];
            for a in 0..3 {
                for b in 0..3 {
                    hess[idx[a]][idx[b]] += w_outer * dr[i][a] * dr[i][b];
                }
            }
            hess[idx[0]][idx[0]] += w_curv * d2r[i][0];
            hess[idx[0]][idx[1]] += w_curv * d2r[i][1];
            hess[idx[1]][idx[0]] += w_curv * d2r[i][1];
            hess[idx[1]][idx[1]] += w_curv * d2r[i][2];
        };

        // objective part (minimize tau * -U)
        match self.mode {
            Mode::Utility(alpha) => {
                for i in 0..k {
                    let y = bits[i] / self.r_ref;
                    let u = fairness::utility(FairnessParam::Alpha(alpha), y).ok()?;
                    val -= tau * u;
                    let up = y.powf(-alpha) / self.r_ref;
                    let upp = -alpha * y.powf(-alpha - 1.0) / (self.r_ref * self.r_ref);
                    let idx = [i, 2 * k + i, 3 * k + i];
                    for a in 0..3 {
                        grad[idx[a]] -= tau * up * dr[i][a];
                    }
                    add_rate_outer(&mut hess, i, -tau * upp, -tau * up);
                }
            }
            Mode::MaxMin => {
                val -= tau * x[n - 1] / self.r_ref;
                grad[n - 1] -= tau / self.r_ref;
            }
        }

        // barrier terms: phi = -ln(slack)
        let affine = |val: &mut f64,
                          grad: &mut Vec<f64>,
                          hess: &mut Vec<Vec<f64>>,
                          slack: f64,
                          terms: &[(usize, f64)]|
         -> Option<()> {
            if slack <= 0.0 {
                return None;
            }
            *val -= slack.ln();
            for &(j, c) in terms {
                grad[j] -= c / slack;
            }
            for &(j1, c1) in terms {
                for &(j2, c2) in terms {
                    hess[j1][j2] += c1 * c2 / (slack * slack);
                }
            }
            Some(())
        };

        let budget = self.s.slot_budget();
        for i in 0..k {
            affine(&mut val, &mut grad, &mut hess, x[i] - self.t_min, &[(i, 1.0)])?;
        }
        {
            let slack = budget - x[..k].iter().sum::<f64>();
            let terms: Vec<(usize, f64)> = (0..k).map(|i| (i, -1.0)).collect();
            affine(&mut val, &mut grad, &mut hess, slack, &terms)?;
        }
        for i in 0..k {
            affine(&mut val, &mut grad, &mut hess, x[k + i], &[(k + i, 1.0)])?;
            affine(
                &mut val,
                &mut grad,
                &mut hess,
                self.s.ps_power_max * x[i] - x[k + i],
                &[(i, self.s.ps_power_max), (k + i, -1.0)],
            )?;
            affine(&mut val, &mut grad, &mut hess, x[2 * k + i], &[(2 * k + i, 1.0)])?;
            affine(&mut val, &mut grad, &mut hess, x[3 * k + i], &[(3 * k + i, 1.0)])?;
            affine(
                &mut val,
                &mut grad,
                &mut hess,
                self.s.cpu_freq_max[i] - x[3 * k + i],
                &[(3 * k + i, -1.0)],
            )?;
        }
        // energy causality: affine in energies, cubic in the own frequency
        for i in 0..k {
            let slack = self.causality_slack(x, i);
            if slack <= 0.0 {
                return None;
            }
            let phi_f = self.s.frame_duration * self.s.switched_capacitance[i];
            let f = x[3 * k + i];
            let mut terms: Vec<(usize, f64)> = vec![(2 * k + i, -1.0), (3 * k + i, -3.0 * phi_f * f * f)];
            for j in 0..k {
                if j != i {
                    terms.push((k + j, self.ps_coef[j][i]));
                    terms.push((2 * k + j, self.ws_coef[j][i]));
                }
            }
            val -= slack.ln();
            for &(j, c) in &terms {
                grad[j] -= c / slack;
            }
            for &(j1, c1) in &terms {
                for &(j2, c2) in &terms {
                    hess[j1][j2] += c1 * c2 / (slack * slack);
                }
            }
            // -(1/slack) * d2 slack / df2
            hess[3 * k + i][3 * k + i] += 6.0 * phi_f * f / slack;
        }
        // nonlinear rate constraints
        let rate_barrier = |val: &mut f64,
                                grad: &mut Vec<f64>,
                                hess: &mut Vec<Vec<f64>>,
                                i: usize,
                                slack: f64,
                                gamma_col: Option<usize>|
         -> Option<()> {
            if slack <= 0.0 {
                return None;
            }
            *val -= slack.ln();
            let idx = [i, 2 * k + i, 3 * k + i];
            for a in 0..3 {
                grad[idx[a]] -= dr[i][a] / slack;
            }
            if let Some(gc) = gamma_col {
                grad[gc] += 1.0 / slack;
            }
            let inv2 = 1.0 / (slack * slack);
            for a in 0..3 {
                for b in 0..3 {
                    hess[idx[a]][idx[b]] += dr[i][a] * dr[i][b] * inv2;
                }
            }
            if let Some(gc) = gamma_col {
                for a in 0..3 {
                    hess[idx[a]][gc] -= dr[i][a] * inv2;
                    hess[gc][idx[a]] -= dr[i][a] * inv2;
                }
                hess[gc][gc] += inv2;
            }
            // -(1/slack) * hess_R
            hess[idx[0]][idx[0]] -= d2r[i][0] / slack;
            hess[idx[0]][idx[1]] -= d2r[i][1] / slack;
            hess[idx[1]][idx[0]] -= d2r[i][1] / slack;
            hess[idx[1]][idx[1]] -= d2r[i][2] / slack;
            Some(())
        };
        if self.with_min_data {
            for i in 0..k {
                rate_barrier(&mut val, &mut grad, &mut hess, i, bits[i] - self.s.min_data[i], None)?;
            }
        }
        if self.mode == Mode::MaxMin {
            for i in 0..k {
                rate_barrier(&mut val, &mut grad, &mut hess, i, bits[i] - x[n - 1], Some(n - 1))?;
            }
        }
        Some((val, grad, hess))
    }
}

/// Dense Cholesky solve of `A x = b` for symmetric positive definite `A`.
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for p in 0..j {
                sum -= l[i][p] * l[j][p];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[i][p] * y[p];
        }
        y[i] = sum / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for p in (i + 1)..n {
            sum -= l[p][i] * x[p];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

fn solve_barrier(s: &Scenario, ch: &ChannelRealization, mode: Mode) -> Result<OracleResult, Error> {
    s.ensure_valid()?;
    let k = s.num_ws;
    if k == 1 {
        // no peer slots, hence no harvest: the degenerate idle allocation
        let allocation = Allocation {
            t: vec![s.slot_budget()],
            ps_energy: vec![s.ps_power_max * s.slot_budget()],
            tx_energy: vec![0.0],
            cpu_freq: vec![0.0],
        };
        return Ok(OracleResult {
            allocation,
            bits: vec![0.0],
            objective: 0.0,
            gamma: match mode {
                Mode::MaxMin => Some(0.0),
                _ => None,
            },
        });
    }

    let mut gain = Vec::with_capacity(k);
    for i in 0..k {
        gain.push(physics::mrc_beamformer(ch, i)?.effective_gain / s.noise_power);
    }
    let ps_coef: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..k).map(|i| s.eh_efficiency * ch.ps_gain(i)).collect::<Vec<f64>>())
        .collect();
    let ws_coef: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..k)
                .map(|i| if i == j { 0.0 } else { s.eh_efficiency * ch.ws_gain(j, i) })
                .collect()
        })
        .collect();

    let budget = s.slot_budget();
    let t_min = 1e-9 * s.frame_duration;
    let with_min_data = s.min_data.iter().any(|r| *r > 0.0);
    let base_n = 4 * k + if mode == Mode::MaxMin { 1 } else { 0 };

    // strictly interior start
    let mut x = vec![0.0; base_n];
    for i in 0..k {
        x[i] = 0.9 * budget / k as f64;
        x[k + i] = 0.5 * s.ps_power_max * x[i];
    }
    for i in 0..k {
        let intake: f64 = (0..k)
            .filter(|j| *j != i)
            .map(|j| ps_coef[j][i] * x[k + j])
            .sum();
        let f_cap = (0.1 * intake / (s.frame_duration * s.switched_capacitance[i])).cbrt();
        x[3 * k + i] = (0.5 * s.cpu_freq_max[i]).min(f_cap).max(t_min);
        let e_lc = s.frame_duration * s.switched_capacitance[i] * x[3 * k + i].powi(3);
        x[2 * k + i] = 0.4 * (intake - e_lc).max(1e-30);
    }

    let mut problem = Problem {
        s,
        mode,
        gain,
        ps_coef,
        ws_coef,
        r_ref: 1.0,
        t_min,
        with_min_data: false,
        n: base_n,
    };
    let start_bits = problem.bits(&x);
    problem.r_ref = (start_bits.iter().sum::<f64>() / k as f64).max(1.0);
    if mode == Mode::MaxMin {
        x[base_n - 1] = 0.5 * start_bits.iter().fold(f64::INFINITY, |m, b| m.min(*b));
    }
    // add the minimum-data barrier only once the start satisfies it strictly
    if with_min_data {
        let ok = (0..k).all(|i| start_bits[i] > s.min_data[i] * (1.0 + 1e-6));
        if ok {
            problem.with_min_data = true;
        } else {
            center(&mut x, &problem)?;
            let bits = problem.bits(&x);
            if (0..k).all(|i| bits[i] > s.min_data[i]) {
                problem.with_min_data = true;
            } else {
                let binding = (0..k)
                    .map(|i| (i, bits[i] - s.min_data[i]))
                    .min_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                return Err(Error::Infeasible(crate::error::InfeasibilityReport {
                    binding_ws: binding,
                    required_bits: s.min_data[binding],
                    achievable_bits: bits[binding],
                }));
            }
        }
    }
    center(&mut x, &problem)?;

    // polish onto the active faces
    let sum: f64 = x[..k].iter().sum();
    let scale = budget / sum;
    for i in 0..k {
        x[i] *= scale;
        x[k + i] = s.ps_power_max * x[i];
    }
    // re-saturate offload energies under the enlarged harvest
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..k {
            let mut intake = 0.0;
            for j in 0..k {
                if j != i {
                    intake += problem.ps_coef[j][i] * x[k + j] + problem.ws_coef[j][i] * x[2 * k + j];
                }
            }
            let e_lc = s.frame_duration * s.switched_capacitance[i] * x[3 * k + i].powi(3);
            let next = (intake - e_lc).max(0.0);
            delta = delta.max((next - x[2 * k + i]).abs());
            x[2 * k + i] = next;
        }
        if delta <= 1e-16 {
            break;
        }
    }

    let allocation = Allocation {
        t: x[..k].to_vec(),
        ps_energy: x[k..2 * k].to_vec(),
        tx_energy: x[2 * k..3 * k].to_vec(),
        cpu_freq: x[3 * k..4 * k].to_vec(),
    };
    let bits = problem.bits(&x);
    let (objective, gamma) = match mode {
        Mode::Utility(alpha) => {
            let mut sum = 0.0;
            for b in &bits {
                sum += fairness::utility(FairnessParam::Alpha(alpha), *b)?;
            }
            (sum, None)
        }
        Mode::MaxMin => {
            let min = bits.iter().fold(f64::INFINITY, |m, b| m.min(*b));
            (min, Some(min))
        }
    };
    Ok(OracleResult { allocation, bits, objective, gamma })
}

/// Barrier path following: Newton centering with backtracking, barrier
/// weight multiplied by 10 until the duality-gap proxy is negligible.
fn center(x: &mut Vec<f64>, problem: &Problem<'_>) -> Result<(), Error> {
    let n = problem.n;
    let scales = problem.scales();
    let m = problem.num_slacks() as f64;
    let mut tau = 1.0;
    loop {
        for _ in 0..60 {
            let (val, grad, hess) = problem
                .eval(x, tau)
                .ok_or_else(|| Error::NonConvergence("oracle iterate left the interior".into()))?;
            // scaled Newton system
            let mut gs = vec![0.0; n];
            let mut hs = vec![vec![0.0; n]; n];
            for i in 0..n {
                gs[i] = grad[i] * scales[i];
                for j in 0..n {
                    hs[i][j] = hess[i][j] * scales[i] * scales[j];
                }
            }
            let mut step = None;
            let mut ridge = 0.0;
            for _ in 0..12 {
                let mut reg = hs.clone();
                for i in 0..n {
                    reg[i][i] += ridge;
                }
                let rhs: Vec<f64> = gs.iter().map(|g| -g).collect();
                if let Some(d) = cholesky_solve(&reg, &rhs) {
                    step = Some(d);
                    break;
                }
                ridge = if ridge == 0.0 { 1e-10 } else { ridge * 100.0 };
            }
            let ds = step
                .ok_or_else(|| Error::NonConvergence("oracle Newton system not positive definite".into()))?;
            let decrement: f64 = -gs.iter().zip(&ds).map(|(g, d)| g * d).sum::<f64>();
            if decrement <= 2e-10 {
                break;
            }
            // backtracking line search on the barrier merit
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = (0..n).map(|i| x[i] + alpha * ds[i] * scales[i]).collect();
                if let Some((v, _, _)) = problem.eval(&trial, tau) {
                    if v <= val - 0.25 * alpha * decrement {
                        *x = trial;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if m / tau < 1e-9 {
            return Ok(());
        }
        tau *= 10.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kkt::{solve_cfba, solve_mfba, solve_zfba};
    use crate::scenario::{default_scenario, draw_channels};

    fn interior_allocation(s: &Scenario) -> Allocation {
        let k = s.num_ws;
        Allocation {
            t: vec![0.8 * s.slot_budget() / k as f64; k],
            ps_energy: vec![0.4 * s.ps_power_max * s.slot_budget() / k as f64; k],
            tx_energy: vec![2e-5; k],
            cpu_freq: vec![4e5; k],
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let s = default_scenario();
        let ch = draw_channels(&s, 11);
        let alloc = interior_allocation(&s);
        for &alpha in &[0.0, 0.5, 2.0] {
            let grad = objective_gradient(&s, &ch, alpha, &alloc).unwrap();
            let k = s.num_ws;
            for block in [0usize, 2, 3] {
                for i in 0..k {
                    let idx = block * k + i;
                    let mut hi = alloc.clone();
                    let mut lo = alloc.clone();
                    let base = match block {
                        0 => alloc.t[i],
                        2 => alloc.tx_energy[i],
                        _ => alloc.cpu_freq[i],
                    };
                    let h = 1e-6 * base;
                    match block {
                        0 => {
                            hi.t[i] += h;
                            lo.t[i] -= h;
                        }
                        2 => {
                            hi.tx_energy[i] += h;
                            lo.tx_energy[i] -= h;
                        }
                        _ => {
                            hi.cpu_freq[i] += h;
                            lo.cpu_freq[i] -= h;
                        }
                    }
                    let fd = (objective_value(&s, &ch, FairnessParam::Alpha(alpha), &hi).unwrap()
                        - objective_value(&s, &ch, FairnessParam::Alpha(alpha), &lo).unwrap())
                        / (2.0 * h);
                    let an = grad[idx];
                    assert!(
                        (fd - an).abs() <= 1e-5 * an.abs().max(1e-12),
                        "alpha={alpha} idx={idx}: fd={fd} analytic={an}"
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_result_is_feasible() {
        let s = default_scenario();
        let ch = draw_channels(&s, 12);
        let res = solve_generic(&s, &ch, 0.0).unwrap();
        let violations =
            physics::feasibility(&s, &ch, &res.allocation, physics::DEFAULT_ENERGY_MODEL);
        assert!(violations.is_empty(), "{violations:?}");
        let sum: f64 = res.allocation.t.iter().sum();
        assert!((sum - s.slot_budget()).abs() <= 1e-9 * s.frame_duration);
    }

    #[test]
    fn oracle_agrees_with_zfba() {
        let s = default_scenario();
        let ch = draw_channels(&s, 13);
        let solver = solve_zfba(&s, &ch).unwrap();
        let oracle = solve_generic(&s, &ch, 0.0).unwrap();
        let rel = (solver.objective - oracle.objective).abs() / oracle.objective.abs();
        assert!(rel <= 5e-3, "solver {} oracle {}", solver.objective, oracle.objective);
    }

    #[test]
    fn oracle_agrees_with_cfba() {
        let s = default_scenario();
        let ch = draw_channels(&s, 14);
        for &alpha in &[0.5, 2.0] {
            let solver = solve_cfba(&s, &ch, alpha).unwrap();
            let oracle = solve_generic(&s, &ch, alpha).unwrap();
            let rel = (solver.objective - oracle.objective).abs() / oracle.objective.abs();
            assert!(
                rel <= 5e-3,
                "alpha {alpha}: solver {} oracle {}",
                solver.objective,
                oracle.objective
            );
        }
    }

    #[test]
    fn oracle_agrees_with_mfba() {
        let s = default_scenario();
        let ch = draw_channels(&s, 15);
        let solver = solve_mfba(&s, &ch).unwrap();
        let oracle = solve_maxmin_epigraph(&s, &ch).unwrap();
        let rel = (solver.objective - oracle.objective).abs() / oracle.objective.abs();
        assert!(rel <= 5e-3, "solver {} oracle {}", solver.objective, oracle.objective);
        assert!(oracle.gamma.is_some());
    }

    #[test]
    fn degenerate_single_sensor() {
        let mut s = default_scenario();
        s = s.resized(1, s.num_antennas);
        s.min_data = vec![0.0];
        let ch = draw_channels(&s, 1);
        let res = solve_generic(&s, &ch, 0.0).unwrap();
        assert_eq!(res.bits, vec![0.0]);
    }
}
