//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line. Run with `cargo test --test acceptance -- --nocapture` to
//! see the lines for passing criteria too.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpmec::benchmarks::{solve_fcoa, solve_flca, solve_nera};
use wpmec::cer::{self, CerSetting};
use wpmec::experiments::median;
use wpmec::fairness::FairnessParam;
use wpmec::kkt::{self, f_t, f_t_inverse, lambert_w0, solve_cfba, solve_mfba, solve_zfba};
use wpmec::oracle;
use wpmec::physics::Allocation;
use wpmec::scenario::{default_scenario, draw_channels, Scenario};

fn report(number: usize, name: &str, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number:2} ({name}): {verdict} {detail}");
    assert!(ok, "criterion {number} ({name}) failed: {detail}");
}

fn scenario_with(k: usize) -> Scenario {
    default_scenario().resized(k, default_scenario().num_antennas)
}

/// Like [`scenario_with`], but with sensors at least 3 m apart so that the
/// recycling coupling stays subcritical at K = 5, 6.
fn spread_scenario_with(k: usize) -> Scenario {
    let mut s = scenario_with(k);
    for i in 0..k {
        for j in 0..k {
            if i != j {
                s.d_ws_ws[i][j] = s.d_ws_ws[i][j].max(3.0);
            }
        }
    }
    s
}

#[test]
fn criterion_01_oracle_equivalence() {
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    for k in [2usize, 3, 4] {
        let s = scenario_with(k);
        for seed in 0..20u64 {
            let ch = draw_channels(&s, seed);
            let cases: Vec<(String, f64, f64)> = vec![
                (
                    "zfba".into(),
                    solve_zfba(&s, &ch).unwrap().objective,
                    oracle::solve_generic(&s, &ch, 0.0).unwrap().objective,
                ),
                (
                    "cfba a=0.5".into(),
                    solve_cfba(&s, &ch, 0.5).unwrap().objective,
                    oracle::solve_generic(&s, &ch, 0.5).unwrap().objective,
                ),
                (
                    "cfba a=1".into(),
                    solve_cfba(&s, &ch, 1.0).unwrap().objective,
                    oracle::solve_generic(&s, &ch, 1.0).unwrap().objective,
                ),
                (
                    "cfba a=2".into(),
                    solve_cfba(&s, &ch, 2.0).unwrap().objective,
                    oracle::solve_generic(&s, &ch, 2.0).unwrap().objective,
                ),
                (
                    "mfba".into(),
                    solve_mfba(&s, &ch).unwrap().objective,
                    oracle::solve_maxmin_epigraph(&s, &ch).unwrap().objective,
                ),
            ];
            for (label, solver, reference) in cases {
                let rel = (solver - reference).abs() / reference.abs().max(1e-12);
                if rel > worst {
                    worst = rel;
                    worst_case = format!("K={k} seed={seed} {label}");
                }
            }
        }
    }
    report(
        1,
        "oracle equivalence",
        worst <= 5e-3,
        &format!("worst relative gap {worst:.2e} at {worst_case}"),
    );
}

fn converged_results(seeds: u64) -> Vec<(String, Scenario, u64, kkt::SolverResult)> {
    let s = default_scenario();
    let mut out = Vec::new();
    for seed in 0..seeds {
        let ch = draw_channels(&s, seed);
        out.push(("zfba".into(), s.clone(), seed, solve_zfba(&s, &ch).unwrap()));
        out.push(("cfba".into(), s.clone(), seed, solve_cfba(&s, &ch, 1.0).unwrap()));
        out.push(("mfba".into(), s.clone(), seed, solve_mfba(&s, &ch).unwrap()));
        out.push(("fcoa".into(), s.clone(), seed, solve_fcoa(&s, &ch).unwrap()));
        out.push(("nera".into(), s.clone(), seed, solve_nera(&s, &ch).unwrap()));
        out.push(("flca".into(), s.clone(), seed, solve_flca(&s, &ch).unwrap()));
    }
    out
}

#[test]
fn criterion_02_time_budget_tightness() {
    let mut worst: f64 = 0.0;
    for (_, s, _, res) in converged_results(50) {
        let sum: f64 = res.allocation.t.iter().sum();
        worst = worst.max((sum - s.slot_budget()).abs() / s.frame_duration);
    }
    report(
        2,
        "time budget tightness",
        worst <= 1e-9,
        &format!("worst |sum t - budget| / T = {worst:.2e}"),
    );
}

#[test]
fn criterion_03_ps_saturation() {
    let mut worst: f64 = 0.0;
    for (_, s, _, res) in converged_results(50) {
        for i in 0..s.num_ws {
            let cap = s.ps_power_max * res.allocation.t[i];
            let rel = (res.allocation.ps_energy[i] - cap).abs() / cap.max(1e-300);
            worst = worst.max(rel);
        }
    }
    report(
        3,
        "PS saturation",
        worst <= 1e-12,
        &format!("worst relative deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_04_slack_consistency() {
    let s = default_scenario();
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let ch = draw_channels(&s, seed);
        let cf = solve_cfba(&s, &ch, 2.0).unwrap();
        for i in 0..s.num_ws {
            worst = worst.max((cf.slack[i] - cf.bits[i]).abs() / cf.bits[i]);
        }
        let mm = solve_mfba(&s, &ch).unwrap();
        let min = mm.bits.iter().fold(f64::INFINITY, |m, b| m.min(*b));
        worst = worst.max((mm.slack[0] - min).abs() / min);
    }
    report(
        4,
        "slack consistency",
        worst <= 1e-6,
        &format!("worst relative slack error {worst:.2e}"),
    );
}

#[test]
fn criterion_05_convergence_speed() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);
    let mut ok = true;
    let mut detail = String::new();
    for (name, res) in [
        ("zfba", solve_zfba(&s, &ch).unwrap()),
        ("cfba", solve_cfba(&s, &ch, 1.0).unwrap()),
        ("mfba", solve_mfba(&s, &ch).unwrap()),
    ] {
        let trace = &res.trace;
        let mut settled = trace.len() <= 1;
        for (i, w) in trace.windows(2).enumerate() {
            if w[1] < w[0] - 1e-12 * w[0].abs() {
                ok = false;
                detail = format!("{name}: trace decreases at iteration {}", i + 2);
            }
            if (w[1] - w[0]).abs() / w[0].abs().max(1e-12) < 1e-4 {
                settled = i + 2 <= 20;
                break;
            }
        }
        if !settled {
            ok = false;
            detail = format!("{name}: no 1e-4 settling within 20 iterations");
        }
    }
    report(5, "convergence speed", ok, &detail);
}

#[test]
fn criterion_06_fairness_tradeoff() {
    let s = default_scenario();
    let grid = [0.0, 1.0, 2.0, 5.0, 10.0];
    let mut med_bits = Vec::new();
    let mut med_jfi = Vec::new();
    for &alpha in &grid {
        let mut bits = Vec::new();
        let mut jfi = Vec::new();
        for seed in 0..50u64 {
            let ch = draw_channels(&s, seed);
            let res = if alpha == 0.0 {
                solve_zfba(&s, &ch).unwrap()
            } else {
                solve_cfba(&s, &ch, alpha).unwrap()
            };
            bits.push(res.bits.iter().sum::<f64>());
            jfi.push(res.jain);
        }
        med_bits.push(median(&bits).unwrap());
        med_jfi.push(median(&jfi).unwrap());
    }
    let bits_monotone = med_bits.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let stabilized = (med_bits[3] - med_bits[4]).abs() <= 0.05 * med_bits[3];
    let jfi_monotone = med_jfi.windows(2).all(|w| w[1] >= w[0] - 1e-9);
    let jfi_floor = med_jfi[2] >= 0.9 && med_jfi[3] >= 0.9 && med_jfi[4] >= 0.9;
    report(
        6,
        "fairness tradeoff",
        bits_monotone && stabilized && jfi_monotone && jfi_floor,
        &format!("median bits {med_bits:?}, median JFI {med_jfi:?}"),
    );
}

#[test]
fn criterion_07_maxmin_equalization() {
    let mut ok = true;
    let mut detail = String::new();
    for k in 2..=6usize {
        let s = spread_scenario_with(k);
        let mut rel_gaps = Vec::new();
        for seed in 0..30u64 {
            let ch = draw_channels(&s, seed);
            let res = solve_mfba(&s, &ch).unwrap();
            let max = res.bits.iter().fold(0.0f64, |a, b| a.max(*b));
            let min = res.bits.iter().fold(f64::INFINITY, |a, b| a.min(*b));
            let mean = res.bits.iter().sum::<f64>() / k as f64;
            rel_gaps.push((max - min) / mean);
        }
        let med = median(&rel_gaps).unwrap();
        if med > 1e-3 {
            ok = false;
            detail = format!("K={k}: median relative gap {med:.2e}");
        }
    }
    // at K=2 the throughput solver spreads rates the most
    let s = scenario_with(2);
    let gap = |bits: &[f64]| {
        bits.iter().fold(0.0f64, |a, b| a.max(*b))
            - bits.iter().fold(f64::INFINITY, |a, b| a.min(*b))
    };
    let mut zf_gaps = Vec::new();
    let mut cf_gaps = Vec::new();
    let mut mm_gaps = Vec::new();
    for seed in 0..30u64 {
        let ch = draw_channels(&s, seed);
        zf_gaps.push(gap(&solve_zfba(&s, &ch).unwrap().bits));
        cf_gaps.push(gap(&solve_cfba(&s, &ch, 1.0).unwrap().bits));
        mm_gaps.push(gap(&solve_mfba(&s, &ch).unwrap().bits));
    }
    let zf = median(&zf_gaps).unwrap();
    let cf = median(&cf_gaps).unwrap();
    let mm = median(&mm_gaps).unwrap();
    if !(zf > cf && zf > mm) {
        ok = false;
        detail = format!("K=2 median gaps: zf {zf:.3e} cf {cf:.3e} mm {mm:.3e}");
    }
    report(7, "max-min equalization", ok, &detail);
}

#[test]
fn criterion_08_benchmark_dominance() {
    let s = default_scenario();
    let mut ok = true;
    let mut detail = String::new();
    let mut zf_all = Vec::new();
    let mut nera_all = Vec::new();
    for seed in 0..50u64 {
        let ch = draw_channels(&s, seed);
        let zf = solve_zfba(&s, &ch).unwrap().objective;
        let fcoa = solve_fcoa(&s, &ch).unwrap().objective;
        let nera = solve_nera(&s, &ch).unwrap().objective;
        let flca = solve_flca(&s, &ch).unwrap().objective;
        let slack = zf * (1.0 + 1e-9);
        if fcoa > slack || nera > slack || flca > slack {
            ok = false;
            detail =
                format!("seed {seed}: zf {zf:.4e} fcoa {fcoa:.4e} nera {nera:.4e} flca {flca:.4e}");
        }
        zf_all.push(zf);
        nera_all.push(nera);
    }
    let med_zf = median(&zf_all).unwrap();
    let med_nera = median(&nera_all).unwrap();
    if med_nera >= med_zf {
        ok = false;
        detail = format!("median nera {med_nera:.4e} !< median zfba {med_zf:.4e}");
    }
    report(8, "benchmark dominance", ok, &detail);
}

#[test]
fn criterion_09_cer_approximation() {
    let s = default_scenario();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut detail = String::new();
    let mut checked = 0usize;
    let mut seed = 0u64;
    while checked < 100 {
        let ch = draw_channels(&s, seed);
        seed += 1;
        let base = CerSetting::from_scenario(&s, &ch).unwrap();
        for k in 0..base.num_ws {
            if checked >= 100 {
                break;
            }
            if cer::gap_exact(&base, k).unwrap() < 0.0 {
                ok = false;
                detail = format!("negative exact gap at seed {seed} ws {k}");
            }
            // pin noise 60 dB below the PS-only post-combining signal term
            let mut low_noise = base.clone();
            let kk = base.num_ws as f64;
            let ps_energy = (kk - 1.0) / kk
                * base.eh_efficiency
                * base.ps_power
                * base.ps_gain[k];
            low_noise.noise_power = kk * base.ap_gain[k] * ps_energy * 1e-6;
            let exact = cer::gap_exact(&low_noise, k).unwrap();
            let approx = cer::gap_approx(&low_noise, k).unwrap();
            if approx > 0.0 {
                worst = worst.max((exact - approx).abs() / approx);
            }
            checked += 1;
        }
    }
    if worst > 0.02 {
        ok = false;
        detail = format!("worst relative mismatch {worst:.2e}");
    }
    report(
        9,
        "CER approximation",
        ok,
        &format!("worst relative mismatch {worst:.2e} over {checked} settings {detail}"),
    );
}

#[test]
fn criterion_10_kernel_correctness() {
    let branch = -(-1.0f64).exp();
    let mut worst_w: f64 = 0.0;
    for i in 0..10_000usize {
        // geometric sweep from just above the branch point up to 1e6
        let u = i as f64 / 9_999.0;
        let z = branch + (1e6 - branch) * u.powi(3);
        let w = lambert_w0(z);
        let resid = (w * w.exp() - z).abs() / z.abs().max(1e-12);
        worst_w = worst_w.max(resid);
    }
    let mut worst_ft: f64 = 0.0;
    for i in 0..=3000usize {
        let y = 30.0 * i as f64 / 3000.0;
        let back = f_t(f_t_inverse(y));
        worst_ft = worst_ft.max((back - y).abs() / y.max(1e-9));
    }
    report(
        10,
        "kernel correctness",
        worst_w <= 1e-12 && worst_ft <= 1e-9,
        &format!("Lambert residual {worst_w:.2e}, round trip {worst_ft:.2e}"),
    );
}

fn random_interior(s: &Scenario, rng: &mut ChaCha8Rng) -> Allocation {
    let k = s.num_ws;
    let budget = s.slot_budget();
    let mut t: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let sum: f64 = t.iter().sum();
    for x in t.iter_mut() {
        *x *= 0.9 * budget / sum;
    }
    Allocation {
        ps_energy: t.iter().map(|ti| 0.5 * s.ps_power_max * ti).collect(),
        tx_energy: (0..k).map(|_| rng.gen_range(1e-6..3e-4)).collect(),
        cpu_freq: (0..k).map(|i| rng.gen_range(0.1..0.9) * s.cpu_freq_max[i]).collect(),
        t,
    }
}

#[test]
fn criterion_11_midpoint_concavity() {
    let s = default_scenario();
    let ch = draw_channels(&s, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = f64::NEG_INFINITY;
    for &alpha in &[0.0, 0.5, 1.0, 2.0] {
        let fairness = FairnessParam::Alpha(alpha);
        for _ in 0..250 {
            let a = random_interior(&s, &mut rng);
            let b = random_interior(&s, &mut rng);
            let mid = Allocation {
                t: a.t.iter().zip(&b.t).map(|(x, y)| 0.5 * (x + y)).collect(),
                ps_energy: a
                    .ps_energy
                    .iter()
                    .zip(&b.ps_energy)
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect(),
                tx_energy: a
                    .tx_energy
                    .iter()
                    .zip(&b.tx_energy)
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect(),
                cpu_freq: a
                    .cpu_freq
                    .iter()
                    .zip(&b.cpu_freq)
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect(),
            };
            let ua = oracle::objective_value(&s, &ch, fairness, &a).unwrap();
            let ub = oracle::objective_value(&s, &ch, fairness, &b).unwrap();
            let um = oracle::objective_value(&s, &ch, fairness, &mid).unwrap();
            let scale = ua.abs().max(ub.abs()).max(1.0);
            worst = worst.max((0.5 * (ua + ub) - um) / scale);
        }
    }
    report(
        11,
        "midpoint concavity",
        worst <= 1e-9,
        &format!("worst normalized convexity defect {worst:.2e}"),
    );
}

#[test]
fn criterion_12_gradient_check() {
    let s = default_scenario();
    let ch = draw_channels(&s, 22);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let alphas = [0.0, 0.5, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    for point in 0..100usize {
        let alpha = alphas[point % alphas.len()];
        let alloc = random_interior(&s, &mut rng);
        let grad = oracle::objective_gradient(&s, &ch, alpha, &alloc).unwrap();
        let k = s.num_ws;
        for block in [0usize, 2, 3] {
            for i in 0..k {
                let base = match block {
                    0 => alloc.t[i],
                    2 => alloc.tx_energy[i],
                    _ => alloc.cpu_freq[i],
                };
                let h = 1e-6 * base;
                let mut hi = alloc.clone();
                let mut lo = alloc.clone();
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
                let fairness = FairnessParam::Alpha(alpha);
                let fd = (oracle::objective_value(&s, &ch, fairness, &hi).unwrap()
                    - oracle::objective_value(&s, &ch, fairness, &lo).unwrap())
                    / (2.0 * h);
                let an = grad[block * k + i];
                worst = worst.max((fd - an).abs() / an.abs().max(1e-12));
            }
        }
    }
    report(
        12,
        "gradient check",
        worst <= 1e-5,
        &format!("worst relative gradient error {worst:.2e}"),
    );
}
