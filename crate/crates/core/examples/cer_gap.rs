//! Quantify how much offloading rate each sensor gains from harvesting its
//! peers' transmissions, and check the closed-form approximation of that gain
//! against the exact difference.

use wpmec::cer::{self, CerSetting};
use wpmec::scenario::{default_scenario, draw_channels};

fn main() {
    let s = default_scenario();
    let ch = draw_channels(&s, 1);
    let setting = CerSetting::from_scenario(&s, &ch).expect("valid setting");

    println!("ws   rate w/o recycling   rate with   gap exact   gap approx");
    for k in 0..setting.num_ws {
        let without = cer::rate_without_er(&setting, k).unwrap();
        let with = cer::rate_with_er(&setting, k).unwrap();
        let exact = cer::gap_exact(&setting, k).unwrap();
        let approx = cer::gap_approx(&setting, k).unwrap();
        println!("{k:2}   {without:18.4}   {with:9.4}   {exact:9.5}   {approx:10.5}");
    }

    // the approximation becomes exact as noise vanishes relative to signal
    let mut quiet = setting.clone();
    quiet.noise_power *= 1e-6;
    println!();
    println!("with noise lowered by 60 dB:");
    for k in 0..quiet.num_ws {
        let exact = cer::gap_exact(&quiet, k).unwrap();
        let approx = cer::gap_approx(&quiet, k).unwrap();
        let rel = (exact - approx).abs() / approx.max(1e-300);
        println!("ws {k}: exact {exact:.6} approx {approx:.6} rel diff {rel:.2e}");
    }
}
