//! Antenna gains drift every round. Compares plain UMCB with the sliding-window
//! variant at the automatic window and at a few fixed windows.

use beamcharge::harness::config::WindowSetting;
use beamcharge::harness::{simulate, Algorithm, ScenarioConfig};

fn main() -> beamcharge::Result<()> {
    let mut cfg = ScenarioConfig::desk_drifting();
    cfg.rounds = 1000;
    cfg.algorithms = vec![Algorithm::Umcb, Algorithm::UmcbSw, Algorithm::GuaTrue];
    for window in [None, Some(50), Some(200)] {
        cfg.bandit.window = match window {
            None => WindowSetting::Named("auto".into()),
            Some(w) => WindowSetting::Rounds(w),
        };
        let out = simulate(&cfg)?;
        let tail = |a| out.run(a).map(|r| r.tail_mean(0.1)).unwrap_or(f64::NAN);
        println!(
            "window {:>4}: umcb {:.3}  umcb-sw {:.3}  gua-true {:.3}  (D {}, V {:.1})",
            out.window,
            tail(Algorithm::Umcb),
            tail(Algorithm::UmcbSw),
            tail(Algorithm::GuaTrue),
            out.variation.0,
            out.variation.1
        );
    }
    Ok(())
}
