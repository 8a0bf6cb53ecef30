//! Utility of GUA and GMQ as the battery capacity grows.

use beamcharge::harness::{sweep, Algorithm, ScenarioConfig, SweepAxis};

fn main() -> beamcharge::Result<()> {
    let mut cfg = ScenarioConfig::desk();
    cfg.rounds = 400;
    cfg.algorithms = vec![Algorithm::Gmq, Algorithm::GuaTrue];
    for row in sweep(&cfg, SweepAxis::Q, &[100.0, 200.0, 300.0, 500.0], false)? {
        println!(
            "Q={:<5} {:<9} {:.3}",
            row.value, row.algorithm, row.mean_utility
        );
    }
    Ok(())
}
