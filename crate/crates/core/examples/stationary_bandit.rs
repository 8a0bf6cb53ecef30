//! UMCB learning the desk scenario from scratch, against GUA with known
//! powers and the epsilon-greedy and max-energy baselines.

use beamcharge::harness::{simulate, Algorithm, ScenarioConfig};

fn main() -> beamcharge::Result<()> {
    let mut cfg = ScenarioConfig::desk();
    cfg.rounds = 600;
    cfg.algorithms = vec![
        Algorithm::Umcb,
        Algorithm::Eg,
        Algorithm::Gmq,
        Algorithm::GuaTrue,
    ];
    let out = simulate(&cfg)?;
    println!("{:<9} {:>10} {:>14}", "algorithm", "final 10%", "UB regret");
    for run in &out.runs {
        println!(
            "{:<9} {:>10.3} {:>14.1}",
            run.algorithm.name(),
            run.tail_mean(0.1),
            run.regret.upper_bound.last().copied().unwrap_or(0.0)
        );
    }
    Ok(())
}
