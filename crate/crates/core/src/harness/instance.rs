//! Standalone oracle instances read by the `oracle` subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::energy::{UtilityKind, UtilitySpec};
use crate::error::Result;
use crate::oracle::{
    exhaustive_optimum, gmq, gua, schedule_value, theorem2_condition, upper_bound_p1,
    ExpectedPowerMatrix, RoundParams, EXHAUSTIVE_LIMIT,
};

/// Expected powers plus round parameters, stored as JSON or TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleInstance {
    /// `powers[j][i]`: normalized power of policy `j` at sensor `i`.
    pub powers: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    #[serde(default = "u1")]
    pub utility: UtilityKind,
    pub capacity: f64,
    pub zeta: f64,
    pub n_slots: usize,
    pub slot_duration: f64,
    pub deadline: f64,
    pub power_scale: f64,
}

fn u1() -> UtilityKind {
    UtilityKind::U1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub schedule: Vec<usize>,
    pub gua_reward: f64,
    pub gmq_reward: f64,
    pub p1_bound: f64,
    pub p1_allocation: Vec<f64>,
    /// `gua_reward / p1_bound`, a lower bound on the true approximation ratio.
    pub ratio_to_bound: f64,
    /// Exhaustive optimum when the schedule space is small enough.
    pub optimum: Option<f64>,
    pub guarantee_applies: bool,
}

impl OracleInstance {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        if path.extension().is_some_and(|e| e == "toml") {
            Ok(toml::from_str(&text)?)
        } else {
            serde_json::from_str(&text)
                .map_err(|e| crate::Error::Config(format!("instance parse error: {e}")))
        }
    }

    pub fn params(&self) -> RoundParams {
        RoundParams {
            n_slots: self.n_slots,
            slot_duration: self.slot_duration,
            deadline: self.deadline,
            zeta: self.zeta,
            capacity: self.capacity,
            power_scale: self.power_scale,
        }
    }

    pub fn solve(&self) -> Result<OracleReport> {
        let powers = ExpectedPowerMatrix::from_rows(&self.powers)?;
        let spec = UtilitySpec::new(self.utility.clone(), self.initial.len())?;
        let params = self.params();
        let schedule = gua(&powers, &self.initial, &spec, &params)?;
        let gua_reward = schedule_value(&powers, &self.initial, &spec, &params, &schedule)?;
        let energy_greedy = gmq(&powers, &params)?;
        let gmq_reward = schedule_value(&powers, &self.initial, &spec, &params, &energy_greedy)?;
        let (alloc, p1_bound) = upper_bound_p1(&powers, &self.initial, &spec, &params)?;
        let space = (powers.n_policies() as f64).powi(params.n_slots as i32);
        let optimum = if space <= EXHAUSTIVE_LIMIT {
            Some(exhaustive_optimum(&powers, &self.initial, &spec, &params)?.1)
        } else {
            None
        };
        let rates = params.rates(&self.initial)?;
        Ok(OracleReport {
            schedule: schedule.slots,
            gua_reward,
            gmq_reward,
            p1_bound,
            p1_allocation: alloc.t,
            ratio_to_bound: if p1_bound > 0.0 {
                gua_reward / p1_bound
            } else {
                1.0
            },
            optimum,
            guarantee_applies: theorem2_condition(
                &spec,
                params.zeta,
                &rates,
                params.deadline,
                params.capacity,
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_report() {
        let inst = OracleInstance {
            powers: vec![vec![0.9, 0.1], vec![0.1, 0.8], vec![0.5, 0.5]],
            initial: vec![10.0, 40.0],
            utility: UtilityKind::U1,
            capacity: 100.0,
            zeta: 2.0,
            n_slots: 4,
            slot_duration: 1.0,
            deadline: 4.0,
            power_scale: 10.0,
        };
        let r = inst.solve().unwrap();
        assert_eq!(r.schedule.len(), 4);
        let opt = r.optimum.unwrap();
        assert!(r.gua_reward <= opt + 1e-9 && opt <= r.p1_bound + 1e-9);
        assert!(r.guarantee_applies);
        let json = serde_json::to_string(&inst).unwrap();
        let back: OracleInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, inst);
    }
}
