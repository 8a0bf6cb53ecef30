//! The simulated field: grid, codebook, sensors and their channels.

use rand::Rng;

use super::config::{ScenarioConfig, ScenarioKind};
use super::rng::{stream, Purpose};
use crate::bandit::LocationSharing;
use crate::channel::{
    array_factor, build_codebook, sample_fade, AntennaGainState, Codebook, UlaConfig,
};
use crate::energy::{RoundSchedule, UtilitySpec};
use crate::error::Result;
use crate::geometry::{build_grid, distance, Area, GridLocation, Point};
use crate::oracle::{ExpectedPowerMatrix, RoundParams};
use crate::policy::PolicySet;

#[derive(Debug, Clone)]
pub struct World {
    pub seed: u64,
    pub area: Area,
    pub grid: Vec<GridLocation>,
    pub ula: UlaConfig,
    pub codebook: Codebook,
    pub policies: PolicySet,
    pub sensors: Vec<Point>,
    pub initial_gains: Vec<f64>,
    /// Deterministic received power per unit antenna gain, policy-major.
    pub pattern: Vec<f64>,
    /// Power mapped to a normalized value of 1.
    pub p_ref: f64,
    pub min_distance: f64,
    pub spec: UtilitySpec,
    pub params: RoundParams,
    pub context_fraction: f64,
}

impl World {
    pub fn build(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let area = cfg.area()?;
        let grid = build_grid(&area);
        let codebook = build_codebook(cfg.codebook.size, &cfg.ula)?;
        let policies = PolicySet::new(grid.len(), codebook.len());
        let sensors = match cfg.listed_positions() {
            Some(p) => p,
            None => (0..cfg.n_sensors())
                .map(|i| {
                    let mut rng = stream(cfg.seed, Purpose::SensorPlacement, &[i as u64]);
                    Point::new(
                        rng.random::<f64>() * area.width(),
                        rng.random::<f64>() * area.height(),
                    )
                })
                .collect(),
        };
        let n = sensors.len();
        let floor = cfg.channel.min_distance;
        let mut pattern = Vec::with_capacity(policies.len() * n);
        let mut closest = f64::INFINITY;
        for j in 0..policies.len() {
            let p = policies.policy(j);
            let charger = grid[p.location].center;
            let cw = &codebook.entries()[p.codeword];
            for &s in &sensors {
                let d = distance(charger, s);
                closest = closest.min(d);
                let cos = if d > 0.0 { (s.x - charger.x) / d } else { 0.0 };
                let d_eff = d.max(floor);
                pattern.push(array_factor(cos, cw, &cfg.ula) / (d_eff * d_eff));
            }
        }
        let gain = cfg.sensors.antenna_gain;
        let d_min = closest.max(floor);
        let p_ref = crate::channel::reference_power(cfg.ula.n_antennas, gain, d_min);
        let e = &cfg.energy;
        Ok(Self {
            seed: cfg.seed,
            area,
            grid,
            ula: cfg.ula,
            codebook,
            policies,
            sensors,
            initial_gains: vec![gain; n],
            pattern,
            p_ref,
            min_distance: floor,
            spec: UtilitySpec::new(e.utility.clone(), n)?,
            params: RoundParams {
                n_slots: e.slots,
                slot_duration: e.slot_duration,
                deadline: e.deadline,
                zeta: e.zeta,
                capacity: e.capacity,
                power_scale: e.efficiency * cfg.channel.peak_harvest_rate,
            },
            context_fraction: e.context_fraction,
        })
    }

    pub fn n_sensors(&self) -> usize {
        self.sensors.len()
    }

    /// Normalized expected powers for the given antenna gains.
    pub fn expected_matrix(&self, gains: &[f64]) -> ExpectedPowerMatrix {
        let n = self.n_sensors();
        let values = self
            .pattern
            .iter()
            .enumerate()
            .map(|(k, p)| (gains[k % n] * gains[k % n] * p / self.p_ref).min(1.0))
            .collect();
        ExpectedPowerMatrix::new(self.policies.len(), n, values).expect("entries clamped")
    }

    pub fn sharing(&self) -> LocationSharing {
        LocationSharing::new(self.policies, self.n_sensors(), self.pattern.clone())
            .expect("pattern sized by construction")
    }

    /// Initial energies for a round, uniform on `(0, fraction * Q]`.
    pub fn context(&self, round: usize) -> Vec<f64> {
        let top = self.context_fraction * self.params.capacity;
        (0..self.n_sensors())
            .map(|i| {
                let u: f64 =
                    stream(self.seed, Purpose::Context, &[round as u64, i as u64]).random();
                top * (1.0 - u)
            })
            .collect()
    }

    /// `|g|^2` for one (round, slot, location, sensor).
    pub fn fade_power(&self, round: usize, slot: usize, location: usize, sensor: usize) -> f64 {
        let key = [round as u64, slot as u64, location as u64, sensor as u64];
        sample_fade(&mut stream(self.seed, Purpose::Fade, &key)).norm_sqr()
    }

    /// Realized normalized powers `p_ij |g|^2` of a schedule, per slot and sensor.
    pub fn realize(
        &self,
        round: usize,
        truth: &ExpectedPowerMatrix,
        schedule: &RoundSchedule,
    ) -> Vec<Vec<f64>> {
        schedule
            .slots
            .iter()
            .enumerate()
            .map(|(slot, &j)| {
                let loc = self.policies.policy(j).location;
                (0..self.n_sensors())
                    .map(|i| truth.get(j, i) * self.fade_power(round, slot, loc, i))
                    .collect()
            })
            .collect()
    }

    /// Antenna gains for rounds `1..=rounds`; drift starts at round 2.
    pub fn gain_path(
        &self,
        kind: ScenarioKind,
        drift_rate: f64,
        rounds: usize,
    ) -> Result<Vec<Vec<f64>>> {
        let mut state = AntennaGainState::new(self.initial_gains.clone(), drift_rate)?;
        let mut path = Vec::with_capacity(rounds);
        for t in 1..=rounds {
            if t >= 2 && kind == ScenarioKind::Nonstationary {
                state.drift(&mut stream(self.seed, Purpose::Drift, &[t as u64]));
            }
            path.push(state.current.clone());
        }
        Ok(path)
    }
}

/// One row of the `beamscan` raster.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct BeamscanRow {
    pub location: usize,
    pub x: f64,
    pub y: f64,
    pub codeword: usize,
    pub beam_angle_deg: f64,
    pub sensor: usize,
    pub normalized_power: f64,
}

/// Expected normalized power of every policy at every sensor.
pub fn beamscan(world: &World) -> Vec<BeamscanRow> {
    let m = world.expected_matrix(&world.initial_gains);
    let mut rows = Vec::with_capacity(m.n_policies() * m.n_sensors());
    for j in 0..m.n_policies() {
        let p = world.policies.policy(j);
        let c = world.grid[p.location].center;
        for i in 0..m.n_sensors() {
            rows.push(BeamscanRow {
                location: p.location,
                x: c.x,
                y: c.y,
                codeword: p.codeword,
                beam_angle_deg: world.codebook.entries()[p.codeword].beam_angle.to_degrees(),
                sensor: i,
                normalized_power: m.get(j, i),
            });
        }
    }
    rows
}
