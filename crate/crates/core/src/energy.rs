//! Battery dynamics within one charging round and the utility of stored energy.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct SensorState {
    pub position: Point,
    pub capacity: f64,
    pub energy: f64,
    pub consumption_rate: f64,
    pub antenna_gain: f64,
}

impl SensorState {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=self.capacity).contains(&self.energy) {
            return Err(Error::Argument(format!(
                "energy {} outside [0, {}]",
                self.energy, self.capacity
            )));
        }
        if !(self.consumption_rate >= 0.0) {
            return Err(Error::Argument("negative consumption rate".into()));
        }
        Ok(())
    }
}

/// Shape of the utility as a function of the state of charge `sigma = q / Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtilityKind {
    /// `sqrt(sigma)`
    U1,
    /// `sqrt(sigma / (1 + sigma))`
    U2,
    /// Piecewise-linear through values at evenly spaced `sigma` in `[0, 1]`,
    /// flat beyond `sigma = 1`.
    Table(Vec<f64>),
}

/// Number of lattice points used to verify the utility shape.
const SHAPE_LATTICE: usize = 1000;
/// Lower end of the lattice used to estimate the Lipschitz constant; U1 has an
/// unbounded slope at zero.
pub const LIPSCHITZ_SIGMA_MIN: f64 = 0.01;

/// Per-sensor utility `(100 / N) * shape(q / Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilitySpec {
    pub kind: UtilityKind,
    pub n_sensors: usize,
    pub lipschitz_b: f64,
}

impl UtilitySpec {
    /// Validates that the utility is non-negative, non-decreasing and concave
    /// on a lattice over `[0, 1]`.
    pub fn new(kind: UtilityKind, n_sensors: usize) -> Result<Self> {
        if n_sensors == 0 {
            return Err(Error::Config("utility needs at least one sensor".into()));
        }
        if let UtilityKind::Table(v) = &kind {
            if v.len() < 2 || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(
                    "utility table needs at least two finite values".into(),
                ));
            }
        }
        let mut spec = Self {
            kind,
            n_sensors,
            lipschitz_b: 0.0,
        };
        spec.validate_shape()?;
        spec.lipschitz_b = lipschitz_bound(&spec);
        Ok(spec)
    }

    /// Checks non-negativity, monotonicity and concavity on the lattice.
    pub fn validate_shape(&self) -> Result<()> {
        let values: Vec<f64> = (0..SHAPE_LATTICE)
            .map(|k| self.value(k as f64 / (SHAPE_LATTICE - 1) as f64))
            .collect();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let tol = 1e-12 * scale;
        if values.iter().any(|&v| v < -tol) {
            return Err(Error::Model("utility must be non-negative".into()));
        }
        let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        if diffs.iter().any(|&d| d < -tol) {
            return Err(Error::Model("utility must be non-decreasing".into()));
        }
        if diffs.windows(2).any(|w| w[1] > w[0] + tol) {
            return Err(Error::Model(
                "utility must have non-increasing increments (concave)".into(),
            ));
        }
        Ok(())
    }

    pub fn prefactor(&self) -> f64 {
        100.0 / self.n_sensors as f64
    }

    fn shape(&self, sigma: f64) -> f64 {
        let s = sigma.max(0.0);
        match &self.kind {
            UtilityKind::U1 => s.sqrt(),
            UtilityKind::U2 => (s / (1.0 + s)).sqrt(),
            UtilityKind::Table(v) => {
                let last = v.len() - 1;
                let pos = s * last as f64;
                if pos >= last as f64 {
                    return v[last];
                }
                let k = pos.floor() as usize;
                let frac = pos - k as f64;
                v[k] + frac * (v[k + 1] - v[k])
            }
        }
    }

    fn shape_slope(&self, sigma: f64) -> f64 {
        let s = sigma.max(1e-300);
        match &self.kind {
            UtilityKind::U1 => 0.5 / s.sqrt(),
            UtilityKind::U2 => {
                let r = s / (1.0 + s);
                0.5 / r.sqrt() / ((1.0 + s) * (1.0 + s))
            }
            UtilityKind::Table(v) => {
                let last = v.len() - 1;
                let pos = s * last as f64;
                if pos >= last as f64 {
                    return 0.0;
                }
                let k = pos.floor() as usize;
                (v[k + 1] - v[k]) * last as f64
            }
        }
    }

    /// Utility at state of charge `sigma`. Accepts `sigma > 1` for the
    /// uncapped relaxation.
    pub fn value(&self, sigma: f64) -> f64 {
        self.prefactor() * self.shape(sigma)
    }

    /// Derivative with respect to `sigma` (right derivative for tables).
    pub fn slope(&self, sigma: f64) -> f64 {
        self.prefactor() * self.shape_slope(sigma)
    }

    /// Utility of `q` units of energy in a battery of size `capacity`, without
    /// the domain check of [`utility`].
    pub fn of_energy(&self, q: f64, capacity: f64) -> f64 {
        self.value(q / capacity)
    }
}

pub fn utility(spec: &UtilitySpec, q: f64, capacity: f64) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::Config(format!(
            "capacity {capacity} must be positive"
        )));
    }
    if !(0.0..=capacity).contains(&q) {
        return Err(Error::Argument(format!(
            "energy {q} outside [0, {capacity}]"
        )));
    }
    Ok(spec.of_energy(q, capacity))
}

/// Smallest `B` with `U(q2) - U(q1) <= B (q2 - q1) / Q` between consecutive
/// points of a 1000-point lattice on `[0.01, 1]`.
pub fn lipschitz_bound(spec: &UtilitySpec) -> f64 {
    let step = (1.0 - LIPSCHITZ_SIGMA_MIN) / (SHAPE_LATTICE - 1) as f64;
    (0..SHAPE_LATTICE - 1)
        .map(|k| {
            let a = LIPSCHITZ_SIGMA_MIN + k as f64 * step;
            (spec.value(a + step) - spec.value(a)) / step
        })
        .fold(0.0, f64::max)
}

/// Constant drain that leaves `x (1 - 1/zeta)` after a full round: `x / (zeta T_c)`.
pub fn consumption_rate(x: f64, zeta: f64, t_c: f64) -> Result<f64> {
    if !(zeta >= 1.0) {
        return Err(Error::Model(format!(
            "zeta = {zeta} < 1 would deplete sensors within a round"
        )));
    }
    if !(t_c > 0.0) {
        return Err(Error::Config(format!("deadline {t_c} must be positive")));
    }
    Ok(x / (zeta * t_c))
}

/// Energy left after `n` slots without charging.
pub fn uncharged_residual(x: f64, rate: f64, n: usize, t_u: f64) -> f64 {
    (x - n as f64 * rate * t_u).max(0.0)
}

/// Policy index per slot, checked against the deadline.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSchedule {
    pub slots: Vec<usize>,
    pub slot_duration: f64,
    pub deadline: f64,
}

impl RoundSchedule {
    pub fn new(slots: Vec<usize>, slot_duration: f64, deadline: f64) -> Result<Self> {
        check_deadline(slots.len(), slot_duration, deadline)?;
        Ok(Self {
            slots,
            slot_duration,
            deadline,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

pub(crate) fn check_deadline(slots: usize, slot_duration: f64, deadline: f64) -> Result<()> {
    if !(slot_duration > 0.0) {
        return Err(Error::Config(format!(
            "slot duration {slot_duration} must be positive"
        )));
    }
    if slots as f64 * slot_duration > deadline {
        return Err(Error::Deadline {
            slots,
            slot_duration,
            deadline,
        });
    }
    Ok(())
}

/// End-of-round energies plus bookkeeping of clipped energy.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub final_energy: Vec<f64>,
    /// Energy each sensor would hold had it never been charged.
    pub baseline: Vec<f64>,
    /// Energy discarded because the battery was full.
    pub overflow: Vec<f64>,
    /// Consumption that could not be served because the battery was empty.
    pub depletion: Vec<f64>,
}

/// Slot-by-slot battery update `q <- clamp(q - c t_u + p t_u, 0, Q)`.
///
/// `realized_powers[n][i]` is the power harvested by sensor `i` in slot `n`.
pub fn simulate_round(
    states: &[SensorState],
    schedule: &RoundSchedule,
    realized_powers: &[Vec<f64>],
) -> Result<RoundOutcome> {
    check_len(schedule.len(), realized_powers.len())?;
    let t_u = schedule.slot_duration;
    let n = states.len();
    let mut q: Vec<f64> = states.iter().map(|s| s.energy).collect();
    let mut overflow = vec![0.0; n];
    let mut depletion = vec![0.0; n];
    for powers in realized_powers {
        check_len(n, powers.len())?;
        for (i, s) in states.iter().enumerate() {
            let p = powers[i];
            if !(p >= 0.0) {
                return Err(Error::Argument(format!("negative harvested power {p}")));
            }
            let next = q[i] - s.consumption_rate * t_u + p * t_u;
            if next > s.capacity {
                overflow[i] += next - s.capacity;
                q[i] = s.capacity;
            } else if next < 0.0 {
                depletion[i] -= next;
                q[i] = 0.0;
            } else {
                q[i] = next;
            }
        }
    }
    let baseline = states
        .iter()
        .map(|s| uncharged_residual(s.energy, s.consumption_rate, schedule.len(), t_u))
        .collect();
    Ok(RoundOutcome {
        final_energy: q,
        baseline,
        overflow,
        depletion,
    })
}

/// `sum U(q_i) - sum U(C_i)`.
pub fn round_reward(
    spec: &UtilitySpec,
    capacity: f64,
    final_energy: &[f64],
    baseline: &[f64],
) -> f64 {
    final_energy
        .iter()
        .zip(baseline)
        .map(|(&q, &c)| spec.of_energy(q, capacity) - spec.of_energy(c, capacity))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sensor(energy: f64, capacity: f64, rate: f64) -> SensorState {
        SensorState {
            position: Point::default(),
            capacity,
            energy,
            consumption_rate: rate,
            antenna_gain: 1.0,
        }
    }

    #[test]
    fn consumption_examples() {
        assert_eq!(consumption_rate(100.0, 2.0, 1000.0).unwrap(), 0.05);
        assert_eq!(consumption_rate(0.0, 3.0, 10.0).unwrap(), 0.0);
        assert_eq!(consumption_rate(100.0, 1.0, 100.0).unwrap(), 1.0);
        assert!(matches!(
            consumption_rate(1.0, 0.5, 10.0),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let rate = consumption_rate(100.0, 2.0, 1000.0).unwrap();
        // Slot-wise summation oracle for the closed form x (1 - 1/zeta).
        let mut left = 100.0;
        for _ in 0..1000 {
            left -= rate * 1.0;
        }
        let r = uncharged_residual(100.0, rate, 1000, 1.0);
        assert!((r - left).abs() < 1e-9);
        assert!((r - 50.0).abs() < 1e-9);
        assert_eq!(uncharged_residual(100.0, rate, 0, 1.0), 100.0);
        assert_eq!(uncharged_residual(10.0, 50.0, 3, 1.0), 0.0);
    }

    #[test]
    fn utility_examples() {
        let u1 = UtilitySpec::new(UtilityKind::U1, 20).unwrap();
        assert!((utility(&u1, 125.0, 500.0).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(utility(&u1, 0.0, 500.0).unwrap(), 0.0);
        let u2 = UtilitySpec::new(UtilityKind::U2, 20).unwrap();
        assert!((utility(&u2, 500.0, 500.0).unwrap() - 3.5355339).abs() < 1e-6);
        assert!(utility(&u1, 501.0, 500.0).is_err());
        assert!(utility(&u1, -1.0, 500.0).is_err());
    }

    #[test]
    fn utility_shape_validation() {
        assert!(UtilitySpec::new(UtilityKind::Table(vec![0.0, 1.0, 1.5]), 1).is_ok());
        // Convex table is rejected.
        assert!(matches!(
            UtilitySpec::new(UtilityKind::Table(vec![0.0, 0.1, 1.0]), 1),
            Err(Error::Model(_))
        ));
        assert!(UtilitySpec::new(UtilityKind::Table(vec![1.0, 0.5]), 1).is_err());
        assert!(UtilitySpec::new(UtilityKind::Table(vec![-1.0, 0.0]), 1).is_err());
        assert!(UtilitySpec::new(UtilityKind::U1, 0).is_err());
    }

    #[test]
    fn reward_examples() {
        let u1 = UtilitySpec::new(UtilityKind::U1, 1).unwrap();
        assert_eq!(round_reward(&u1, 1.0, &[0.3, 0.4], &[0.3, 0.4]), 0.0);
        assert!((round_reward(&u1, 1.0, &[1.0], &[0.25]) - 50.0).abs() < 1e-12);
        let a = round_reward(&u1, 1.0, &[0.9, 0.2, 0.5], &[0.1, 0.2, 0.3]);
        let b = round_reward(&u1, 1.0, &[0.5, 0.9, 0.2], &[0.3, 0.1, 0.2]);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn lipschitz_examples() {
        // Brute-force lattice max slope.
        let u1 = UtilitySpec::new(UtilityKind::U1, 1).unwrap();
        let step = 0.99 / 999.0;
        let mut brute = 0.0f64;
        for k in 0..999 {
            let a = 0.01 + k as f64 * step;
            brute = brute.max(100.0 * ((a + step).sqrt() - a.sqrt()) / step);
        }
        assert!((u1.lipschitz_b - brute).abs() < 1e-9);
        assert!(u1.lipschitz_b.is_finite() && u1.lipschitz_b > 400.0 && u1.lipschitz_b < 500.0);

        let flat = UtilitySpec::new(UtilityKind::Table(vec![2.0, 2.0]), 1).unwrap();
        assert_eq!(flat.lipschitz_b, 0.0);

        let base = UtilitySpec::new(UtilityKind::Table(vec![0.0, 0.6, 1.0]), 1).unwrap();
        let scaled = UtilitySpec::new(UtilityKind::Table(vec![0.0, 1.8, 3.0]), 1).unwrap();
        assert!((scaled.lipschitz_b - 3.0 * base.lipschitz_b).abs() < 1e-9);
    }

    #[test]
    fn no_charge_round_matches_baseline() {
        let states = vec![sensor(100.0, 500.0, 0.05), sensor(30.0, 500.0, 0.015)];
        let sched = RoundSchedule::new(vec![0; 1000], 1.0, 1000.0).unwrap();
        let out = simulate_round(&states, &sched, &vec![vec![0.0, 0.0]; 1000]).unwrap();
        for (q, c) in out.final_energy.iter().zip(&out.baseline) {
            assert!((q - c).abs() < 1e-9);
        }
    }

    #[test]
    fn balanced_charging_holds_level() {
        let states = vec![sensor(80.0, 500.0, 0.2)];
        let sched = RoundSchedule::new(vec![0; 10], 2.0, 20.0).unwrap();
        let out = simulate_round(&states, &sched, &vec![vec![0.2]; 10]).unwrap();
        assert!((out.final_energy[0] - 80.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_recorded() {
        let states = vec![sensor(80.0, 100.0, 0.0)];
        let sched = RoundSchedule::new(vec![0; 2], 1.0, 2.0).unwrap();
        let out = simulate_round(&states, &sched, &[vec![1000.0], vec![0.0]]).unwrap();
        assert_eq!(out.final_energy[0], 100.0);
        assert!((out.overflow[0] - 980.0).abs() < 1e-12);
    }

    #[test]
    fn shape_errors() {
        let states = vec![sensor(80.0, 100.0, 0.0)];
        let sched = RoundSchedule::new(vec![0; 2], 1.0, 2.0).unwrap();
        assert!(simulate_round(&states, &sched, &[vec![1.0]]).is_err());
        assert!(simulate_round(&states, &sched, &[vec![1.0, 2.0], vec![0.0, 0.0]]).is_err());
        assert!(matches!(
            RoundSchedule::new(vec![0; 3], 1.0, 2.0),
            Err(Error::Deadline { .. })
        ));
    }

    proptest! {
        #[test]
        fn energy_is_conserved_per_round(
            x in 0.0f64..100.0,
            rate in 0.0f64..5.0,
            powers in proptest::collection::vec(0.0f64..30.0, 1..20),
        ) {
            let cap = 100.0;
            let states = vec![sensor(x, cap, rate)];
            let n = powers.len();
            let sched = RoundSchedule::new(vec![0; n], 1.0, n as f64).unwrap();
            let rows: Vec<Vec<f64>> = powers.iter().map(|&p| vec![p]).collect();
            let out = simulate_round(&states, &sched, &rows).unwrap();
            let harvested: f64 = powers.iter().sum();
            let lhs = out.final_energy[0] - x;
            let rhs = harvested - rate * n as f64 - out.overflow[0] + out.depletion[0];
            prop_assert!((lhs - rhs).abs() < 1e-9);
            prop_assert!(out.overflow[0] >= 0.0 && out.depletion[0] >= 0.0);
            prop_assert!((0.0..=cap).contains(&out.final_energy[0]));
        }

        #[test]
        fn reward_non_negative_when_charging(
            xs in proptest::collection::vec(1.0f64..150.0, 1..5),
            seed_powers in proptest::collection::vec(0.0f64..20.0, 1..40),
        ) {
            let u = UtilitySpec::new(UtilityKind::U1, xs.len()).unwrap();
            let states: Vec<SensorState> = xs
                .iter()
                .map(|&x| sensor(x, 500.0, consumption_rate(x, 2.0, 40.0).unwrap()))
                .collect();
            let n_slots = 40;
            let rows: Vec<Vec<f64>> = (0..n_slots)
                .map(|s| (0..xs.len()).map(|i| seed_powers[(s * 7 + i) % seed_powers.len()]).collect())
                .collect();
            let sched = RoundSchedule::new(vec![0; n_slots], 1.0, 40.0).unwrap();
            let out = simulate_round(&states, &sched, &rows).unwrap();
            prop_assert!(round_reward(&u, 500.0, &out.final_energy, &out.baseline) >= -1e-12);
        }
    }
}
