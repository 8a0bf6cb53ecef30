//! Full-information round schedulers.
//!
//! All schedulers work on an [`ExpectedPowerMatrix`] of normalized powers; the
//! physical harvest of one slot is `p * power_scale * slot_duration`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::energy::{
    check_deadline, consumption_rate, round_reward, simulate_round, uncharged_residual,
    RoundSchedule, SensorState, UtilitySpec,
};
use crate::error::{check_len, Error, Result};
use crate::geometry::Point;

/// Normalized expected power `p_i(pi_j)` for every policy `j` and sensor `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedPowerMatrix {
    n_policies: usize,
    n_sensors: usize,
    values: Vec<f64>,
}

impl ExpectedPowerMatrix {
    /// `values` is policy-major: `values[j * n_sensors + i]`.
    pub fn new(n_policies: usize, n_sensors: usize, values: Vec<f64>) -> Result<Self> {
        check_len(n_policies * n_sensors, values.len())?;
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Argument(format!(
                "normalized power {bad} outside [0, 1]"
            )));
        }
        Ok(Self {
            n_policies,
            n_sensors,
            values,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_sensors = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * n_sensors);
        for r in rows {
            check_len(n_sensors, r.len())?;
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), n_sensors, values)
    }

    pub fn n_policies(&self) -> usize {
        self.n_policies
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn get(&self, policy: usize, sensor: usize) -> f64 {
        self.values[policy * self.n_sensors + sensor]
    }

    pub fn row(&self, policy: usize) -> &[f64] {
        &self.values[policy * self.n_sensors..(policy + 1) * self.n_sensors]
    }
}

/// Per-round scheduling constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundParams {
    pub n_slots: usize,
    pub slot_duration: f64,
    pub deadline: f64,
    pub zeta: f64,
    pub capacity: f64,
    /// Physical power corresponding to a normalized power of 1.
    pub power_scale: f64,
}

impl RoundParams {
    pub fn validate(&self) -> Result<()> {
        check_deadline(self.n_slots, self.slot_duration, self.deadline)?;
        if !(self.capacity > 0.0) || !(self.power_scale >= 0.0) {
            return Err(Error::Config(
                "capacity must be positive and power scale non-negative".into(),
            ));
        }
        if !(self.zeta >= 1.0) {
            return Err(Error::Model(format!("zeta = {} < 1", self.zeta)));
        }
        Ok(())
    }

    pub fn rates(&self, initial: &[f64]) -> Result<Vec<f64>> {
        initial
            .iter()
            .map(|&x| consumption_rate(x, self.zeta, self.deadline))
            .collect()
    }

    pub fn slot_energy(&self, p: f64) -> f64 {
        p * self.power_scale * self.slot_duration
    }
}

fn check_instance(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    params: &RoundParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    if powers.n_policies() == 0 {
        return Err(Error::Argument("empty policy set".into()));
    }
    check_len(powers.n_sensors(), initial.len())?;
    if let Some(x) = initial
        .iter()
        .find(|x| !(0.0..=params.capacity).contains(*x))
    {
        return Err(Error::Argument(format!(
            "initial energy {x} outside [0, {}]",
            params.capacity
        )));
    }
    params.rates(initial)
}

/// Battery trajectory of a schedule being built slot by slot.
pub struct GreedyState<'a> {
    powers: &'a ExpectedPowerMatrix,
    spec: &'a UtilitySpec,
    params: &'a RoundParams,
    rates: Vec<f64>,
    initial: Vec<f64>,
    energy: Vec<f64>,
    /// End-of-round energy if no further slot charges.
    base: Vec<f64>,
    base_utility: Vec<f64>,
    filled: usize,
}

impl<'a> GreedyState<'a> {
    /// Empty schedule for the given instance.
    pub fn start(
        powers: &'a ExpectedPowerMatrix,
        initial: &[f64],
        spec: &'a UtilitySpec,
        params: &'a RoundParams,
    ) -> Result<Self> {
        let rates = check_instance(powers, initial, params)?;
        Ok(Self::new(powers, initial, spec, params, rates))
    }

    fn new(
        powers: &'a ExpectedPowerMatrix,
        initial: &[f64],
        spec: &'a UtilitySpec,
        params: &'a RoundParams,
        rates: Vec<f64>,
    ) -> Self {
        let mut t = Self {
            powers,
            spec,
            params,
            rates,
            initial: initial.to_vec(),
            energy: initial.to_vec(),
            base: vec![0.0; initial.len()],
            base_utility: vec![0.0; initial.len()],
            filled: 0,
        };
        t.refresh_base();
        t
    }

    fn refresh_base(&mut self) {
        let remaining = self.params.n_slots - self.filled;
        for i in 0..self.energy.len() {
            self.base[i] = uncharged_residual(
                self.energy[i],
                self.rates[i],
                remaining,
                self.params.slot_duration,
            );
            self.base_utility[i] = self.spec.of_energy(self.base[i], self.params.capacity);
        }
    }

    fn next_energy(&self, j: usize, i: usize) -> f64 {
        let q = self.energy[i] - self.rates[i] * self.params.slot_duration
            + self.params.slot_energy(self.powers.get(j, i));
        q.clamp(0.0, self.params.capacity)
    }

    /// Exact increase of the round objective if policy `j` fills the next slot.
    pub fn gain(&self, j: usize) -> f64 {
        let remaining = self.params.n_slots - self.filled - 1;
        let (cap, t_u) = (self.params.capacity, self.params.slot_duration);
        (0..self.energy.len())
            .map(|i| {
                let fin = uncharged_residual(self.next_energy(j, i), self.rates[i], remaining, t_u);
                self.spec.of_energy(fin, cap) - self.base_utility[i]
            })
            .sum()
    }

    /// Gain ignoring the battery cap. Bounds `gain(j)` now and at every later
    /// slot, since the uncharged end energy only grows along the trajectory.
    fn uncapped_gain(&self, j: usize) -> f64 {
        let cap = self.params.capacity;
        (0..self.energy.len())
            .map(|i| {
                let h = self.params.slot_energy(self.powers.get(j, i));
                self.spec.of_energy(self.base[i] + h, cap) - self.base_utility[i]
            })
            .sum()
    }

    /// Policy with the largest exact gain, lowest index on ties.
    pub fn best(&self) -> usize {
        let mut best = 0;
        let mut best_gain = f64::NEG_INFINITY;
        for j in 0..self.powers.n_policies() {
            let g = self.gain(j);
            if g > best_gain {
                best = j;
                best_gain = g;
            }
        }
        best
    }

    pub fn filled(&self) -> usize {
        self.filled
    }

    /// Objective of the slots filled so far, later slots left empty.
    pub fn value(&self) -> f64 {
        let cap = self.params.capacity;
        let t_u = self.params.slot_duration;
        (0..self.energy.len())
            .map(|i| {
                let c =
                    uncharged_residual(self.initial[i], self.rates[i], self.params.n_slots, t_u);
                self.base_utility[i] - self.spec.of_energy(c, cap)
            })
            .sum()
    }

    pub fn push(&mut self, j: usize) {
        for i in 0..self.energy.len() {
            self.energy[i] = self.next_energy(j, i);
        }
        self.filled += 1;
        self.refresh_base();
    }
}

/// Greedy utility algorithm: each slot takes the policy with the largest
/// marginal increase of `sum U(q_end) - sum U(C_end)`, battery cap enforced.
/// Ties go to the lowest policy index.
pub fn gua(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<RoundSchedule> {
    let rates = check_instance(powers, initial, params)?;
    let mut traj = GreedyState::new(powers, initial, spec, params, rates);
    let mut slots = Vec::with_capacity(params.n_slots);
    for _ in 0..params.n_slots {
        let best = traj.best();
        traj.push(best);
        slots.push(best);
    }
    RoundSchedule::new(slots, params.slot_duration, params.deadline)
}

#[derive(Debug, Clone, Copy)]
struct Bound {
    ub: f64,
    policy: usize,
}

impl PartialEq for Bound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ub
            .total_cmp(&other.ub)
            .then_with(|| other.policy.cmp(&self.policy))
    }
}

/// Same output as [`gua`], evaluating only candidates whose cached upper bound
/// can still beat the best exact gain found so far.
pub fn gua_lazy(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<RoundSchedule> {
    let rates = check_instance(powers, initial, params)?;
    let mut traj = GreedyState::new(powers, initial, spec, params, rates);
    let mut heap: BinaryHeap<Bound> = (0..powers.n_policies())
        .map(|j| Bound {
            ub: traj.uncapped_gain(j),
            policy: j,
        })
        .collect();
    let mut slots = Vec::with_capacity(params.n_slots);
    let mut popped = Vec::new();
    for _ in 0..params.n_slots {
        let mut best = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        while let Some(top) = heap.peek() {
            // Rounding slack keeps the bound comparison conservative.
            let slack = 1e-9 * best_gain.abs().max(1e-12);
            if best != usize::MAX && top.ub < best_gain - slack {
                break;
            }
            let Bound { policy: j, .. } = heap.pop().expect("peeked");
            let g = traj.gain(j);
            if g > best_gain || (g == best_gain && j < best) {
                best = j;
                best_gain = g;
            }
            popped.push(Bound {
                ub: traj.uncapped_gain(j),
                policy: j,
            });
        }
        heap.extend(popped.drain(..));
        traj.push(best);
        slots.push(best);
    }
    RoundSchedule::new(slots, params.slot_duration, params.deadline)
}

/// Greedy max-energy baseline: every slot takes the policy with the largest
/// total received power, ignoring battery state. Ties go to the lowest index.
pub fn gmq(powers: &ExpectedPowerMatrix, params: &RoundParams) -> Result<RoundSchedule> {
    params.validate()?;
    if powers.n_policies() == 0 {
        return Err(Error::Argument("empty policy set".into()));
    }
    let mut best = 0;
    let mut best_total = f64::NEG_INFINITY;
    for j in 0..powers.n_policies() {
        let total: f64 = powers.row(j).iter().sum();
        if total > best_total {
            best = j;
            best_total = total;
        }
    }
    RoundSchedule::new(
        vec![best; params.n_slots],
        params.slot_duration,
        params.deadline,
    )
}

/// Round objective of a schedule played on the expected powers.
pub fn schedule_value(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    spec: &UtilitySpec,
    params: &RoundParams,
    schedule: &RoundSchedule,
) -> Result<f64> {
    let rates = check_instance(powers, initial, params)?;
    let states: Vec<SensorState> = initial
        .iter()
        .zip(&rates)
        .map(|(&x, &c)| SensorState {
            position: Point::default(),
            capacity: params.capacity,
            energy: x,
            consumption_rate: c,
            antenna_gain: 1.0,
        })
        .collect();
    let rows: Vec<Vec<f64>> = schedule
        .slots
        .iter()
        .map(|&j| {
            if j >= powers.n_policies() {
                return Err(Error::Argument(format!("policy {j} out of range")));
            }
            Ok(powers
                .row(j)
                .iter()
                .map(|&p| p * params.power_scale)
                .collect())
        })
        .collect::<Result<_>>()?;
    let out = simulate_round(&states, schedule, &rows)?;
    Ok(round_reward(
        spec,
        params.capacity,
        &out.final_energy,
        &out.baseline,
    ))
}

/// Charging time per policy in the continuous relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAllocation {
    pub t: Vec<f64>,
}

impl ContinuousAllocation {
    pub fn total(&self) -> f64 {
        self.t.iter().sum()
    }
}

/// Relative duality gap at which the conditional-gradient solver stops.
pub const P1_GAP_TOL: f64 = 1e-6;
pub const P1_MAX_ITERS: usize = 10_000;

struct Relaxation<'a> {
    powers: &'a ExpectedPowerMatrix,
    spec: &'a UtilitySpec,
    capacity: f64,
    /// Converts charging time times normalized power into state of charge.
    sigma_per_time: f64,
    base_sigma: Vec<f64>,
    base_value: f64,
}

impl Relaxation<'_> {
    fn sigma(&self, t: &[f64]) -> Vec<f64> {
        let mut s = self.base_sigma.clone();
        for (j, &tj) in t.iter().enumerate() {
            if tj != 0.0 {
                for (i, si) in s.iter_mut().enumerate() {
                    *si += tj * self.powers.get(j, i) * self.sigma_per_time;
                }
            }
        }
        s
    }

    fn value_at_sigma(&self, s: &[f64]) -> f64 {
        s.iter().map(|&x| self.spec.value(x)).sum::<f64>() - self.base_value
    }

    fn gradient(&self, s: &[f64]) -> Vec<f64> {
        let slopes: Vec<f64> = s.iter().map(|&x| self.spec.slope(x)).collect();
        (0..self.powers.n_policies())
            .map(|j| {
                self.powers
                    .row(j)
                    .iter()
                    .zip(&slopes)
                    .map(|(p, d)| p * d)
                    .sum::<f64>()
                    * self.sigma_per_time
            })
            .collect()
    }

    /// Direction of state-of-charge change for a move `d` in time space.
    fn sigma_direction(&self, d: &[f64]) -> Vec<f64> {
        self.sigma(d)
            .iter()
            .zip(&self.base_sigma)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// Continuous-time, uncapped-battery relaxation of a round:
/// maximize `sum U(C_i + sum_j t_j p_ij) - sum U(C_i)` over `t >= 0`,
/// `sum t <= T_c`.
///
/// Solved by away-step conditional gradient with exact line search over the
/// vertices `{0, T_c e_j}`. Returns the better of the final iterate and the
/// best vertex.
pub fn upper_bound_p1(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<(ContinuousAllocation, f64)> {
    spec.validate_shape()?;
    let rates = check_instance(powers, initial, params)?;
    let t_c = params.deadline;
    let m = powers.n_policies();
    let base_sigma: Vec<f64> = initial
        .iter()
        .zip(&rates)
        .map(|(&x, &c)| (x - c * t_c).max(0.0) / params.capacity)
        .collect();
    let relax = Relaxation {
        powers,
        spec,
        capacity: params.capacity,
        sigma_per_time: params.power_scale / params.capacity,
        base_value: base_sigma.iter().map(|&s| spec.value(s)).sum(),
        base_sigma,
    };
    debug_assert!(relax.capacity > 0.0);

    let vertex = |k: usize| -> Vec<f64> {
        let mut v = vec![0.0; m];
        if k > 0 {
            v[k - 1] = t_c;
        }
        v
    };
    // Best vertex; index 0 is the origin.
    let mut best_vertex = 0;
    let mut best_vertex_value = 0.0;
    for k in 1..=m {
        let val = relax.value_at_sigma(&relax.sigma(&vertex(k)));
        if val > best_vertex_value {
            best_vertex = k;
            best_vertex_value = val;
        }
    }

    let mut weights = vec![0.0; m + 1];
    weights[best_vertex] = 1.0;
    let mut t = vertex(best_vertex);
    let mut sigma = relax.sigma(&t);
    let mut value = relax.value_at_sigma(&sigma);

    for _ in 0..P1_MAX_ITERS {
        let g = relax.gradient(&sigma);
        let vertex_score = |k: usize| if k == 0 { 0.0 } else { t_c * g[k - 1] };
        let g_dot_t: f64 = g.iter().zip(&t).map(|(a, b)| a * b).sum();
        let fw = (0..=m)
            .max_by(|&a, &b| vertex_score(a).total_cmp(&vertex_score(b)).then(b.cmp(&a)))
            .expect("non-empty");
        let fw_gap = vertex_score(fw) - g_dot_t;
        if fw_gap <= P1_GAP_TOL * value.abs().max(1e-300) {
            break;
        }
        let away = (0..=m)
            .filter(|&k| weights[k] > 0.0)
            .min_by(|&a, &b| vertex_score(a).total_cmp(&vertex_score(b)).then(a.cmp(&b)))
            .expect("active set is never empty");
        let away_gap = g_dot_t - vertex_score(away);

        let (direction, step_max, is_fw) = if fw_gap >= away_gap {
            let s = vertex(fw);
            (
                s.iter().zip(&t).map(|(a, b)| a - b).collect::<Vec<_>>(),
                1.0,
                true,
            )
        } else {
            let a = vertex(away);
            let lam = weights[away];
            (
                t.iter().zip(&a).map(|(x, y)| x - y).collect::<Vec<_>>(),
                lam / (1.0 - lam),
                false,
            )
        };
        let ds = relax.sigma_direction(&direction);
        let slope_at = |step: f64| -> f64 {
            sigma
                .iter()
                .zip(&ds)
                .map(|(s, d)| spec.slope(s + step * d) * d)
                .sum()
        };
        let step = if slope_at(step_max) >= 0.0 {
            step_max
        } else {
            let (mut lo, mut hi) = (0.0, step_max);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if slope_at(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-16 * step_max {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        if step <= 0.0 {
            break;
        }

        if is_fw {
            for w in weights.iter_mut() {
                *w *= 1.0 - step;
            }
            weights[fw] += step;
        } else {
            for w in weights.iter_mut() {
                *w *= 1.0 + step;
            }
            weights[away] -= step;
            if step == step_max {
                weights[away] = 0.0;
            }
        }
        for (x, d) in t.iter_mut().zip(&direction) {
            *x = (*x + step * d).max(0.0);
        }
        sigma = relax.sigma(&t);
        let next = relax.value_at_sigma(&sigma);
        if next < value && (value - next) <= 1e-15 * value.abs() {
            break;
        }
        value = next;
    }

    if best_vertex_value > value {
        return Ok((
            ContinuousAllocation {
                t: vertex(best_vertex),
            },
            best_vertex_value,
        ));
    }
    Ok((ContinuousAllocation { t }, value))
}

/// Sufficient condition for the `(1/2 - 1/2e)` guarantee of [`gua`]:
/// `zeta >= 2`, or `U(zeta c T_c) <= 2 U((zeta - 1) c T_c)` for every sensor.
pub fn theorem2_condition(
    spec: &UtilitySpec,
    zeta: f64,
    rates: &[f64],
    t_c: f64,
    capacity: f64,
) -> bool {
    if zeta >= 2.0 {
        return true;
    }
    rates.iter().all(|&c| {
        spec.of_energy(zeta * c * t_c, capacity)
            <= 2.0 * spec.of_energy((zeta - 1.0) * c * t_c, capacity)
    })
}

/// Approximation ratio `1/2 - 1/(2e)` of the greedy scheduler.
pub fn gua_ratio() -> f64 {
    0.5 - 0.5 / std::f64::consts::E
}

/// Largest schedule space [`exhaustive_optimum`] will enumerate.
pub const EXHAUSTIVE_LIMIT: f64 = 2e7;

/// Best schedule by enumerating all `|policies|^n_slots` sequences. Only for
/// tiny instances.
pub fn exhaustive_optimum(
    powers: &ExpectedPowerMatrix,
    initial: &[f64],
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<(RoundSchedule, f64)> {
    let rates = check_instance(powers, initial, params)?;
    let m = powers.n_policies();
    if (m as f64).powi(params.n_slots as i32) > EXHAUSTIVE_LIMIT {
        return Err(Error::Argument(format!(
            "{m}^{} schedules is too many to enumerate",
            params.n_slots
        )));
    }
    let baseline: f64 = initial
        .iter()
        .zip(&rates)
        .map(|(&x, &c)| {
            spec.of_energy(
                uncharged_residual(x, c, params.n_slots, params.slot_duration),
                params.capacity,
            )
        })
        .sum();

    struct Search<'a> {
        powers: &'a ExpectedPowerMatrix,
        spec: &'a UtilitySpec,
        params: &'a RoundParams,
        rates: &'a [f64],
        current: Vec<usize>,
        best: Vec<usize>,
        best_value: f64,
    }

    impl Search<'_> {
        fn go(&mut self, energy: &[f64]) {
            if self.current.len() == self.params.n_slots {
                let v: f64 = energy
                    .iter()
                    .map(|&q| self.spec.of_energy(q, self.params.capacity))
                    .sum();
                if v > self.best_value {
                    self.best_value = v;
                    self.best = self.current.clone();
                }
                return;
            }
            let t_u = self.params.slot_duration;
            for j in 0..self.powers.n_policies() {
                let next: Vec<f64> = energy
                    .iter()
                    .enumerate()
                    .map(|(i, &q)| {
                        (q - self.rates[i] * t_u + self.params.slot_energy(self.powers.get(j, i)))
                            .clamp(0.0, self.params.capacity)
                    })
                    .collect();
                self.current.push(j);
                self.go(&next);
                self.current.pop();
            }
        }
    }

    let mut search = Search {
        powers,
        spec,
        params,
        rates: &rates,
        current: Vec::with_capacity(params.n_slots),
        best: Vec::new(),
        best_value: f64::NEG_INFINITY,
    };
    search.go(initial);
    Ok((
        RoundSchedule::new(search.best, params.slot_duration, params.deadline)?,
        search.best_value - baseline,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::UtilityKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(n_slots: usize, capacity: f64, scale: f64) -> RoundParams {
        RoundParams {
            n_slots,
            slot_duration: 1.0,
            deadline: n_slots as f64,
            zeta: 2.0,
            capacity,
            power_scale: scale,
        }
    }

    fn u1(n: usize) -> UtilitySpec {
        UtilitySpec::new(UtilityKind::U1, n).unwrap()
    }

    fn random_instance(
        rng: &mut ChaCha8Rng,
        m: usize,
        n: usize,
    ) -> (ExpectedPowerMatrix, Vec<f64>) {
        let values = (0..m * n).map(|_| rng.random::<f64>()).collect();
        let initial = (0..n).map(|_| rng.random_range(1.0..30.0)).collect();
        (ExpectedPowerMatrix::new(m, n, values).unwrap(), initial)
    }

    #[test]
    fn forced_choice() {
        let p = ExpectedPowerMatrix::new(1, 1, vec![0.5]).unwrap();
        let s = gua(&p, &[10.0], &u1(1), &params(4, 100.0, 10.0)).unwrap();
        assert_eq!(s.slots, vec![0; 4]);
        assert_eq!(
            gua_lazy(&p, &[10.0], &u1(1), &params(4, 100.0, 10.0)).unwrap(),
            s
        );
    }

    #[test]
    fn first_pick_serves_the_emptier_sensor() {
        let p = ExpectedPowerMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let s = gua(&p, &[90.0, 10.0], &u1(2), &params(1, 100.0, 10.0)).unwrap();
        assert_eq!(s.slots, vec![0]);
    }

    #[test]
    fn gmq_tie_break_and_dominance() {
        let p = ExpectedPowerMatrix::from_rows(&[vec![0.2, 0.2], vec![0.3, 0.1], vec![0.1, 0.1]])
            .unwrap();
        assert_eq!(gmq(&p, &params(3, 100.0, 1.0)).unwrap().slots, vec![0; 3]);
        let dominant = ExpectedPowerMatrix::from_rows(&[vec![0.1, 0.1], vec![0.9, 0.9]]).unwrap();
        assert_eq!(
            gmq(&dominant, &params(2, 100.0, 1.0)).unwrap().slots,
            vec![1, 1]
        );
    }

    #[test]
    fn gmq_overfills_nearly_full_sensor() {
        // Strongest beam points at an almost full battery.
        let p = ExpectedPowerMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.6]]).unwrap();
        let prm = params(4, 100.0, 20.0);
        let spec = u1(2);
        let init = [95.0, 5.0];
        let greedy = schedule_value(
            &p,
            &init,
            &spec,
            &prm,
            &gua(&p, &init, &spec, &prm).unwrap(),
        )
        .unwrap();
        let energy = schedule_value(&p, &init, &spec, &prm, &gmq(&p, &prm).unwrap()).unwrap();
        assert!(energy <= greedy);
    }

    #[test]
    fn lazy_matches_naive_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..100 {
            let m = rng.random_range(1..8);
            let n = rng.random_range(1..5);
            let (p, init) = random_instance(&mut rng, m, n);
            let prm = params(rng.random_range(1..12), 100.0, rng.random_range(1.0..40.0));
            let spec = u1(n);
            assert_eq!(
                gua(&p, &init, &spec, &prm).unwrap(),
                gua_lazy(&p, &init, &spec, &prm).unwrap()
            );
        }
    }

    #[test]
    fn greedy_objective_is_monotone_in_slots() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (p, init) = random_instance(&mut rng, 5, 3);
        let spec = u1(3);
        let prm = params(10, 100.0, 15.0);
        let s = gua(&p, &init, &spec, &prm).unwrap();
        // Evaluate prefixes with empty trailing slots.
        let mut traj = GreedyState::new(&p, &init, &spec, &prm, prm.rates(&init).unwrap());
        let mut prev = 0.0;
        for &j in &s.slots {
            let g = traj.gain(j);
            assert!(g >= -1e-12);
            traj.push(j);
            let now = traj.value();
            assert!(now >= prev - 1e-12);
            prev = now;
        }
    }

    #[test]
    fn p1_single_policy_uses_full_deadline() {
        let p = ExpectedPowerMatrix::new(1, 2, vec![0.5, 0.2]).unwrap();
        let prm = params(10, 100.0, 2.0);
        let spec = u1(2);
        let init = [20.0, 40.0];
        let (alloc, val) = upper_bound_p1(&p, &init, &spec, &prm).unwrap();
        assert!((alloc.t[0] - 10.0).abs() < 1e-9);
        let c = [10.0, 20.0];
        let expected = spec.value((c[0] + 10.0 * 1.0) / 100.0) - spec.value(c[0] / 100.0)
            + spec.value((c[1] + 10.0 * 0.4) / 100.0)
            - spec.value(c[1] / 100.0);
        assert!((val - expected).abs() < 1e-12);
    }

    #[test]
    fn p1_symmetric_instance_splits_evenly() {
        let p = ExpectedPowerMatrix::from_rows(&[vec![0.8, 0.0], vec![0.0, 0.8]]).unwrap();
        let prm = params(100, 500.0, 5.0);
        let (alloc, _) = upper_bound_p1(&p, &[50.0, 50.0], &u1(2), &prm).unwrap();
        assert!((alloc.t[0] - 50.0).abs() < 1e-3, "{:?}", alloc.t);
        assert!((alloc.t[1] - 50.0).abs() < 1e-3);
    }

    #[test]
    fn p1_dominates_greedy_and_grows_with_deadline() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let (p, init) = random_instance(&mut rng, 4, 3);
            let spec = u1(3);
            let prm = params(6, 100.0, 10.0);
            let g = schedule_value(
                &p,
                &init,
                &spec,
                &prm,
                &gua(&p, &init, &spec, &prm).unwrap(),
            )
            .unwrap();
            let (_, ub) = upper_bound_p1(&p, &init, &spec, &prm).unwrap();
            assert!(g <= ub + 1e-9, "{g} > {ub}");
            let longer = RoundParams {
                deadline: 12.0,
                ..prm
            };
            let (_, ub2) = upper_bound_p1(&p, &init, &spec, &longer).unwrap();
            // A longer deadline also drains more, so compare at equal baseline via scale.
            let stronger = RoundParams {
                power_scale: 20.0,
                ..prm
            };
            let (_, ub3) = upper_bound_p1(&p, &init, &spec, &stronger).unwrap();
            assert!(ub3 >= ub - 1e-9);
            assert!(ub2.is_finite());
        }
    }

    #[test]
    fn theorem2_branches() {
        let spec = u1(1);
        assert!(theorem2_condition(&spec, 2.0, &[0.1], 100.0, 100.0));
        // zeta = 1.5, U1: sqrt(1.5) <= 2 sqrt(0.5) holds.
        let direct =
            (1.5f64 * 0.1 * 100.0 / 100.0).sqrt() <= 2.0 * (0.5f64 * 0.1 * 100.0 / 100.0).sqrt();
        assert_eq!(theorem2_condition(&spec, 1.5, &[0.1], 100.0, 100.0), direct);
        let flat = UtilitySpec::new(UtilityKind::Table(vec![0.0, 0.0]), 1).unwrap();
        assert!(theorem2_condition(&flat, 1.0, &[0.5], 100.0, 100.0));
    }

    #[test]
    fn empty_policy_set_rejected() {
        let p = ExpectedPowerMatrix::new(0, 1, vec![]).unwrap();
        assert!(matches!(
            gua(&p, &[1.0], &u1(1), &params(2, 10.0, 1.0)),
            Err(Error::Argument(_))
        ));
        assert!(gmq(&p, &params(2, 10.0, 1.0)).is_err());
    }
}
