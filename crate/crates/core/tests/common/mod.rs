//! Reference computations written independently of the library, used as test
//! oracles: brute-force schedule search, a plain battery simulator, direct
//! array arithmetic and simplex grid search.

#![allow(dead_code)]

use std::f64::consts::PI;

use beamcharge::energy::{UtilityKind, UtilitySpec};
use beamcharge::oracle::{ExpectedPowerMatrix, RoundParams};
use rand::Rng;

/// A single round with known expected powers, U1 utility.
#[derive(Debug, Clone)]
pub struct Instance {
    /// `powers[j][i]`
    pub powers: Vec<Vec<f64>>,
    pub initial: Vec<f64>,
    pub capacity: f64,
    pub zeta: f64,
    pub slot_duration: f64,
    pub deadline: f64,
    pub n_slots: usize,
    pub power_scale: f64,
}

impl Instance {
    pub fn random<R: Rng>(
        rng: &mut R,
        max_sensors: usize,
        max_policies: usize,
        max_slots: usize,
    ) -> Self {
        let n = rng.random_range(1..=max_sensors);
        let m = rng.random_range(1..=max_policies);
        let n_slots = rng.random_range(1..=max_slots);
        let capacity = 100.0;
        Self {
            powers: (0..m)
                .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
                .collect(),
            initial: (0..n)
                .map(|_| 0.3 * capacity * (1.0 - rng.random::<f64>()))
                .collect(),
            capacity,
            zeta: 2.0,
            slot_duration: 1.0,
            deadline: n_slots as f64,
            n_slots,
            power_scale: rng.random_range(5.0..60.0),
        }
    }

    pub fn n_sensors(&self) -> usize {
        self.initial.len()
    }

    pub fn n_policies(&self) -> usize {
        self.powers.len()
    }

    pub fn matrix(&self) -> ExpectedPowerMatrix {
        ExpectedPowerMatrix::from_rows(&self.powers).unwrap()
    }

    pub fn spec(&self) -> UtilitySpec {
        UtilitySpec::new(UtilityKind::U1, self.n_sensors()).unwrap()
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

    pub fn rate(&self, i: usize) -> f64 {
        self.initial[i] / (self.zeta * self.deadline)
    }

    fn u(&self, q: f64) -> f64 {
        100.0 / self.n_sensors() as f64 * (q / self.capacity).max(0.0).sqrt()
    }

    fn baseline(&self, i: usize) -> f64 {
        (self.initial[i] - self.rate(i) * self.n_slots as f64 * self.slot_duration).max(0.0)
    }

    /// Objective of a set of (slot, policy) picks; picks sharing a slot add.
    pub fn set_value(&self, picks: &[(usize, usize)]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n_sensors() {
            let mut q = self.initial[i];
            for slot in 0..self.n_slots {
                let mut harvest = 0.0;
                for &(s, j) in picks {
                    if s == slot {
                        harvest += self.powers[j][i] * self.power_scale * self.slot_duration;
                    }
                }
                q = q - self.rate(i) * self.slot_duration + harvest;
                q = q.min(self.capacity).max(0.0);
            }
            total += self.u(q) - self.u(self.baseline(i));
        }
        total
    }

    /// Objective of one policy per slot.
    pub fn schedule_value(&self, slots: &[usize]) -> f64 {
        let picks: Vec<(usize, usize)> = slots.iter().copied().enumerate().collect();
        self.set_value(&picks)
    }

    /// Best schedule value over all `m^n_slots` sequences.
    pub fn brute_force_optimum(&self) -> f64 {
        let m = self.n_policies();
        let total = m.pow(self.n_slots as u32);
        let mut best = f64::NEG_INFINITY;
        let mut slots = vec![0; self.n_slots];
        for code in 0..total {
            let mut c = code;
            for s in slots.iter_mut() {
                *s = c % m;
                c /= m;
            }
            best = best.max(self.schedule_value(&slots));
        }
        best
    }

    /// Relaxed objective: continuous times `t`, no battery cap.
    pub fn relaxed_value(&self, t: &[f64]) -> f64 {
        (0..self.n_sensors())
            .map(|i| {
                let c = self.initial[i] * (1.0 - 1.0 / self.zeta);
                let e: f64 = t
                    .iter()
                    .zip(&self.powers)
                    .map(|(tj, row)| tj * row[i] * self.power_scale)
                    .sum();
                self.u(c + e) - self.u(c)
            })
            .sum()
    }

    /// Maximum of [`relaxed_value`](Self::relaxed_value) over the grid
    /// `t = T_c (a, b, c) / steps` with `a + b + c <= steps` (three policies).
    pub fn grid_search_3(&self, steps: usize) -> f64 {
        assert_eq!(self.n_policies(), 3);
        let mut best = f64::NEG_INFINITY;
        for a in 0..=steps {
            for b in 0..=steps - a {
                for c in 0..=steps - a - b {
                    let t = [a, b, c].map(|k| self.deadline * k as f64 / steps as f64);
                    best = best.max(self.relaxed_value(&t));
                }
            }
        }
        best
    }
}

/// Plain-arithmetic received power of a steered ULA at a point:
/// `|sum_n (A/d) e^{i k n s cos(theta)} e^{-i k n s cos(theta_m)} / sqrt(N)|^2`.
pub fn steered_power(
    n_antennas: usize,
    spacing: f64,
    wavelength: f64,
    theta_m: f64,
    charger: (f64, f64),
    point: (f64, f64),
    gain: f64,
) -> f64 {
    let dx = point.0 - charger.0;
    let dy = point.1 - charger.1;
    let d = (dx * dx + dy * dy).sqrt();
    let cos_t = dx / d;
    let k = 2.0 * PI * spacing / wavelength;
    let (mut re, mut im) = (0.0, 0.0);
    for n in 0..n_antennas {
        let phase = k * n as f64 * (cos_t - theta_m.cos());
        re += phase.cos();
        im += phase.sin();
    }
    let amp = gain / d / (n_antennas as f64).sqrt();
    amp * amp * (re * re + im * im)
}
