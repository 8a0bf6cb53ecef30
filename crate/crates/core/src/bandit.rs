//! Online scheduling under unknown channel statistics: UMCB, its sliding-window
//! variant, and an epsilon-greedy baseline.

use std::collections::VecDeque;

use rand::Rng;

use crate::energy::{RoundSchedule, UtilitySpec};
use crate::error::{check_len, Error, Result};
use crate::oracle::{gua_lazy, ExpectedPowerMatrix, GreedyState, RoundParams};
use crate::policy::PolicySet;

/// One normalized power sample credited to `(policy, sensor)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    policy: usize,
    sensor: usize,
    value: f64,
}

#[derive(Debug, Clone)]
struct RoundRecord {
    round: usize,
    pulls: Vec<usize>,
    samples: Vec<Sample>,
}

/// Pull counts and empirical mean powers, optionally restricted to the last
/// `w` rounds.
#[derive(Debug, Clone)]
pub struct ArmStats {
    n_policies: usize,
    n_sensors: usize,
    window: Option<usize>,
    pulls: Vec<u64>,
    counts: Vec<u64>,
    sums: Vec<f64>,
    history: VecDeque<RoundRecord>,
}

impl ArmStats {
    pub fn new(n_policies: usize, n_sensors: usize) -> Self {
        Self {
            n_policies,
            n_sensors,
            window: None,
            pulls: vec![0; n_policies],
            counts: vec![0; n_policies * n_sensors],
            sums: vec![0.0; n_policies * n_sensors],
            history: VecDeque::new(),
        }
    }

    /// Statistics over the last `w` rounds only.
    pub fn windowed(n_policies: usize, n_sensors: usize, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::Argument(
                "window must cover at least one round".into(),
            ));
        }
        Ok(Self {
            window: Some(w),
            ..Self::new(n_policies, n_sensors)
        })
    }

    pub fn n_policies(&self) -> usize {
        self.n_policies
    }

    pub fn n_sensors(&self) -> usize {
        self.n_sensors
    }

    pub fn window(&self) -> Option<usize> {
        self.window
    }

    /// `T_j`: number of slot observations credited to policy `j`.
    pub fn pulls(&self, j: usize) -> u64 {
        self.pulls[j]
    }

    pub fn count(&self, j: usize, i: usize) -> u64 {
        self.counts[j * self.n_sensors + i]
    }

    /// Empirical mean normalized power, 0 before any sample.
    pub fn mean(&self, j: usize, i: usize) -> f64 {
        let k = j * self.n_sensors + i;
        if self.counts[k] == 0 {
            0.0
        } else {
            (self.sums[k] / self.counts[k] as f64).clamp(0.0, 1.0)
        }
    }

    pub fn means(&self) -> ExpectedPowerMatrix {
        let values = (0..self.n_policies)
            .flat_map(|j| (0..self.n_sensors).map(move |i| (j, i)))
            .map(|(j, i)| self.mean(j, i))
            .collect();
        ExpectedPowerMatrix::new(self.n_policies, self.n_sensors, values)
            .expect("means are clamped to [0, 1]")
    }

    fn apply(&mut self, rec: &RoundRecord, sign: f64) {
        for &j in &rec.pulls {
            if sign > 0.0 {
                self.pulls[j] += 1;
            } else {
                self.pulls[j] -= 1;
            }
        }
        for s in &rec.samples {
            let k = s.policy * self.n_sensors + s.sensor;
            if sign > 0.0 {
                self.counts[k] += 1;
            } else {
                self.counts[k] -= 1;
            }
            self.sums[k] += sign * s.value;
            if self.counts[k] == 0 {
                self.sums[k] = 0.0;
            }
        }
    }

    fn record(&mut self, rec: RoundRecord) {
        self.apply(&rec, 1.0);
        if let Some(w) = self.window {
            let round = rec.round;
            self.history.push_back(rec);
            while let Some(front) = self.history.front() {
                if front.round + w > round {
                    break;
                }
                let old = self.history.pop_front().expect("front exists");
                self.apply(&old, -1.0);
            }
        }
    }
}

/// Gain-free deterministic power of every policy at every sensor, used to
/// transfer one observation to the other codewords at the same location.
#[derive(Debug, Clone)]
pub struct LocationSharing {
    pub policies: PolicySet,
    /// Policy-major `pattern[j * n_sensors + i]`.
    pub pattern: Vec<f64>,
}

impl LocationSharing {
    pub fn new(policies: PolicySet, n_sensors: usize, pattern: Vec<f64>) -> Result<Self> {
        check_len(policies.len() * n_sensors, pattern.len())?;
        Ok(Self { policies, pattern })
    }

    fn get(&self, j: usize, i: usize, n_sensors: usize) -> f64 {
        self.pattern[j * n_sensors + i]
    }
}

/// Below this fraction of the strongest codeword at a location, an
/// observation carries too little signal to back-solve the fade.
const SHARE_MIN_RELATIVE: f64 = 1e-9;

/// Credits the observations of one played round.
///
/// `observed[n][i]` is sensor `i`'s realized normalized power in slot `n`.
/// Samples are clipped to `[0, 1]`. With `sharing`, the fade implied by each
/// observation is applied to every other codeword at the played location.
pub fn update(
    stats: &mut ArmStats,
    round: usize,
    schedule: &RoundSchedule,
    observed: &[Vec<f64>],
    sharing: Option<&LocationSharing>,
) -> Result<()> {
    check_len(schedule.len(), observed.len())?;
    let n = stats.n_sensors;
    let mut rec = RoundRecord {
        round,
        pulls: Vec::new(),
        samples: Vec::new(),
    };
    for (&j, obs) in schedule.slots.iter().zip(observed) {
        check_len(n, obs.len())?;
        if j >= stats.n_policies {
            return Err(Error::Argument(format!("policy {j} out of range")));
        }
        rec.pulls.push(j);
        for (i, &v) in obs.iter().enumerate() {
            rec.samples.push(Sample {
                policy: j,
                sensor: i,
                value: v.clamp(0.0, 1.0),
            });
        }
        let Some(share) = sharing else { continue };
        for other in share.policies.same_location(j) {
            if other == j {
                continue;
            }
            rec.pulls.push(other);
            for (i, &v) in obs.iter().enumerate() {
                let played = share.get(j, i, n);
                let strongest = share
                    .policies
                    .same_location(j)
                    .map(|k| share.get(k, i, n))
                    .fold(0.0, f64::max);
                if !(played > SHARE_MIN_RELATIVE * strongest) {
                    continue;
                }
                rec.samples.push(Sample {
                    policy: other,
                    sensor: i,
                    value: (v * share.get(other, i, n) / played).clamp(0.0, 1.0),
                });
            }
        }
    }
    stats.record(rec);
    Ok(())
}

/// Round-specific information available before scheduling.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditContext {
    /// 1-based round index.
    pub round: usize,
    pub initial: Vec<f64>,
    pub gains: Option<Vec<f64>>,
}

/// `min(p_bar + sqrt(3 ln t / (2 T_j)), 1)`, or 1 for an unexplored policy.
pub fn ucb_estimate(stats: &ArmStats, j: usize, i: usize, t: usize) -> f64 {
    let pulls = stats.pulls(j);
    if pulls == 0 {
        return 1.0;
    }
    let radius = (3.0 * (t.max(1) as f64).ln() / (2.0 * pulls as f64)).sqrt();
    (stats.mean(j, i) + radius).min(1.0)
}

pub fn ucb_matrix(stats: &ArmStats, t: usize) -> ExpectedPowerMatrix {
    let values = (0..stats.n_policies)
        .flat_map(|j| (0..stats.n_sensors).map(move |i| (j, i)))
        .map(|(j, i)| ucb_estimate(stats, j, i, t))
        .collect();
    ExpectedPowerMatrix::new(stats.n_policies, stats.n_sensors, values)
        .expect("estimates lie in [0, 1]")
}

/// Greedy schedule on the optimistic power estimates.
pub fn umcb_select(
    stats: &ArmStats,
    ctx: &BanditContext,
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<RoundSchedule> {
    gua_lazy(&ucb_matrix(stats, ctx.round), &ctx.initial, spec, params)
}

/// [`umcb_select`] on windowed statistics.
pub fn umcb_sw_select(
    stats: &ArmStats,
    ctx: &BanditContext,
    spec: &UtilitySpec,
    params: &RoundParams,
) -> Result<RoundSchedule> {
    if stats.window().is_none() {
        return Err(Error::Argument(
            "sliding-window selection needs windowed statistics".into(),
        ));
    }
    umcb_select(stats, ctx, spec, params)
}

/// `min(ceil(sqrt(T / V)), T)`, and `T` when `V = 0`.
pub fn window_size(horizon: usize, variation: f64) -> usize {
    let horizon = horizon.max(1);
    if !(variation > 0.0) {
        return horizon;
    }
    let w = (horizon as f64 / variation).sqrt().ceil();
    if w >= horizon as f64 {
        horizon
    } else {
        (w as usize).max(1)
    }
}

/// Schedule picked by [`eg_select`] and which slots were random picks.
#[derive(Debug, Clone, PartialEq)]
pub struct EgSchedule {
    pub schedule: RoundSchedule,
    pub explored: Vec<bool>,
}

/// Epsilon-greedy: each slot is a uniform random policy with probability
/// `epsilon0`, otherwise the best greedy marginal on the empirical means.
pub fn eg_select<R: Rng + ?Sized>(
    stats: &ArmStats,
    ctx: &BanditContext,
    spec: &UtilitySpec,
    params: &RoundParams,
    epsilon0: f64,
    rng: &mut R,
) -> Result<EgSchedule> {
    if !(0.0..=1.0).contains(&epsilon0) {
        return Err(Error::Argument(format!(
            "epsilon0 = {epsilon0} outside [0, 1]"
        )));
    }
    let means = stats.means();
    let mut state = GreedyState::start(&means, &ctx.initial, spec, params)?;
    let mut slots = Vec::with_capacity(params.n_slots);
    let mut explored = Vec::with_capacity(params.n_slots);
    for _ in 0..params.n_slots {
        let explore = rng.random::<f64>() < epsilon0;
        let j = if explore {
            rng.random_range(0..stats.n_policies)
        } else {
            state.best()
        };
        state.push(j);
        slots.push(j);
        explored.push(explore);
    }
    Ok(EgSchedule {
        schedule: RoundSchedule::new(slots, params.slot_duration, params.deadline)?,
        explored,
    })
}

/// Per-round rewards of one algorithm next to its two comparators.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    pub reward: Vec<f64>,
    pub gua_true: Vec<f64>,
    pub upper_bound: Vec<f64>,
    pub reward_total: f64,
    pub gua_true_total: f64,
    pub upper_bound_total: f64,
}

impl RegretLedger {
    pub fn push(&mut self, reward: f64, gua_true: f64, upper_bound: f64) {
        self.reward.push(reward);
        self.gua_true.push(gua_true);
        self.upper_bound.push(upper_bound);
        self.reward_total += reward;
        self.gua_true_total += gua_true;
        self.upper_bound_total += upper_bound;
    }

    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }
}

/// Cumulative regret series.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretSeries {
    /// `alpha * sum r* - sum r`, not clamped.
    pub alpha: Vec<f64>,
    /// `sum (r_UB - r)`.
    pub upper_bound: Vec<f64>,
}

pub fn alpha_regret(ledger: &RegretLedger, alpha: f64) -> Result<RegretSeries> {
    check_len(ledger.reward.len(), ledger.gua_true.len())?;
    check_len(ledger.reward.len(), ledger.upper_bound.len())?;
    let mut a = 0.0;
    let mut u = 0.0;
    let mut out = RegretSeries {
        alpha: Vec::with_capacity(ledger.len()),
        upper_bound: Vec::with_capacity(ledger.len()),
    };
    for k in 0..ledger.len() {
        a += alpha * ledger.gua_true[k] - ledger.reward[k];
        u += ledger.upper_bound[k] - ledger.reward[k];
        out.alpha.push(a);
        out.upper_bound.push(u);
    }
    Ok(out)
}

/// `D` = 1 + number of rounds whose mean vector changed; `V` = sum of max-norm
/// changes between consecutive rounds.
pub fn variation_metrics(history: &[Vec<f64>]) -> Result<(usize, f64)> {
    if history.is_empty() {
        return Err(Error::Argument("variation needs at least one round".into()));
    }
    let mut d = 1;
    let mut v = 0.0;
    for w in history.windows(2) {
        check_len(w[0].len(), w[1].len())?;
        let step = w[0]
            .iter()
            .zip(&w[1])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if step > 0.0 {
            d += 1;
            v += step;
        }
    }
    Ok((d, v))
}

/// Streaming form of [`variation_metrics`].
#[derive(Debug, Clone, Default)]
pub struct VariationTracker {
    last: Option<Vec<f64>>,
    pub changes: usize,
    pub total: f64,
}

impl VariationTracker {
    pub fn observe(&mut self, means: &[f64]) {
        if let Some(prev) = &self.last {
            let step = prev
                .iter()
                .zip(means)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if step > 0.0 {
                self.changes += 1;
                self.total += step;
            }
        }
        self.last = Some(means.to_vec());
    }

    pub fn d(&self) -> usize {
        1 + self.changes
    }
}
