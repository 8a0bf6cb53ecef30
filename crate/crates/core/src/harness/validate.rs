//! Self-check battery behind the `validate` subcommand.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::{Algorithm, ScenarioConfig};
use super::run::simulate;
use crate::bandit::{update, ArmStats};
use crate::channel::{
    array_factor, array_response, build_codebook, received_power, sample_fade, steering_codeword,
    superposed_power, UlaConfig,
};
use crate::energy::{RoundSchedule, UtilityKind, UtilitySpec};
use crate::geometry::{
    build_grid, discretization_ratio_bound, distance, half_diagonal, min_distance_ok,
    sector_bounds, Area, BeamSectorGeometry, Point,
};
use crate::oracle::{
    exhaustive_optimum, gmq, gua, gua_lazy, gua_ratio, schedule_value, upper_bound_p1,
    ExpectedPowerMatrix, RoundParams,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn(u64) -> Result<String, String>;

/// Every check run by [`validate`], in report order.
pub const CHECKS: &[(&str, Check)] = &[
    ("grid_count", grid_count),
    ("ratio_bound_examples", ratio_bound_examples),
    ("cell_ratio_empirical", cell_ratio_empirical),
    ("fade_normalization", fade_normalization),
    ("array_gain_identity", array_gain_identity),
    ("superposition", superposition),
    ("gua_ratio_exhaustive", gua_ratio_exhaustive),
    ("lazy_equals_naive", lazy_equals_naive),
    ("dominance_chain", dominance_chain),
    ("submodularity", submodularity),
    ("p1_vs_grid", p1_vs_grid),
    ("window_exactness", window_exactness),
    ("deadline_guard", deadline_guard),
    ("regret_growth", regret_growth),
    ("determinism", determinism),
];

pub fn validate(seed: u64) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|&(check, f)| {
            let (passed, detail) = match f(seed) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                check,
                passed,
                detail,
            }
        })
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid_count(_: u64) -> Result<String, String> {
    let area = Area::new(20.0, 20.0, 0.5).map_err(|e| e.to_string())?;
    let g = build_grid(&area);
    ensure(g.len() == 1600, || format!("{} locations", g.len()))?;
    let small = build_grid(&Area::new(3.0, 2.0, 0.5).map_err(|e| e.to_string())?);
    for (a, la) in small.iter().enumerate() {
        for lb in &small[a + 1..] {
            ensure(distance(la.center, lb.center) >= 0.5 - 1e-12, || {
                "centers too close".into()
            })?;
        }
    }
    Ok("1600 cells on 20 m x 20 m at 0.5 m".into())
}

fn ratio_bound_examples(_: u64) -> Result<String, String> {
    let geom = |d1: f64| BeamSectorGeometry {
        d1,
        theta1: 0.0,
        theta_m: 0.0,
        theta_l: 0.0,
        theta_r: 0.0,
        gamma: 2.0,
        bounds: None,
    };
    let b = discretization_ratio_bound(&geom(1.5), 0.5).map_err(|e| e.to_string())?;
    let h = 2f64.sqrt() * 0.25;
    let direct = 2.0 * ((1.5 + h) / (1.5 - h)).powi(2);
    ensure((b - direct).abs() < 1e-12, || format!("{b} vs {direct}"))?;
    ensure(
        discretization_ratio_bound(&geom(1.5), 0.0).map_err(|e| e.to_string())? == 2.0,
        || "zero-edge limit".into(),
    )?;
    ensure(discretization_ratio_bound(&geom(0.3), 0.5).is_err(), || {
        "overlap accepted".into()
    })?;
    Ok(format!("bound(1.5, 0.5, 2) = {b:.4}"))
}

/// One random cell in a beam whose in-cell pattern ratio lies in (1.25, 2.5].
/// Returns `(sampled max/min power, bound)`.
pub fn cell_ratio_trial(rng: &mut ChaCha8Rng, ula: &UlaConfig) -> (f64, f64) {
    loop {
        let theta_m = rng.random_range(0.35 * PI..0.65 * PI);
        let d1 = rng.random_range(1.0..5.0);
        let eps = rng.random_range(0.2..1.2);
        let cw = steering_codeword(theta_m, ula);
        let charger = Point::new(0.0, 0.0);
        let offset = rng.random_range(-0.5..0.5) * eps / d1;
        let center = Point::new(d1 * (theta_m + offset).cos(), d1 * (theta_m + offset).sin());
        let Ok(geom) = BeamSectorGeometry::for_cell(charger, center, eps, theta_m, 2.0) else {
            continue;
        };
        if !geom.is_beam_covered() || geom.d1 <= half_diagonal(eps) {
            continue;
        }
        let pattern = |a: f64| array_factor(a.cos(), &cw, ula);
        let samples = 2001;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for k in 0..samples {
            let a = geom.theta_l + (geom.theta_r - geom.theta_l) * k as f64 / (samples - 1) as f64;
            let p = pattern(a);
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let gamma = hi / lo;
        if !(gamma > 1.25 && gamma <= 2.5) {
            continue;
        }
        let Some(bounds) = sector_bounds(pattern, geom.theta_m, gamma) else {
            continue;
        };
        let geom = BeamSectorGeometry { gamma, ..geom }.with_bounds(bounds);
        if !min_distance_ok(geom.d1, eps, &geom) {
            continue;
        }
        let bound = discretization_ratio_bound(&geom, eps).expect("preconditions checked");
        let n = 50;
        let (mut pmin, mut pmax) = (f64::INFINITY, 0.0f64);
        for a in 0..n {
            for b in 0..n {
                let p = Point::new(
                    center.x - eps / 2.0 + eps * (a as f64 + 0.5) / n as f64,
                    center.y - eps / 2.0 + eps * (b as f64 + 0.5) / n as f64,
                );
                let h = crate::channel::mean_channel(p, 1.0, charger, ula).expect("off charger");
                let pw = received_power(&h, &cw).expect("lengths match");
                pmin = pmin.min(pw);
                pmax = pmax.max(pw);
            }
        }
        return (pmax / pmin, bound);
    }
}

fn cell_ratio_empirical(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ula = UlaConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let (ratio, bound) = cell_ratio_trial(&mut rng, &ula);
        ensure(ratio <= bound * (1.0 + 1e-9), || {
            format!("ratio {ratio} > bound {bound}")
        })?;
        worst = worst.max(ratio / bound);
    }
    Ok(format!("20 cells, largest ratio/bound {worst:.3}"))
}

fn fade_normalization(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 100_000;
    let mean = (0..n)
        .map(|_| sample_fade(&mut rng).norm_sqr())
        .sum::<f64>()
        / n as f64;
    ensure((0.98..=1.02).contains(&mean), || {
        format!("mean |g|^2 = {mean}")
    })?;
    Ok(format!("mean |g|^2 = {mean:.4}"))
}

fn array_gain_identity(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ula = UlaConfig::default();
    for _ in 0..20 {
        let k = rng.random_range(0..720);
        let theta = k as f64 * PI / 720.0;
        let d = rng.random_range(0.5..8.0);
        let a = rng.random_range(0.2..3.0);
        let h = array_response(theta.cos(), a / d, &ula);
        let best = (0..720)
            .map(|m| received_power(&h, &steering_codeword(m as f64 * PI / 720.0, &ula)).unwrap())
            .fold(0.0, f64::max);
        let expected = ula.n_antennas as f64 * a * a / (d * d);
        ensure((best / expected - 1.0).abs() < 1e-9, || {
            format!("{best} vs {expected}")
        })?;
    }
    let book = build_codebook(12, &ula).map_err(|e| e.to_string())?;
    ensure(book.len() == 12, || "codebook size".into())?;
    Ok("matched steering reaches N_a A^2 / d^2".into())
}

fn superposition(_: u64) -> Result<String, String> {
    let ula = UlaConfig::default();
    let cw = steering_codeword(PI / 3.0, &ula);
    let h = array_response((PI / 3.0).cos(), 0.5, &ula);
    let single = received_power(&h, &cw).unwrap();
    let double = superposed_power(&[(&h, &cw), (&h, &cw)]).unwrap();
    let neg: Vec<_> = h.iter().map(|x| -x).collect();
    let cancel = superposed_power(&[(&h, &cw), (&neg, &cw)]).unwrap();
    ensure((double - 4.0 * single).abs() < 1e-9 * double, || {
        format!("{double} vs {single}")
    })?;
    ensure(cancel < 1e-20, || format!("cancel {cancel}"))?;
    Ok("constructive 4x, destructive 0".into())
}

pub(crate) fn tiny_instance(
    rng: &mut ChaCha8Rng,
    max_sensors: usize,
    max_policies: usize,
    max_slots: usize,
) -> (ExpectedPowerMatrix, Vec<f64>, UtilitySpec, RoundParams) {
    let n = rng.random_range(1..=max_sensors);
    let m = rng.random_range(1..=max_policies);
    let slots = rng.random_range(1..=max_slots);
    let capacity = 100.0;
    let values = (0..n * m).map(|_| rng.random::<f64>()).collect();
    let initial = (0..n)
        .map(|_| capacity * 0.3 * (1.0 - rng.random::<f64>()))
        .collect();
    let params = RoundParams {
        n_slots: slots,
        slot_duration: 1.0,
        deadline: slots as f64,
        zeta: 2.0,
        capacity,
        power_scale: rng.random_range(5.0..60.0),
    };
    (
        ExpectedPowerMatrix::new(m, n, values).unwrap(),
        initial,
        UtilitySpec::new(UtilityKind::U1, n).unwrap(),
        params,
    )
}

fn gua_ratio_exhaustive(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..100 {
        let (p, x, spec, prm) = tiny_instance(&mut rng, 3, 4, 4);
        let s = gua(&p, &x, &spec, &prm).unwrap();
        let g = schedule_value(&p, &x, &spec, &prm, &s).unwrap();
        let (_, opt) = exhaustive_optimum(&p, &x, &spec, &prm).unwrap();
        if opt > 0.0 {
            worst = worst.min(g / opt);
        }
        ensure(g >= gua_ratio() * opt - 1e-9, || {
            format!("{g} < alpha * {opt}")
        })?;
    }
    Ok(format!("100 instances, worst ratio {worst:.4}"))
}

fn lazy_equals_naive(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let (p, x, spec, prm) = tiny_instance(&mut rng, 4, 8, 12);
        let a = gua(&p, &x, &spec, &prm).unwrap();
        let b = gua_lazy(&p, &x, &spec, &prm).unwrap();
        ensure(a == b, || format!("{:?} vs {:?}", a.slots, b.slots))?;
    }
    Ok("100 instances identical".into())
}

fn dominance_chain(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let (p, x, spec, prm) = tiny_instance(&mut rng, 3, 4, 4);
        let g = schedule_value(&p, &x, &spec, &prm, &gua(&p, &x, &spec, &prm).unwrap()).unwrap();
        let e = schedule_value(&p, &x, &spec, &prm, &gmq(&p, &prm).unwrap()).unwrap();
        let (_, ub) = upper_bound_p1(&p, &x, &spec, &prm).unwrap();
        ensure(e <= g + 1e-9, || format!("gmq {e} > gua {g}"))?;
        ensure(g <= ub + 1e-9, || format!("gua {g} > bound {ub}"))?;
    }
    Ok("gmq <= gua <= p1 on 100 instances".into())
}

/// Round objective when several policies may share a slot; their harvests add.
pub(crate) fn set_value(
    p: &ExpectedPowerMatrix,
    x: &[f64],
    spec: &UtilitySpec,
    prm: &RoundParams,
    picks: &[(usize, usize)],
) -> f64 {
    let rates = prm.rates(x).unwrap();
    let mut q = x.to_vec();
    for slot in 0..prm.n_slots {
        for i in 0..q.len() {
            let h: f64 = picks
                .iter()
                .filter(|(s, _)| *s == slot)
                .map(|&(_, j)| prm.slot_energy(p.get(j, i)))
                .sum();
            q[i] = (q[i] - rates[i] * prm.slot_duration + h).clamp(0.0, prm.capacity);
        }
    }
    q.iter()
        .zip(x.iter().zip(&rates))
        .map(|(&qi, (&xi, &c))| {
            let base = (xi - c * prm.n_slots as f64 * prm.slot_duration).max(0.0);
            spec.of_energy(qi, prm.capacity) - spec.of_energy(base, prm.capacity)
        })
        .sum()
}

fn submodularity(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = 0usize;
    for _ in 0..20 {
        let (p, x, spec, prm) = tiny_instance(&mut rng, 3, 3, 3);
        let ground: Vec<(usize, usize)> = (0..prm.n_slots)
            .flat_map(|s| (0..p.n_policies()).map(move |j| (s, j)))
            .collect();
        let k = ground.len();
        let subset = |mask: usize| -> Vec<(usize, usize)> {
            (0..k)
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| ground[b])
                .collect()
        };
        let values: Vec<f64> = (0..1usize << k)
            .map(|m| set_value(&p, &x, &spec, &prm, &subset(m)))
            .collect();
        for a in 0..1usize << k {
            // Supersets of `a` via submask enumeration of the complement.
            let rest = !a & ((1 << k) - 1);
            let mut extra = rest;
            loop {
                let b = a | extra;
                for e in 0..k {
                    if b >> e & 1 == 1 {
                        continue;
                    }
                    let ga = values[a | 1 << e] - values[a];
                    let gb = values[b | 1 << e] - values[b];
                    ensure(ga >= -1e-9, || "not monotone".into())?;
                    ensure(gb <= ga + 1e-9, || format!("gain {gb} on superset > {ga}"))?;
                    pairs += 1;
                }
                if extra == 0 {
                    break;
                }
                extra = (extra - 1) & rest;
            }
        }
    }
    Ok(format!("{pairs} subset/superset comparisons"))
}

fn p1_vs_grid(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let (p, x, spec, mut prm) = tiny_instance(&mut rng, 3, 3, 4);
        if p.n_policies() != 3 {
            continue;
        }
        prm.power_scale *= 0.2;
        let (_, v) = upper_bound_p1(&p, &x, &spec, &prm).unwrap();
        let steps = 200;
        let rates = prm.rates(&x).unwrap();
        let base: Vec<f64> = x
            .iter()
            .zip(&rates)
            .map(|(a, c)| a - c * prm.deadline)
            .collect();
        let mut best = f64::NEG_INFINITY;
        for a in 0..=steps {
            for b in 0..=steps - a {
                for c in 0..=steps - a - b {
                    let t = [a, b, c].map(|k| prm.deadline * k as f64 / steps as f64);
                    let val: f64 = (0..x.len())
                        .map(|i| {
                            let e: f64 = (0..3).map(|j| t[j] * p.get(j, i) * prm.power_scale).sum();
                            spec.of_energy(base[i] + e, prm.capacity)
                                - spec.of_energy(base[i], prm.capacity)
                        })
                        .sum();
                    best = best.max(val);
                }
            }
        }
        let rel = (v - best).abs() / best.abs().max(1e-12);
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || format!("solver {v} vs grid {best}"))?;
    }
    Ok(format!("largest relative gap {worst:.2e}"))
}

fn window_exactness(seed: u64) -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 7;
    let mut stats = ArmStats::windowed(4, 2, w).map_err(|e| e.to_string())?;
    let mut log = Vec::new();
    for round in 1..=100 {
        let j = rng.random_range(0..4);
        let obs = vec![rng.random::<f64>(), rng.random::<f64>()];
        let sched = RoundSchedule::new(vec![j], 1.0, 1.0).unwrap();
        update(&mut stats, round, &sched, std::slice::from_ref(&obs), None)
            .map_err(|e| e.to_string())?;
        log.push((round, j, obs));
        for p in 0..4 {
            let kept: Vec<_> = log
                .iter()
                .filter(|(r, jj, _)| *jj == p && r + w > round)
                .collect();
            ensure(stats.pulls(p) == kept.len() as u64, || {
                "count mismatch".into()
            })?;
            for i in 0..2 {
                let m = if kept.is_empty() {
                    0.0
                } else {
                    kept.iter().map(|k| k.2[i]).sum::<f64>() / kept.len() as f64
                };
                ensure((stats.mean(p, i) - m).abs() < 1e-12, || {
                    "mean mismatch".into()
                })?;
            }
        }
    }
    Ok("100 rounds match recomputation".into())
}

fn deadline_guard(_: u64) -> Result<String, String> {
    let mut cfg = ScenarioConfig::desk();
    cfg.energy.slots = 51;
    match cfg.validate() {
        Err(e @ crate::Error::Deadline { .. }) => Ok(e.to_string()),
        other => Err(format!("expected deadline error, got {other:?}")),
    }
}

fn regret_growth(seed: u64) -> Result<String, String> {
    let mut cfg = ScenarioConfig::desk();
    cfg.seed = seed;
    cfg.rounds = 400;
    cfg.algorithms = vec![Algorithm::Umcb];
    let out = simulate(&cfg).map_err(|e| e.to_string())?;
    let r = &out.runs[0].regret.upper_bound;
    let early = r[39] / 40.0;
    let late = r[399] / 400.0;
    ensure(late < early, || format!("R/T grew: {early} -> {late}"))?;
    Ok(format!("R(T)/T {early:.3} at 40, {late:.3} at 400"))
}

fn determinism(seed: u64) -> Result<String, String> {
    let mut cfg = ScenarioConfig::desk_drifting();
    cfg.seed = seed;
    cfg.rounds = 30;
    let a = simulate(&cfg).map_err(|e| e.to_string())?;
    let b = simulate(&cfg).map_err(|e| e.to_string())?;
    ensure(a.rows == b.rows, || "traces differ".into())?;
    Ok(format!("{} rows identical", a.rows.len()))
}
