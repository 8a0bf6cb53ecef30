//! The round loop, its persisted outputs, and parameter sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{Algorithm, ScenarioConfig, ScenarioKind};
use super::rng::{stream, Purpose};
use super::world::World;
use crate::bandit::{
    alpha_regret, eg_select, umcb_select, update, window_size, ArmStats, BanditContext,
    LocationSharing, RegretLedger, RegretSeries, VariationTracker,
};
use crate::energy::{round_reward, simulate_round, RoundSchedule, SensorState};
use crate::error::{Error, Result};
use crate::oracle::{gmq, gua_lazy, upper_bound_p1, ExpectedPowerMatrix};

/// One line of `trace.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub round: usize,
    pub algorithm: &'static str,
    pub reward: f64,
    pub ub_reward: f64,
    pub gua_reward: f64,
    pub alpha_regret_cum: f64,
    pub ub_regret_cum: f64,
}

#[derive(Debug, Clone)]
pub struct AlgorithmRun {
    pub algorithm: Algorithm,
    pub ledger: RegretLedger,
    pub regret: RegretSeries,
    /// Whether the round's schedule equalled the greedy oracle's on true means.
    pub matches_oracle: Vec<bool>,
    pub wall_time: Duration,
}

impl AlgorithmRun {
    /// Mean reward over the last `fraction` of rounds (at least one round).
    pub fn tail_mean(&self, fraction: f64) -> f64 {
        tail_mean(&self.ledger.reward, fraction)
    }
}

pub fn tail_mean(values: &[f64], fraction: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let k = ((values.len() as f64 * fraction).ceil() as usize).clamp(1, values.len());
    values[values.len() - k..].iter().sum::<f64>() / k as f64
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TraceRow>,
    pub runs: Vec<AlgorithmRun>,
    /// Sliding-window length used by `umcb-sw`.
    pub window: usize,
    /// `(D, V)` of the true mean powers over the horizon.
    pub variation: (usize, f64),
}

impl RunOutput {
    pub fn run(&self, algorithm: Algorithm) -> Option<&AlgorithmRun> {
        self.runs.iter().find(|r| r.algorithm == algorithm)
    }
}

enum Learner {
    Bandit(ArmStats),
    Oracle,
}

fn realized_reward(
    world: &World,
    initial: &[f64],
    rates: &[f64],
    schedule: &RoundSchedule,
    observed: &[Vec<f64>],
) -> Result<f64> {
    let states: Vec<SensorState> = initial
        .iter()
        .zip(rates)
        .zip(&world.sensors)
        .map(|((&x, &c), &pos)| SensorState {
            position: pos,
            capacity: world.params.capacity,
            energy: x,
            consumption_rate: c,
            antenna_gain: 1.0,
        })
        .collect();
    let scale = world.params.power_scale;
    let physical: Vec<Vec<f64>> = observed
        .iter()
        .map(|row| row.iter().map(|p| p * scale).collect())
        .collect();
    let out = simulate_round(&states, schedule, &physical)?;
    Ok(round_reward(
        &world.spec,
        world.params.capacity,
        &out.final_energy,
        &out.baseline,
    ))
}

/// Simulates every configured algorithm without touching the file system.
pub fn simulate(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let world = World::build(cfg)?;
    let horizon = cfg.rounds;
    let gains = world.gain_path(cfg.scenario.kind, cfg.scenario.drift_rate, horizon)?;
    let mut tracker = VariationTracker::default();
    if cfg.scenario.kind == ScenarioKind::Nonstationary {
        for g in &gains {
            let m = world.expected_matrix(g);
            let flat: Vec<f64> = (0..m.n_policies())
                .flat_map(|j| m.row(j).to_vec())
                .collect();
            tracker.observe(&flat);
        }
    }
    let variation = (tracker.d(), tracker.total);
    let window = match cfg.fixed_window()? {
        Some(w) => w,
        None => window_size(horizon, variation.1),
    };

    let n_pol = world.policies.len();
    let n = world.n_sensors();
    let sharing: Option<LocationSharing> = cfg.bandit.share_by_location.then(|| world.sharing());
    let mut learners: Vec<Learner> = cfg
        .algorithms
        .iter()
        .map(|a| {
            Ok(match a {
                Algorithm::Umcb | Algorithm::Eg => Learner::Bandit(ArmStats::new(n_pol, n)),
                Algorithm::UmcbSw => Learner::Bandit(ArmStats::windowed(n_pol, n, window)?),
                Algorithm::Gmq | Algorithm::GuaTrue => Learner::Oracle,
            })
        })
        .collect::<Result<_>>()?;
    let mut runs: Vec<AlgorithmRun> = cfg
        .algorithms
        .iter()
        .map(|&a| AlgorithmRun {
            algorithm: a,
            ledger: RegretLedger::default(),
            regret: RegretSeries {
                alpha: Vec::new(),
                upper_bound: Vec::new(),
            },
            matches_oracle: Vec::new(),
            wall_time: Duration::ZERO,
        })
        .collect();
    let mut rows = Vec::with_capacity(horizon * runs.len());
    let alpha = cfg.bandit.alpha;
    let params = world.params;
    let spec = &world.spec;

    for t in 1..=horizon {
        let truth: ExpectedPowerMatrix = world.expected_matrix(&gains[t - 1]);
        let initial = world.context(t);
        let rates = params.rates(&initial)?;
        let oracle_start = Instant::now();
        let oracle = gua_lazy(&truth, &initial, spec, &params)?;
        let oracle_obs = world.realize(t, &truth, &oracle);
        let gua_reward = realized_reward(&world, &initial, &rates, &oracle, &oracle_obs)?;
        let (_, ub) = upper_bound_p1(&truth, &initial, spec, &params)?;
        let oracle_time = oracle_start.elapsed();
        let ctx = BanditContext {
            round: t,
            initial: initial.clone(),
            gains: Some(gains[t - 1].clone()),
        };

        for (k, learner) in learners.iter_mut().enumerate() {
            let run = &mut runs[k];
            let started = Instant::now();
            let schedule = match (run.algorithm, &*learner) {
                (Algorithm::GuaTrue, _) => oracle.clone(),
                (Algorithm::Gmq, _) => gmq(&truth, &params)?,
                (Algorithm::Umcb | Algorithm::UmcbSw, Learner::Bandit(stats)) => {
                    umcb_select(stats, &ctx, spec, &params)?
                }
                (Algorithm::Eg, Learner::Bandit(stats)) => {
                    let mut rng = stream(world.seed, Purpose::Exploration, &[t as u64]);
                    eg_select(stats, &ctx, spec, &params, cfg.bandit.epsilon0, &mut rng)?.schedule
                }
                _ => unreachable!("learner matches algorithm"),
            };
            if schedule.len() as f64 * schedule.slot_duration > schedule.deadline {
                return Err(Error::Deadline {
                    slots: schedule.len(),
                    slot_duration: schedule.slot_duration,
                    deadline: schedule.deadline,
                });
            }
            let (observed, reward) = if run.algorithm == Algorithm::GuaTrue {
                (oracle_obs.clone(), gua_reward)
            } else {
                let obs = world.realize(t, &truth, &schedule);
                let r = realized_reward(&world, &initial, &rates, &schedule, &obs)?;
                (obs, r)
            };
            if let Learner::Bandit(stats) = learner {
                update(stats, t, &schedule, &observed, sharing.as_ref())?;
            }
            run.wall_time += started.elapsed();
            if run.algorithm == Algorithm::GuaTrue {
                run.wall_time += oracle_time;
            }
            run.matches_oracle.push(schedule == oracle);
            run.ledger.push(reward, gua_reward, ub);
            rows.push(TraceRow {
                round: t,
                algorithm: run.algorithm.name(),
                reward,
                ub_reward: ub,
                gua_reward,
                alpha_regret_cum: 0.0,
                ub_regret_cum: 0.0,
            });
        }
    }
    let n_alg = runs.len();
    for (k, run) in runs.iter_mut().enumerate() {
        run.regret = alpha_regret(&run.ledger, alpha)?;
        for t in 0..horizon {
            let row = &mut rows[t * n_alg + k];
            row.alpha_regret_cum = run.regret.alpha[t];
            row.ub_regret_cum = run.regret.upper_bound[t];
        }
    }
    Ok(RunOutput {
        rows,
        runs,
        window,
        variation,
    })
}

pub fn config_hash(cfg: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(cfg.to_toml().as_bytes()))
}

/// Files written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct RunFiles {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub manifest: PathBuf,
    pub timing: PathBuf,
}

impl RunFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            trace: dir.join("trace.csv"),
            summary: dir.join("summary.csv"),
            manifest: dir.join("run_manifest.txt"),
            timing: dir.join("timing.csv"),
        }
    }
}

const SUMMARY_HEADER: [&str; 9] = [
    "algorithm",
    "rounds",
    "mean_reward",
    "final_tenth_mean_reward",
    "mean_gua_reward",
    "mean_ub_reward",
    "alpha_regret",
    "ub_regret",
    "window",
];

/// Simulates and writes `trace.csv`, `summary.csv`, `timing.csv` and
/// `run_manifest.txt` into `cfg.output_dir`.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<(RunOutput, RunFiles)> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    let files = RunFiles::in_dir(dir);
    // Fail on an unwritable directory before simulating.
    fs::write(&files.manifest, "")?;
    let out = simulate(cfg)?;

    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&files.trace)?;
    w.write_record([
        "round",
        "algorithm",
        "reward",
        "ub_reward",
        "gua_reward",
        "alpha_regret_cum",
        "ub_regret_cum",
    ])?;
    for row in &out.rows {
        w.serialize(row)?;
    }
    w.flush()?;

    let mut s = csv::Writer::from_path(&files.summary)?;
    s.write_record(SUMMARY_HEADER)?;
    for run in &out.runs {
        let l = &run.ledger;
        let n = l.len().max(1) as f64;
        s.write_record([
            run.algorithm.name().to_string(),
            l.len().to_string(),
            (l.reward_total / n).to_string(),
            run.tail_mean(0.1).to_string(),
            (l.gua_true_total / n).to_string(),
            (l.upper_bound_total / n).to_string(),
            run.regret.alpha.last().copied().unwrap_or(0.0).to_string(),
            run.regret
                .upper_bound
                .last()
                .copied()
                .unwrap_or(0.0)
                .to_string(),
            out.window.to_string(),
        ])?;
    }
    s.flush()?;

    let mut tm = csv::Writer::from_path(&files.timing)?;
    tm.write_record(["algorithm", "wall_seconds"])?;
    for run in &out.runs {
        tm.write_record([
            run.algorithm.name().to_string(),
            run.wall_time.as_secs_f64().to_string(),
        ])?;
    }
    tm.flush()?;

    let algorithms: Vec<&str> = cfg.algorithms.iter().map(|a| a.name()).collect();
    let manifest = format!(
        "beamcharge {}\nconfig_sha256 {}\nseed {}\nrounds {}\nalgorithms {}\nwindow {}\nvariation_d {}\nvariation_v {}\n",
        env!("CARGO_PKG_VERSION"),
        config_hash(cfg),
        cfg.seed,
        cfg.rounds,
        algorithms.join(","),
        out.window,
        out.variation.0,
        out.variation.1,
    );
    fs::write(&files.manifest, manifest)?;
    Ok((out, files))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Battery capacity.
    Q,
    /// Number of sensors.
    N,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Q" | "q" => Ok(Self::Q),
            "N" | "n" => Ok(Self::N),
            other => Err(Error::Argument(format!("unknown sweep axis {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: &'static str,
    pub value: f64,
    pub algorithm: &'static str,
    /// Mean reward over the final 10% of rounds.
    pub mean_utility: f64,
    pub mean_utility_per_sensor: f64,
}

/// Config for one sweep point.
pub fn sweep_point(cfg: &ScenarioConfig, axis: SweepAxis, value: f64) -> Result<ScenarioConfig> {
    let mut c = cfg.clone();
    match axis {
        SweepAxis::Q => c.energy.capacity = value,
        SweepAxis::N => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Argument(format!(
                    "sensor count {value} is not a positive integer"
                )));
            }
            let n = value as usize;
            match &mut c.sensors.positions {
                Some(p) if p.len() >= n => p.truncate(n),
                Some(p) => {
                    return Err(Error::Argument(format!(
                        "only {} sensor positions listed, {n} requested",
                        p.len()
                    )))
                }
                None => c.sensors.count = Some(n),
            }
        }
    }
    let label = match axis {
        SweepAxis::Q => "Q",
        SweepAxis::N => "N",
    };
    c.output_dir = cfg.output_dir.join(format!("{label}-{value}"));
    c.validate()?;
    Ok(c)
}

/// Runs one experiment per value; with `write`, each run lands in its own
/// subdirectory and the table in `sweep.csv`.
pub fn sweep(
    cfg: &ScenarioConfig,
    axis: SweepAxis,
    values: &[f64],
    write: bool,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::Argument("sweep needs at least one value".into()));
    }
    let label = match axis {
        SweepAxis::Q => "Q",
        SweepAxis::N => "N",
    };
    let mut table = Vec::new();
    for &v in values {
        let point = sweep_point(cfg, axis, v)?;
        let out = if write {
            run_experiment(&point)?.0
        } else {
            simulate(&point)?
        };
        let n = point.n_sensors() as f64;
        for run in &out.runs {
            let m = run.tail_mean(0.1);
            table.push(SweepRow {
                axis: label,
                value: v,
                algorithm: run.algorithm.name(),
                mean_utility: m,
                mean_utility_per_sensor: m / n,
            });
        }
    }
    if write {
        fs::create_dir_all(&cfg.output_dir)?;
        let mut w = csv::Writer::from_path(cfg.output_dir.join("sweep.csv"))?;
        for row in &table {
            w.serialize(row)?;
        }
        w.flush()?;
    }
    Ok(table)
}
