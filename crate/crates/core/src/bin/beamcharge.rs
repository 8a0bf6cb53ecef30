use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use beamcharge::geometry::{discretization_ratio_bound, BeamSectorGeometry};
use beamcharge::harness::instance::OracleInstance;
use beamcharge::harness::validate::validate;
use beamcharge::harness::{beamscan, run_experiment, sweep, ScenarioConfig, SweepAxis, World};
use beamcharge::Result;

#[derive(Parser)]
#[command(
    name = "beamcharge",
    version,
    about = "Beamforming charger scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Replace the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replace the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replace the config's number of rounds.
    #[arg(long)]
    rounds: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm and write trace, summary and manifest.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Repeat a run over battery capacities (Q) or sensor counts (N).
    Sweep {
        config: PathBuf,
        #[arg(long)]
        axis: SweepAxis,
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Solve a single round from an instance file (JSON or TOML).
    Oracle { instance: PathBuf },
    /// Print the in-cell power ratio bound.
    Bound {
        #[arg(long)]
        d1: f64,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
    /// Dump expected normalized power for every location, codeword and sensor.
    Beamscan {
        config: PathBuf,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in check battery and print one JSON line per check.
    Validate {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn load(path: &Path, o: &Overrides) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(d) = &o.out {
        cfg.output_dir = d.clone();
    }
    if let Some(r) = o.rounds {
        cfg.rounds = r;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run { config, overrides } => {
            let cfg = load(&config, &overrides)?;
            let (out, files) = run_experiment(&cfg)?;
            for run in &out.runs {
                let l = &run.ledger;
                let n = l.len().max(1) as f64;
                println!(
                    "{:<9} mean reward {:>9.4}  final 10% {:>9.4}  ub regret {:>12.3}",
                    run.algorithm.name(),
                    l.reward_total / n,
                    run.tail_mean(0.1),
                    run.regret.upper_bound.last().copied().unwrap_or(0.0),
                );
            }
            println!("trace written to {}", files.trace.display());
        }
        Command::Sweep {
            config,
            axis,
            values,
            overrides,
        } => {
            let cfg = load(&config, &overrides)?;
            println!("axis,value,algorithm,mean_utility,mean_utility_per_sensor");
            for row in sweep(&cfg, axis, &values, true)? {
                println!(
                    "{},{},{},{},{}",
                    row.axis,
                    row.value,
                    row.algorithm,
                    row.mean_utility,
                    row.mean_utility_per_sensor
                );
            }
        }
        Command::Oracle { instance } => {
            let report = OracleInstance::load(&instance)?.solve()?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
        }
        Command::Bound { d1, epsilon, gamma } => {
            let geom = BeamSectorGeometry {
                d1,
                theta1: 0.0,
                theta_m: 0.0,
                theta_l: 0.0,
                theta_r: 0.0,
                gamma,
                bounds: None,
            };
            println!("{}", discretization_ratio_bound(&geom, epsilon)?);
        }
        Command::Beamscan { config, out, seed } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let world = World::build(&cfg)?;
            let rows = beamscan(&world);
            let mut w = match out {
                Some(p) => csv::Writer::from_writer(
                    Box::new(std::fs::File::create(p)?) as Box<dyn std::io::Write>
                ),
                None => {
                    csv::Writer::from_writer(Box::new(std::io::stdout()) as Box<dyn std::io::Write>)
                }
            };
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Command::Validate { seed } => {
            let results = validate(seed);
            let passed = results.iter().filter(|r| r.passed).count();
            for r in &results {
                println!("{}", serde_json::to_string(r).expect("result serializes"));
            }
            eprintln!("{passed}/{} checks passed", results.len());
            return Ok(passed == results.len());
        }
    }
    Ok(true)
}
