//! Experiment orchestration: configuration, seeded scenarios, the round loop,
//! CSV outputs, sweeps and the self-check battery.

pub mod config;
pub mod instance;
pub mod rng;
pub mod run;
pub mod validate;
pub mod world;

pub use config::{Algorithm, ScenarioConfig, ScenarioKind};
pub use run::{run_experiment, simulate, sweep, RunOutput, SweepAxis, TraceRow};
pub use world::{beamscan, World};
