//! Scenario configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::UlaConfig;
use crate::energy::{check_deadline, UtilityKind};
use crate::error::{Error, Result};
use crate::geometry::{Area, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "umcb")]
    Umcb,
    #[serde(rename = "umcb-sw")]
    UmcbSw,
    #[serde(rename = "eg")]
    Eg,
    #[serde(rename = "gmq")]
    Gmq,
    /// Greedy oracle on the true expected powers.
    #[serde(rename = "gua-true")]
    GuaTrue,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::Umcb => "umcb",
            Self::UmcbSw => "umcb-sw",
            Self::Eg => "eg",
            Self::Gmq => "gmq",
            Self::GuaTrue => "gua-true",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AreaConfig {
    pub width: f64,
    pub height: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodebookConfig {
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    /// Number of sensors placed uniformly at random. Ignored when `positions`
    /// is given.
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub positions: Option<Vec<[f64; 2]>>,
    #[serde(default = "one")]
    pub antenna_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyConfig {
    pub capacity: f64,
    pub zeta: f64,
    pub deadline: f64,
    pub slot_duration: f64,
    pub slots: usize,
    #[serde(default = "default_utility")]
    pub utility: UtilityKind,
    /// Initial energies are drawn from `(0, context_fraction * capacity]`.
    #[serde(default = "default_context_fraction")]
    pub context_fraction: f64,
    /// RF-to-DC conversion efficiency.
    #[serde(default = "one")]
    pub efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    /// Harvest rate, before efficiency, at normalized power 1.
    pub peak_harvest_rate: f64,
    /// Distances below this are treated as this distance.
    #[serde(default = "one")]
    pub min_distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    Stationary,
    Nonstationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: ScenarioKind,
    #[serde(default = "default_drift")]
    pub drift_rate: f64,
}

/// Sliding window length: `"auto"` or a number of rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowSetting {
    Rounds(usize),
    Named(String),
}

impl Default for WindowSetting {
    fn default() -> Self {
        Self::Named("auto".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BanditConfig {
    #[serde(default = "default_epsilon0")]
    pub epsilon0: f64,
    #[serde(default)]
    pub window: WindowSetting,
    #[serde(default = "yes")]
    pub share_by_location: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

impl Default for BanditConfig {
    fn default() -> Self {
        Self {
            epsilon0: default_epsilon0(),
            window: WindowSetting::default(),
            share_by_location: true,
            alpha: default_alpha(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub rounds: usize,
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub area: AreaConfig,
    #[serde(default)]
    pub ula: UlaConfig,
    pub codebook: CodebookConfig,
    pub sensors: SensorConfig,
    pub energy: EnergyConfig,
    pub channel: ChannelConfig,
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub bandit: BanditConfig,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_utility() -> UtilityKind {
    UtilityKind::U1
}

fn default_context_fraction() -> f64 {
    0.3
}

fn default_drift() -> f64 {
    0.05
}

fn default_epsilon0() -> f64 {
    1.0 / 3.0
}

fn default_alpha() -> f64 {
    crate::oracle::gua_ratio()
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Small stationary scenario used by the examples and tests: 5 m x 5 m
    /// field, 1 m cells, 4 codewords, 5 sensors, 50 slots, 2000 rounds.
    pub fn desk() -> Self {
        Self {
            seed: 7,
            rounds: 2000,
            algorithms: vec![
                Algorithm::Umcb,
                Algorithm::UmcbSw,
                Algorithm::Eg,
                Algorithm::Gmq,
                Algorithm::GuaTrue,
            ],
            output_dir: default_output(),
            area: AreaConfig {
                width: 5.0,
                height: 5.0,
                epsilon: 1.0,
            },
            ula: UlaConfig::default(),
            codebook: CodebookConfig { size: 4 },
            sensors: SensorConfig {
                count: Some(5),
                positions: None,
                antenna_gain: 1.0,
            },
            energy: EnergyConfig {
                capacity: 500.0,
                zeta: 2.0,
                deadline: 1000.0,
                slot_duration: 20.0,
                slots: 50,
                utility: UtilityKind::U1,
                context_fraction: 0.3,
                efficiency: 1.0,
            },
            channel: ChannelConfig {
                peak_harvest_rate: 1.0,
                min_distance: 1.0,
            },
            scenario: ScenarioSection {
                kind: ScenarioKind::Stationary,
                drift_rate: 0.05,
            },
            bandit: BanditConfig::default(),
        }
    }

    /// [`desk`](Self::desk) with drifting antenna gains.
    pub fn desk_drifting() -> Self {
        let mut cfg = Self::desk();
        cfg.scenario.kind = ScenarioKind::Nonstationary;
        cfg
    }

    pub fn area(&self) -> Result<Area> {
        Area::new(self.area.width, self.area.height, self.area.epsilon)
    }

    pub fn n_sensors(&self) -> usize {
        match &self.sensors.positions {
            Some(p) => p.len(),
            None => self.sensors.count.unwrap_or(0),
        }
    }

    pub fn listed_positions(&self) -> Option<Vec<Point>> {
        self.sensors
            .positions
            .as_ref()
            .map(|v| v.iter().map(|&p| Point::from(p)).collect())
    }

    /// Fixed window length, or `None` for automatic sizing.
    pub fn fixed_window(&self) -> Result<Option<usize>> {
        match &self.bandit.window {
            WindowSetting::Rounds(0) => Err(Error::Config("window must be at least 1".into())),
            WindowSetting::Rounds(w) => Ok(Some(*w)),
            WindowSetting::Named(s) if s == "auto" => Ok(None),
            WindowSetting::Named(s) => Err(Error::Config(format!(
                "window must be \"auto\" or a number of rounds, got {s:?}"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let area = self.area()?;
        self.ula.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms selected".into()));
        }
        if self.codebook.size == 0 {
            return Err(Error::Config("codebook size must be at least 1".into()));
        }
        if self.n_sensors() == 0 {
            return Err(Error::Config("need at least one sensor".into()));
        }
        if let Some(ps) = self.listed_positions() {
            if let Some(p) = ps.iter().find(|p| !area.contains(**p)) {
                return Err(Error::Config(format!(
                    "sensor at ({}, {}) lies outside the field",
                    p.x, p.y
                )));
            }
        }
        let e = &self.energy;
        check_deadline(e.slots, e.slot_duration, e.deadline)?;
        let positive = [
            ("capacity", e.capacity),
            ("deadline", e.deadline),
            ("efficiency", e.efficiency),
            ("context fraction", e.context_fraction),
            ("antenna gain", self.sensors.antenna_gain),
            ("peak harvest rate", self.channel.peak_harvest_rate),
            ("minimum distance", self.channel.min_distance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if e.context_fraction > 1.0 {
            return Err(Error::Config("context fraction must not exceed 1".into()));
        }
        if !(e.zeta >= 1.0) {
            return Err(Error::Model(format!("zeta = {} < 1", e.zeta)));
        }
        if !(self.scenario.drift_rate >= 0.0) {
            return Err(Error::Config("drift rate must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.bandit.epsilon0) {
            return Err(Error::Config("epsilon0 must lie in [0, 1]".into()));
        }
        if !(self.bandit.alpha > 0.0 && self.bandit.alpha <= 1.0) {
            return Err(Error::Config("alpha must lie in (0, 1]".into()));
        }
        self.fixed_window()?;
        crate::energy::UtilitySpec::new(e.utility.clone(), self.n_sensors())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_round_trips_through_toml() {
        let cfg = ScenarioConfig::desk();
        cfg.validate().unwrap();
        let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn deadline_violation_is_rejected() {
        let mut cfg = ScenarioConfig::desk();
        cfg.energy.slots = 51;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Deadline { .. }));
        assert!(err.to_string().contains("real-time constraint"));
    }

    #[test]
    fn window_settings() {
        let mut cfg = ScenarioConfig::desk();
        assert_eq!(cfg.fixed_window().unwrap(), None);
        cfg.bandit.window = WindowSetting::Rounds(12);
        assert_eq!(cfg.fixed_window().unwrap(), Some(12));
        cfg.bandit.window = WindowSetting::Named("wide".into());
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn parses_minimal_file() {
        let text = r#"
            seed = 1
            rounds = 10
            algorithms = ["umcb", "gua-true"]
            [area]
            width = 2.0
            height = 2.0
            epsilon = 1.0
            [codebook]
            size = 2
            [sensors]
            positions = [[0.2, 0.3], [1.7, 1.1]]
            [energy]
            capacity = 100.0
            zeta = 2.0
            deadline = 100.0
            slot_duration = 10.0
            slots = 10
            utility = { table = [0.0, 0.7, 1.0] }
            [channel]
            peak_harvest_rate = 0.5
            [scenario]
            kind = "nonstationary"
            [bandit]
            window = 5
        "#;
        let cfg = ScenarioConfig::from_toml(text).unwrap();
        assert_eq!(cfg.n_sensors(), 2);
        assert_eq!(cfg.fixed_window().unwrap(), Some(5));
        assert_eq!(cfg.ula, UlaConfig::default());
        assert!(ScenarioConfig::from_toml(&text.replace("seed = 1", "")).is_err());
    }
}
