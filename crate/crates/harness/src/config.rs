//! Experiment configuration as TOML. Every field has a default, so a file only
//! lists what it changes; command-line flags are applied on top afterwards.
//!
//! ```toml
//! task = "medium"          # easy | medium | hard | path to a scene file
//! strategy = "beings"      # beings | directly | random | bayes-only | mcmpc-only
//! max_steps = 50
//! epsilon = 0.05
//! trials = 50
//! seed = 7
//!
//! [planner]
//! rollouts = 32
//! horizon = 5
//!
//! [cost]
//! terminal_weight = 2e5
//!
//! [camera]
//! hfov_deg = 90.0
//! ```

use std::path::{Path, PathBuf};

use beings_core::scene::config::SceneFile;
use beings_core::scene::Camera;
use beings_core::{ControlBounds, CostConfig, Error, PlannerConfig, Result, Temperature};
use serde::{Deserialize, Serialize};

use crate::strategy::Strategy;
use crate::tasks::{make_task, Difficulty, Task};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerSettings {
    pub rollouts: usize,
    pub horizon: usize,
    pub mutation_prob: f64,
    pub magnitude_sigma: f64,
    pub max_translation: f64,
    pub max_yaw: f64,
    /// Fixed softmax temperature; the batch median is used when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    pub refinements: usize,
    pub parallel: bool,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        let d = PlannerConfig::<f64>::default();
        Self {
            rollouts: d.rollouts,
            horizon: d.horizon,
            mutation_prob: d.mutation_prob,
            magnitude_sigma: d.magnitude_sigma,
            max_translation: d.bounds.translation,
            max_yaw: d.bounds.yaw,
            temperature: Some(EXPERIMENT_TEMPERATURE),
            refinements: EXPERIMENT_REFINEMENTS,
            parallel: true,
        }
    }
}

impl PlannerSettings {
    pub fn to_config(&self, seed: u64) -> PlannerConfig<f64> {
        PlannerConfig {
            rollouts: self.rollouts,
            horizon: self.horizon,
            mutation_prob: self.mutation_prob,
            magnitude_sigma: self.magnitude_sigma,
            seed,
            bounds: self.bounds(),
            temperature: self.temperature.map_or(Temperature::Median, Temperature::Fixed),
            refinements: self.refinements,
            parallel: self.parallel,
        }
    }

    pub fn bounds(&self) -> ControlBounds<f64> {
        ControlBounds { translation: self.max_translation, yaw: self.max_yaw }
    }
}

/// Weight of the terminal dissimilarity used for experiments. Stage costs are divided
/// by cell probabilities and run to thousands per step while 𝒟 ≤ 1, so a unit weight
/// would never trade motion for a better view.
pub const EXPERIMENT_TERMINAL_WEIGHT: f64 = 3e5;

/// Softmax temperature used for experiments. The batch median is dominated by the
/// large common cost floor and leaves the weights nearly flat.
pub const EXPERIMENT_TEMPERATURE: f64 = 2000.0;

/// Extra score/resample passes per control step used for experiments.
pub const EXPERIMENT_REFINEMENTS: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSettings {
    pub distance_rate: f64,
    pub collision_penalty: f64,
    pub prob_floor: f64,
    pub terminal_weight: f64,
    pub robot_radius: f64,
}

impl Default for CostSettings {
    fn default() -> Self {
        let d = CostConfig::<f64>::default();
        Self {
            distance_rate: d.distance_rate,
            collision_penalty: d.collision_penalty,
            prob_floor: d.prob_floor,
            terminal_weight: EXPERIMENT_TERMINAL_WEIGHT,
            robot_radius: d.robot_radius,
        }
    }
}

impl CostSettings {
    pub fn to_config(&self) -> CostConfig<f64> {
        CostConfig {
            distance_rate: self.distance_rate,
            collision_penalty: self.collision_penalty,
            prob_floor: self.prob_floor,
            terminal_weight: self.terminal_weight,
            robot_radius: self.robot_radius,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraSettings {
    pub hfov_deg: f64,
    /// Resolution of predicted (rollout) views.
    pub planner: [usize; 2],
    /// Resolution of real measurements and of the goal image.
    pub measurement: [usize; 2],
}

impl Default for CameraSettings {
    fn default() -> Self {
        Self { hfov_deg: 90.0, planner: [64, 48], measurement: [256, 192] }
    }
}

impl CameraSettings {
    pub fn planner_camera(&self) -> Result<Camera<f64>> {
        Camera::with_hfov(self.planner[0], self.planner[1], self.hfov_deg.to_radians())
    }

    pub fn measurement_camera(&self) -> Result<Camera<f64>> {
        Camera::with_hfov(self.measurement[0], self.measurement[1], self.hfov_deg.to_radians())
    }
}

/// A built-in difficulty or a scene file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TaskSpec {
    Builtin(Difficulty),
    Scene(PathBuf),
}

impl TaskSpec {
    pub fn parse(s: &str) -> Self {
        s.parse().map(TaskSpec::Builtin).unwrap_or_else(|_| TaskSpec::Scene(PathBuf::from(s)))
    }

    pub fn label(&self) -> String {
        match self {
            TaskSpec::Builtin(d) => d.name().to_owned(),
            TaskSpec::Scene(p) => p.display().to_string(),
        }
    }

    /// Builds the task. Scene files must declare a start pose.
    pub fn build(&self, seed: u64) -> Result<Task> {
        match self {
            TaskSpec::Builtin(d) => Ok(make_task(*d, seed)),
            TaskSpec::Scene(path) => {
                let file = SceneFile::load(path)?;
                let (scene, start) = file.build::<f64>(path.parent())?;
                let start = start.ok_or_else(|| Error::InvalidConfig(format!("{} has no start pose", path.display())))?;
                Ok(Task { scene, start })
            }
        }
    }
}

impl Serialize for TaskSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for TaskSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(TaskSpec::parse(&String::deserialize(d)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub task: TaskSpec,
    pub strategy: Strategy,
    pub max_steps: usize,
    /// Success threshold on the measured dissimilarity.
    pub epsilon: f64,
    pub trials: usize,
    pub seed: u64,
    /// Side of the square belief cells, meters.
    pub cell_size: f64,
    /// Write every rollout trajectory into the episode log.
    pub record_rollouts: bool,
    pub planner: PlannerSettings,
    pub cost: CostSettings,
    pub camera: CameraSettings,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            task: TaskSpec::Builtin(Difficulty::Easy),
            strategy: Strategy::Beings,
            max_steps: 50,
            epsilon: 0.05,
            trials: 50,
            seed: 0,
            cell_size: 1.0,
            record_rollouts: false,
            planner: PlannerSettings::default(),
            cost: CostSettings::default(),
            camera: CameraSettings::default(),
        }
    }
}

impl EpisodeConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path.as_ref())?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::InvalidConfig("epsilon must lie in (0, 1)".into()));
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidConfig("max_steps must be at least 1".into()));
        }
        if !(self.cell_size > 0.0) {
            return Err(Error::InvalidConfig("cell_size must be positive".into()));
        }
        self.planner.to_config(self.seed).validate()?;
        self.cost.to_config().validate()?;
        self.camera.planner_camera()?;
        self.camera.measurement_camera()?;
        Ok(())
    }
}
