//! Exploration strategies: the full method, its ablations and the greedy baseline.

use std::fmt;
use std::str::FromStr;

use beings_core::scene::{render, Camera, SceneModel};
use beings_core::{
    wrap_angle, CellGrid, Channel, ControlBounds, ControlInput, Descriptor, Error, GridBelief, ImageDescriptor, PlannerMode, Pose,
    Result,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "beings")]
    Beings,
    #[serde(rename = "directly")]
    Directly,
    #[serde(rename = "random")]
    Random,
    #[serde(rename = "bayes-only")]
    BayesOnly,
    #[serde(rename = "mcmpc-only")]
    McmpcOnly,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [Strategy::Beings, Strategy::Directly, Strategy::Random, Strategy::BayesOnly, Strategy::McmpcOnly];

    /// Planner mode for the sampling-based strategies; `None` for the greedy baseline.
    pub fn planner_mode(self) -> Option<PlannerMode> {
        match self {
            Strategy::Beings => Some(PlannerMode::FULL),
            Strategy::BayesOnly => Some(PlannerMode::BAYES_ONLY),
            Strategy::McmpcOnly => Some(PlannerMode::MCMPC_ONLY),
            Strategy::Random => Some(PlannerMode::RANDOM),
            Strategy::Directly => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Beings => "beings",
            Strategy::Directly => "directly",
            Strategy::Random => "random",
            Strategy::BayesOnly => "bayes-only",
            Strategy::McmpcOnly => "mcmpc-only",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase();
        match key.as_str() {
            "beings" => Ok(Strategy::Beings),
            "directly" => Ok(Strategy::Directly),
            "random" => Ok(Strategy::Random),
            "bayesonly" => Ok(Strategy::BayesOnly),
            "mcmpconly" => Ok(Strategy::McmpcOnly),
            _ => Err(Error::InvalidArgument(format!("unknown strategy `{s}`"))),
        }
    }
}

/// Yaw tolerance below which the greedy baseline stops turning and translates.
const HEADING_TOL: f64 = 1e-6;

/// Greedy step toward the center of the highest-mass cell: turn to its bearing, then fly straight.
pub fn strategy_directly(belief: &GridBelief<f64>, s: &Pose<f64>, bounds: &ControlBounds<f64>) -> ControlInput<f64> {
    let (tx, ty) = belief.grid().cell_center(belief.argmax());
    let (dx, dy) = (tx - s.x, ty - s.y);
    let dist = dx.hypot(dy);
    if dist < 1e-9 {
        return ControlInput::zero();
    }
    let err = wrap_angle(dy.atan2(dx) - s.theta).unwrap_or(0.0);
    if err.abs() > HEADING_TOL {
        ControlInput::new(Channel::Yaw, err.clamp(-bounds.yaw, bounds.yaw))
    } else {
        ControlInput::new(Channel::Vx, dist.min(bounds.translation))
    }
}

/// Prior for the greedy baseline: each cell weighted by the best goal similarity among
/// eight headings rendered from its center at height `z`.
pub fn rendered_prior<D: ImageDescriptor<f64>>(
    grid: CellGrid<f64>,
    scene: &SceneModel<f64>,
    camera: &Camera<f64>,
    descriptor: &D,
    goal: &Descriptor<f64>,
    z: f64,
) -> Result<GridBelief<f64>> {
    let masses = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.cell_center(i);
            (0..8)
                .map(|k| {
                    let pose = Pose::new(x, y, z, k as f64 * std::f64::consts::FRAC_PI_4);
                    let img = render(scene, camera, &pose);
                    beings_core::detection_prob(goal, &descriptor.describe(&img)).unwrap_or(0.0)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    GridBelief::from_masses(grid, masses)
}
