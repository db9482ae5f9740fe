//! One navigation episode: measure, test for success, choose a control, execute.

use beings_core::scene::render;
use beings_core::{
    describe, dissimilarity, movement_cost, propagate, step, CellGrid, Channel, ControlInput, Descriptor, GridBelief, Image, ImageDescriptor,
    PlanContext, Planner, Pose, Result, StepOutcome, ThumbnailDescriptor,
};
use serde::{Deserialize, Serialize};

use crate::config::EpisodeConfig;
use crate::strategy::{rendered_prior, strategy_directly, Strategy};
use crate::tasks::Task;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub channel: Channel,
    pub magnitude: f64,
}

impl From<ControlInput<f64>> for ControlRecord {
    fn from(u: ControlInput<f64>) -> Self {
        Self { channel: u.channel, magnitude: u.magnitude }
    }
}

impl From<ControlRecord> for ControlInput<f64> {
    fn from(r: ControlRecord) -> Self {
        ControlInput::new(r.channel, r.magnitude)
    }
}

/// One line of the episode log. `control` is absent on the final record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub trial: usize,
    pub step: usize,
    pub pose: [f64; 4],
    pub dissimilarity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlRecord>,
    /// Movement cost of the executed control, including any collision penalty.
    pub cost: f64,
    pub collided: bool,
    pub belief: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best: Option<usize>,
    /// Predicted trajectory of every rollout, `[x, y, z, yaw]` per pose.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rollouts: Option<Vec<Vec<[f64; 4]>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub success: bool,
    /// Controls executed.
    pub steps: usize,
    pub total_cost: f64,
    pub final_pose: Pose<f64>,
    /// Distance from the final position to the goal position.
    pub ne: f64,
    /// Smallest distance to the goal position over the episode.
    pub min_ne: f64,
    pub final_dissimilarity: f64,
    pub trajectory: Vec<Pose<f64>>,
    pub belief_snapshots: Vec<Vec<f64>>,
    pub collisions: usize,
    pub diagnostic: Option<String>,
    pub records: Vec<StepRecord>,
}

/// Planner seed of trial `trial` in a batch seeded with `seed`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Fixed per-task data shared by every trial.
pub struct Prepared<'a> {
    pub task: &'a Task,
    pub goal: Descriptor<f64>,
    pub grid: CellGrid<f64>,
    /// Prior of the greedy baseline, computed once.
    pub directly_prior: Option<GridBelief<f64>>,
}

impl<'a> Prepared<'a> {
    pub fn new(task: &'a Task, cfg: &EpisodeConfig) -> Result<Self> {
        let meas_cam = cfg.camera.measurement_camera()?;
        let goal = describe(&render(&task.scene, &meas_cam, task.scene.goal_pose()));
        let b = task.scene.bounds();
        let grid = CellGrid::covering((b.min.x, b.min.y), b.size().x, b.size().y, cfg.cell_size)?;
        let directly_prior = if cfg.strategy == Strategy::Directly {
            let cam = cfg.camera.planner_camera()?;
            Some(rendered_prior(grid, &task.scene, &cam, &ThumbnailDescriptor::default(), &goal, task.start.z)?)
        } else {
            None
        };
        Ok(Self { task, goal, grid, directly_prior })
    }
}

enum Driver {
    Planner(Box<Planner<f64>>),
    Directly(GridBelief<f64>),
}

impl Driver {
    fn belief(&self) -> &GridBelief<f64> {
        match self {
            Driver::Planner(p) => p.belief(),
            Driver::Directly(b) => b,
        }
    }
}

pub fn run_episode(prep: &Prepared<'_>, cfg: &EpisodeConfig, trial: usize) -> Result<EpisodeResult> {
    let scene = &prep.task.scene;
    let planner_cam = cfg.camera.planner_camera()?;
    let meas_cam = cfg.camera.measurement_camera()?;
    let cost_cfg = cfg.cost.to_config();
    let descriptor = ThumbnailDescriptor::default();
    let goal_pos = scene.goal_pose().position();
    let mut driver = match cfg.strategy.planner_mode() {
        Some(mode) => {
            let pc = cfg.planner.to_config(trial_seed(cfg.seed, trial));
            Driver::Planner(Box::new(Planner::new(pc, mode, GridBelief::uniform(prep.grid))?))
        }
        None => Driver::Directly(prep.directly_prior.clone().unwrap_or_else(|| GridBelief::uniform(prep.grid))),
    };
    let ctx = PlanContext { scene, camera: &planner_cam, descriptor: &descriptor, goal: &prep.goal, cost: &cost_cfg, epsilon: cfg.epsilon };

    let mut pose = prep.task.start;
    let mut out = EpisodeResult {
        success: false,
        steps: 0,
        total_cost: 0.0,
        final_pose: pose,
        ne: 0.0,
        min_ne: f64::INFINITY,
        final_dissimilarity: 1.0,
        trajectory: vec![pose],
        belief_snapshots: Vec::new(),
        collisions: 0,
        diagnostic: None,
        records: Vec::new(),
    };
    for k in 0..=cfg.max_steps {
        let measurement: Image<f64> = render(scene, &meas_cam, &pose);
        let d = dissimilarity(&prep.goal, &descriptor.describe(&measurement))?;
        out.min_ne = out.min_ne.min((pose.position() - goal_pos).norm());
        out.final_dissimilarity = d;
        let mut record = StepRecord {
            trial,
            step: k,
            pose: pose.to_array(),
            dissimilarity: d,
            control: None,
            cost: 0.0,
            collided: false,
            belief: Vec::new(),
            weights: None,
            best: None,
            rollouts: None,
        };
        if d < cfg.epsilon {
            out.success = true;
            record.belief = driver.belief().masses().to_vec();
            out.belief_snapshots.push(record.belief.clone());
            out.records.push(record);
            break;
        }
        if k == cfg.max_steps {
            record.belief = driver.belief().masses().to_vec();
            out.belief_snapshots.push(record.belief.clone());
            out.records.push(record);
            break;
        }
        let input = match &mut driver {
            Driver::Planner(p) => match p.plan_step(&pose, &measurement, &ctx) {
                Ok(StepOutcome::Control { input, .. }) => {
                    if let Some(t) = p.telemetry() {
                        record.weights = Some(t.weights.clone());
                        record.best = Some(t.best);
                        if cfg.record_rollouts {
                            record.rollouts =
                                Some(t.sequences.iter().map(|s| propagate(&pose, s.inputs()).iter().map(|q| q.to_array()).collect()).collect());
                        }
                    }
                    input
                }
                Ok(StepOutcome::Complete { .. }) => unreachable!("success is tested before planning"),
                Err(e) => {
                    out.diagnostic = Some(format!("step {k}: {e}"));
                    record.belief = p.belief().masses().to_vec();
                    out.belief_snapshots.push(record.belief.clone());
                    out.records.push(record);
                    break;
                }
            },
            Driver::Directly(b) => {
                b.observe(&pose, 1.0 - d)?;
                strategy_directly(b, &pose, &cfg.planner.bounds())
            }
        };
        record.belief = driver.belief().masses().to_vec();
        out.belief_snapshots.push(record.belief.clone());
        let (next, c, collided) = execute(scene, &pose, &input, &cost_cfg);
        record.control = Some(input.into());
        record.cost = c;
        record.collided = collided;
        out.records.push(record);
        out.total_cost += c;
        out.collisions += usize::from(collided);
        out.steps += 1;
        pose = next;
        out.trajectory.push(pose);
    }
    out.final_pose = pose;
    out.ne = (pose.position() - goal_pos).norm();
    Ok(out)
}

/// Applies one control in the simulator. A colliding step is charged in full and leaves the robot in place.
pub fn execute(
    scene: &beings_core::SceneModel<f64>,
    pose: &Pose<f64>,
    input: &ControlInput<f64>,
    cost: &beings_core::CostConfig<f64>,
) -> (Pose<f64>, f64, bool) {
    let target = step(pose, input);
    let c = movement_cost(scene, pose, &target, cost);
    let collided = scene.segment_collides(pose, &target, cost.robot_radius);
    let next = if collided { Pose::new(pose.x, pose.y, pose.z, target.theta) } else { target };
    (next, c, collided)
}
