//! Image-goal navigation as Monte Carlo model-predictive control over rendered rollouts.
//!
//! A robot searches a known arena for the pose a goal photo was taken from. A
//! grid belief tracks where that pose may be; a particle set of control
//! sequences is scored by rendering the view each sequence would produce,
//! weighed against the belief, and the best first input is executed.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar for application code.

pub mod belief;
pub mod cost;
pub mod error;
pub mod geometry;
pub mod grid;
pub mod image;
pub mod motion;
pub mod planner;
pub mod real;
pub mod scene;
pub mod similarity;

pub use belief::GridBelief;
pub use cost::{exploration_cost, movement_cost, weight, CostConfig, RolloutScorer};
pub use error::{Error, Result};
pub use geometry::{wrap_angle, Aabb, Pose, Vec3};
pub use grid::CellGrid;
pub use image::{Descriptor, Image};
pub use motion::{propagate, step, Channel, ControlBounds, ControlInput, ControlSequence};
pub use planner::{
    normalized_weights, systematic_resample, PlanContext, Planner, PlannerConfig, PlannerMode, RolloutEnsemble, StepOutcome,
    StepTelemetry, Temperature,
};
pub use real::Real;
pub use scene::{render, Backend, Camera, ColoredBox, SceneModel, View};
pub use similarity::{describe, detection_prob, dissimilarity, ImageDescriptor, ThumbnailDescriptor};

pub type Pose64 = Pose<f64>;
pub type Pose32 = Pose<f32>;
pub type Scene64 = SceneModel<f64>;
pub type Scene32 = SceneModel<f32>;
pub type Belief64 = GridBelief<f64>;
pub type Belief32 = GridBelief<f32>;
pub type Planner64 = Planner<f64>;
pub type Planner32 = Planner<f32>;
pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
