//! Experiment harness: task scenes, strategies, episodes, batch metrics and artifacts.

pub mod artifacts;
pub mod config;
pub mod episode;
pub mod metrics;
pub mod strategy;
pub mod tasks;

pub use config::{EpisodeConfig, TaskSpec};
pub use episode::{run_episode, EpisodeResult, Prepared, StepRecord};
pub use metrics::{run_batch, BatchOutcome, Summary};
pub use strategy::Strategy;
pub use tasks::{make_task, Difficulty, Task};
