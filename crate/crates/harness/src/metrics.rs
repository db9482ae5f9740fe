//! Batch metrics and the reference path cost.
//!
//! `SPC = mean_i( success_i · C*_i / max(C_i, C*_i) )`, where `C*` is the distance
//! rate times the shortest collision-free path length and `C_i` the realized cost
//! including collision penalties.

use beings_core::{Aabb, Error, Result, SceneModel, Vec3};
use pathfinding::prelude::astar;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::EpisodeConfig;
use crate::episode::{run_episode, EpisodeResult, Prepared};

/// Lattice spacing of the reference path search, meters.
pub const LATTICE: f64 = 0.1;

fn footprint_distance(o: &Aabb<f64>, x: f64, y: f64) -> f64 {
    let dx = (o.min.x - x).max(0.0).max(x - o.max.x);
    let dy = (o.min.y - y).max(0.0).max(y - o.max.y);
    dx.hypot(dy)
}

/// Length of the shortest 8-connected path on a square lattice over the arena floor,
/// avoiding obstacle footprints inflated by `radius`. Start and goal snap to their nearest nodes.
pub fn shortest_path_length(scene: &SceneModel<f64>, start: Vec3<f64>, goal: Vec3<f64>, radius: f64, spacing: f64) -> Result<f64> {
    let b = scene.bounds();
    let nx = ((b.size().x / spacing).round() as i64).max(1);
    let ny = ((b.size().y / spacing).round() as i64).max(1);
    let node = |p: Vec3<f64>| {
        (((p.x - b.min.x) / spacing).round().clamp(0.0, nx as f64) as i64, ((p.y - b.min.y) / spacing).round().clamp(0.0, ny as f64) as i64)
    };
    let free = |(i, j): (i64, i64)| {
        let (x, y) = (b.min.x + i as f64 * spacing, b.min.y + j as f64 * spacing);
        scene.obstacles().iter().all(|o| footprint_distance(o, x, y) > radius)
    };
    let (s, g) = (node(start), node(goal));
    if !free(s) || !free(g) {
        return Err(Error::InvalidConfig("start or goal lies inside an inflated obstacle".into()));
    }
    // Integer edge weights: 1000 per axis step, 1414 per diagonal.
    const AXIS: u64 = 1000;
    const DIAG: u64 = 1414;
    let successors = |&(i, j): &(i64, i64)| {
        let mut out = Vec::with_capacity(8);
        for di in -1..=1i64 {
            for dj in -1..=1i64 {
                if di == 0 && dj == 0 {
                    continue;
                }
                let n = (i + di, j + dj);
                if n.0 < 0 || n.1 < 0 || n.0 > nx || n.1 > ny || !free(n) {
                    continue;
                }
                out.push((n, if di != 0 && dj != 0 { DIAG } else { AXIS }));
            }
        }
        out
    };
    let heuristic = |&(i, j): &(i64, i64)| {
        let (dx, dy) = ((i - g.0).unsigned_abs(), (j - g.1).unsigned_abs());
        let (lo, hi) = (dx.min(dy), dx.max(dy));
        // Octile distance with the diagonal rounded down keeps the heuristic admissible.
        lo * DIAG + (hi - lo) * AXIS
    };
    let (path, _) = astar(&s, successors, heuristic, |n| *n == g)
        .ok_or_else(|| Error::InvalidConfig("goal is unreachable from the start".into()))?;
    let len: f64 = path
        .windows(2)
        .map(|w| if w[0].0 != w[1].0 && w[0].1 != w[1].1 { std::f64::consts::SQRT_2 } else { 1.0 } * spacing)
        .sum();
    Ok(len)
}

/// Success-weighted path cost of one trial.
pub fn spc_term(success: bool, cost: f64, reference: f64) -> f64 {
    if !success {
        return 0.0;
    }
    let denom = cost.max(reference);
    if denom <= 0.0 {
        1.0
    } else {
        reference / denom
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    #[serde(rename = "SR")]
    pub sr: f64,
    #[serde(rename = "SPC")]
    pub spc: f64,
    #[serde(rename = "NE")]
    pub ne: f64,
    /// Fewest steps among successful trials (NaN if none succeeded).
    #[serde(rename = "NS_min")]
    pub ns_min: f64,
    #[serde(rename = "NS_mean")]
    pub ns_mean: f64,
}

/// Sequential reduction of per-trial results against a reference cost `C*`.
pub fn summarize(results: &[EpisodeResult], reference_cost: f64) -> Summary {
    let n = results.len().max(1) as f64;
    let successes: Vec<&EpisodeResult> = results.iter().filter(|r| r.success).collect();
    let spc: f64 = results.iter().map(|r| spc_term(r.success, r.total_cost, reference_cost)).sum::<f64>() / n;
    let ne = results.iter().map(|r| r.ne).sum::<f64>() / n;
    let (ns_min, ns_mean) = if successes.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let min = successes.iter().map(|r| r.steps).min().unwrap_or(0) as f64;
        let mean = successes.iter().map(|r| r.steps as f64).sum::<f64>() / successes.len() as f64;
        (min, mean)
    };
    Summary { sr: successes.len() as f64 / n, spc, ne, ns_min, ns_mean }
}

/// Mean over trials of the closest approach to the goal.
pub fn mean_min_ne(results: &[EpisodeResult]) -> f64 {
    results.iter().map(|r| r.min_ne).sum::<f64>() / results.len().max(1) as f64
}

/// Median step count of successful trials.
pub fn median_steps(results: &[EpisodeResult]) -> Option<f64> {
    let mut s: Vec<usize> = results.iter().filter(|r| r.success).map(|r| r.steps).collect();
    if s.is_empty() {
        return None;
    }
    s.sort_unstable();
    let m = s.len();
    Some(if m % 2 == 1 { s[m / 2] as f64 } else { (s[m / 2 - 1] + s[m / 2]) as f64 / 2.0 })
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub summary: Summary,
    pub reference_cost: f64,
    pub results: Vec<EpisodeResult>,
}

/// Runs `cfg.trials` independent episodes of one task, in parallel, reduced in trial order.
pub fn run_batch(cfg: &EpisodeConfig) -> Result<BatchOutcome> {
    cfg.validate()?;
    if cfg.trials < 1 {
        return Err(Error::InvalidConfig("a batch needs at least one trial".into()));
    }
    let task = cfg.task.build(cfg.seed)?;
    let prep = Prepared::new(&task, cfg)?;
    let length = shortest_path_length(&task.scene, task.start.position(), task.scene.goal_pose().position(), cfg.cost.robot_radius, LATTICE)?;
    let reference_cost = cfg.cost.distance_rate * length;
    let results = (0..cfg.trials).into_par_iter().map(|t| run_episode(&prep, cfg, t)).collect::<Result<Vec<_>>>()?;
    Ok(BatchOutcome { summary: summarize(&results, reference_cost), reference_cost, results })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tasks::{make_task, Difficulty};

    #[test]
    fn spc_examples() {
        assert_eq!(spc_term(false, 10.0, 10.0), 0.0);
        assert_eq!(spc_term(true, 10.0, 10.0), 1.0);
        assert_eq!(spc_term(true, 20.0, 10.0), 0.5);
        assert_eq!(spc_term(true, 5.0, 10.0), 1.0);
    }

    #[test]
    fn clear_arena_path_is_near_euclidean() {
        let t = make_task(Difficulty::Easy, 0);
        let len = shortest_path_length(&t.scene, Vec3::new(1.0, 1.0, 1.0), Vec3::new(4.0, 5.0, 1.0), 0.3, LATTICE).unwrap();
        // Octile path: 30 diagonal + 10 straight lattice steps.
        assert!((len - (3.0 * std::f64::consts::SQRT_2 + 1.0)).abs() < 1e-9);
        let straight = shortest_path_length(&t.scene, Vec3::new(1.0, 1.0, 1.0), Vec3::new(1.0, 5.0, 1.0), 0.3, LATTICE).unwrap();
        assert!((straight - 4.0).abs() < 1e-9);
    }

    #[test]
    fn obstacles_lengthen_the_path() {
        let t = make_task(Difficulty::Medium, 0);
        let (a, b) = (t.start.position(), t.scene.goal_pose().position());
        let len = shortest_path_length(&t.scene, a, b, 0.3, LATTICE).unwrap();
        assert!(len > (b - a).norm() + 0.05);
        assert!(shortest_path_length(&t.scene, t.scene.obstacles()[0].center(), b, 0.3, LATTICE).is_err());
    }
}
