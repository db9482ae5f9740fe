//! Easy / Medium / Hard task construction in a 10 m × 10 m × 2 m room.
//!
//! The room is lined with gray wall, floor and ceiling slabs just outside the
//! arena bounds. A banded mural covering the north wall marks the goal view; the
//! task seed only changes the distractor posters on the other walls.

use std::str::FromStr;

use beings_core::scene::{Backend, ColoredBox, SceneModel};
use beings_core::{Aabb, Error, Pose, Result, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const ARENA: [f64; 3] = [10.0, 10.0, 2.0];
/// Footprint of each obstacle pillar (0.5 m square, 1.5 m tall).
pub const OBSTACLE_SIDE: f64 = 0.5;
pub const OBSTACLE_HEIGHT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn name(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }

    fn start_goal(self) -> (Pose<f64>, Pose<f64>) {
        let north = std::f64::consts::FRAC_PI_2;
        match self {
            Difficulty::Easy => (Pose::new(5.0, 4.5, 1.0, north - 1.0), Pose::new(5.0, GOAL_Y, 1.0, north)),
            Difficulty::Medium => (Pose::new(5.0, 2.0, 1.0, north), Pose::new(5.0, GOAL_Y, 1.0, north)),
            Difficulty::Hard => (Pose::new(1.5, 1.5, 1.0, 0.0), Pose::new(7.5, GOAL_Y, 1.0, north)),
        }
    }

    /// Obstacle centers as fractions of the start-goal segment.
    fn obstacle_fractions(self) -> &'static [f64] {
        match self {
            Difficulty::Easy => &[],
            Difficulty::Medium => &[0.5],
            Difficulty::Hard => &[0.3, 0.5, 0.7],
        }
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "medium" => Ok(Difficulty::Medium),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::InvalidArgument(format!("unknown difficulty `{other}`"))),
        }
    }
}

/// A scene and the robot's initial pose.
#[derive(Debug, Clone)]
pub struct Task {
    pub scene: SceneModel<f64>,
    pub start: Pose<f64>,
}

fn slab(min: [f64; 3], max: [f64; 3], color: [f64; 3]) -> ColoredBox<f64> {
    ColoredBox::new(Aabb::new(Vec3::from_array(min), Vec3::from_array(max)).expect("static slab"), color)
}

const T: f64 = 0.1;
/// Goals face the mural from 4 m, where the view still spans most of its width.
const GOAL_Y: f64 = 6.0;
/// Floor, ceiling and plain walls share one neutral color, so only the mural and
/// the distractors carry chromatic structure.
const SHELL_GRAY: [f64; 3] = [0.5; 3];
const POSTER_DEPTH: f64 = 0.02;

fn shell() -> Vec<ColoredBox<f64>> {
    let [w, d, h] = ARENA;
    let c = SHELL_GRAY;
    vec![
        slab([-T, -T, -T], [w + T, d + T, 0.0], c),
        slab([-T, -T, h], [w + T, d + T, h + T], c),
        slab([-T, -T, 0.0], [0.0, d + T, h], c),
        slab([w, -T, 0.0], [w + T, d + T, h], c),
        slab([-T, -T, 0.0], [w + T, 0.0, h], c),
        slab([-T, d, 0.0], [w + T, d + T, h], c),
    ]
}

/// Floor-to-ceiling mural across the whole north wall: a slow warm-to-cool sweep with a green bulge.
fn goal_mural() -> Vec<ColoredBox<f64>> {
    let [w, d, h] = ARENA;
    let bands = 20;
    let band = w / bands as f64;
    (0..bands)
        .map(|i| {
            let t = (i as f64 + 0.5) / bands as f64;
            let color = [0.95 - 0.8 * t, 0.15 + 0.7 * (std::f64::consts::PI * t).sin(), 0.1 + 0.8 * t];
            slab([i as f64 * band, d - POSTER_DEPTH, 0.0], [(i + 1) as f64 * band, d, h], color)
        })
        .collect()
}

fn distractors(rng: &mut ChaCha8Rng) -> Vec<ColoredBox<f64>> {
    let [w, d, _] = ARENA;
    let mut out = Vec::new();
    for wall in 0..3 {
        for slot in 0..3 {
            let along = 1.0 + slot as f64 * 3.0 + rng.random_range(0.0..1.5);
            let size = rng.random_range(0.8..1.6);
            let (z0, z1) = {
                let lo: f64 = rng.random_range(0.2..0.7);
                (lo, (lo + rng.random_range(0.6..1.1)).min(1.9))
            };
            let color = [rng.random_range(0.05..0.95), rng.random_range(0.05..0.95), rng.random_range(0.05..0.95)];
            let b = match wall {
                0 => slab([w - POSTER_DEPTH, along, z0], [w, (along + size).min(d - 0.1), z1], color),
                1 => slab([along, 0.0, z0], [(along + size).min(w - 0.1), POSTER_DEPTH, z1], color),
                _ => slab([0.0, along, z0], [POSTER_DEPTH, (along + size).min(d - 0.1), z1], color),
            };
            out.push(b);
        }
    }
    out
}

fn pillar(cx: f64, cy: f64) -> Aabb<f64> {
    let h = OBSTACLE_SIDE / 2.0;
    Aabb::new(Vec3::new(cx - h, cy - h, 0.0), Vec3::new(cx + h, cy + h, OBSTACLE_HEIGHT)).expect("pillar")
}

pub fn make_task(difficulty: Difficulty, seed: u64) -> Task {
    let (start, goal) = difficulty.start_goal();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obstacles: Vec<Aabb<f64>> = difficulty
        .obstacle_fractions()
        .iter()
        .map(|f| pillar(start.x + f * (goal.x - start.x), start.y + f * (goal.y - start.y)))
        .collect();
    let mut boxes = shell();
    boxes.extend(goal_mural());
    boxes.extend(distractors(&mut rng));
    boxes.extend(obstacles.iter().map(|o| ColoredBox::new(*o, [0.22, 0.22, 0.26])));
    let bounds = Aabb::new(Vec3::zero(), Vec3::from_array(ARENA)).expect("arena");
    let scene = SceneModel::new(bounds, obstacles, goal, Backend::Procedural(boxes), [0.0; 3]).expect("task scene is valid");
    Task { scene, start }
}
