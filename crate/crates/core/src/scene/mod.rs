//! Scene priors and the rendering oracle `pose -> image`.
//!
//! Two backends sit behind [`render`]: an exact ray caster over colored boxes
//! and a forward Gaussian splat compositor. Both are pure functions of the
//! scene, camera and pose.

mod camera;
pub mod config;
pub mod ply;
pub mod procedural;
pub mod splat;

pub use camera::{Camera, View};
pub use ply::{load_splats, read_splats, save_splats, write_splats};
pub use procedural::ColoredBox;
pub use splat::{Gaussian3D, SplatCloud, SplatFrame};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose};
use crate::image::Image;
use crate::real::Real;

/// Robot collision body radius (meters).
pub const ROBOT_RADIUS: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub enum Backend<T> {
    Procedural(Vec<ColoredBox<T>>),
    Splats(SplatCloud<T>),
}

/// Immutable renderable scene with collision geometry and the goal pose.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneModel<T> {
    bounds: Aabb<T>,
    obstacles: Vec<Aabb<T>>,
    goal_pose: Pose<T>,
    backend: Backend<T>,
    background: [T; 3],
}

impl<T: Real> SceneModel<T> {
    pub fn new(bounds: Aabb<T>, obstacles: Vec<Aabb<T>>, goal_pose: Pose<T>, backend: Backend<T>, background: [T; 3]) -> Result<Self> {
        for (i, o) in obstacles.iter().enumerate() {
            if !bounds.contains_box(o) {
                return Err(Error::InvalidConfig(format!("obstacle {i} extends outside the arena bounds")));
            }
        }
        if !bounds.contains(goal_pose.position()) {
            return Err(Error::InvalidConfig("goal pose lies outside the arena bounds".into()));
        }
        if obstacles.iter().any(|o| o.contains(goal_pose.position())) {
            return Err(Error::InvalidConfig("goal pose lies inside an obstacle".into()));
        }
        if background.iter().any(|c| !(*c >= T::zero() && *c <= T::one())) {
            return Err(Error::InvalidConfig("background color outside [0, 1]".into()));
        }
        Ok(Self { bounds, obstacles, goal_pose, backend, background })
    }

    pub fn bounds(&self) -> &Aabb<T> {
        &self.bounds
    }

    pub fn obstacles(&self) -> &[Aabb<T>] {
        &self.obstacles
    }

    pub fn goal_pose(&self) -> &Pose<T> {
        &self.goal_pose
    }

    pub fn backend(&self) -> &Backend<T> {
        &self.backend
    }

    pub fn background(&self) -> [T; 3] {
        self.background
    }

    /// Same geometry, rendered through a different backend.
    pub fn with_backend(&self, backend: Backend<T>) -> Self {
        Self { backend, ..self.clone() }
    }

    /// Replaces box primitives by flat splats sampled on their inward faces.
    pub fn to_splats(&self, spacing: T, opacity: T) -> Result<Self> {
        match &self.backend {
            Backend::Procedural(boxes) => {
                let gs = splat::splatify(boxes, &self.bounds, spacing, opacity)?;
                Ok(self.with_backend(Backend::Splats(SplatCloud::new(gs))))
            }
            Backend::Splats(_) => Ok(self.clone()),
        }
    }

    /// True iff the segment between the two positions comes within `radius` of any
    /// obstacle, or either end leaves the arena bounds.
    pub fn segment_collides(&self, a: &Pose<T>, b: &Pose<T>, radius: T) -> bool {
        let (pa, pb) = (a.position(), b.position());
        if !self.bounds.contains(pa) || !self.bounds.contains(pb) {
            return true;
        }
        self.obstacles.iter().any(|o| o.distance_to_segment(pa, pb) <= radius)
    }

    pub fn in_bounds(&self, p: &Pose<T>) -> bool {
        self.bounds.contains(p.position())
    }
}

/// Renders the view from `pose`. Any finite pose is accepted, including out-of-bounds ones.
pub fn render<T: Real>(scene: &SceneModel<T>, camera: &Camera<T>, pose: &Pose<T>) -> Image<T> {
    let view = View::from_pose(pose);
    match &scene.backend {
        Backend::Procedural(boxes) => procedural::render_boxes(boxes, scene.background, camera, &view),
        Backend::Splats(cloud) => splat::composite(cloud, scene.background, camera, &view).into_image(),
    }
}

/// Splat compositing with per-pixel blend weights and transmittance; `None` for procedural scenes.
pub fn render_splat_frame<T: Real>(scene: &SceneModel<T>, camera: &Camera<T>, pose: &Pose<T>) -> Option<SplatFrame<T>> {
    match &scene.backend {
        Backend::Splats(cloud) => Some(splat::composite(cloud, scene.background, camera, &View::from_pose(pose))),
        Backend::Procedural(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn arena() -> Aabb<f64> {
        Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 2.0)).unwrap()
    }

    fn scene_with(obstacles: Vec<Aabb<f64>>) -> SceneModel<f64> {
        SceneModel::new(arena(), obstacles, Pose::new(5.0, 8.0, 1.0, 0.0), Backend::Procedural(vec![]), [0.3, 0.4, 0.5]).unwrap()
    }

    #[test]
    fn empty_scene_renders_background() {
        let s = scene_with(vec![]);
        let img = render(&s, &Camera::planner(), &Pose::new(1.0, 1.0, 1.0, 0.7));
        assert!(img.pixels().iter().all(|p| *p == [0.3, 0.4, 0.5]));
        let splats = s.with_backend(Backend::Splats(SplatCloud::new(vec![])));
        assert_eq!(render(&splats, &Camera::planner(), &Pose::new(1.0, 1.0, 1.0, 0.7)), img);
    }

    #[test]
    fn validation() {
        let inside = Aabb::new(Vec3::new(4.5, 7.5, 0.0), Vec3::new(5.5, 8.5, 1.5)).unwrap();
        assert!(SceneModel::new(arena(), vec![inside], Pose::new(5.0, 8.0, 1.0, 0.0), Backend::Procedural(vec![]), [0.0; 3]).is_err());
        let outside = Aabb::new(Vec3::new(9.5, 0.0, 0.0), Vec3::new(10.5, 1.0, 1.5)).unwrap();
        assert!(SceneModel::new(arena(), vec![outside], Pose::new(5.0, 8.0, 1.0, 0.0), Backend::Procedural(vec![]), [0.0; 3]).is_err());
        assert!(SceneModel::new(arena(), vec![], Pose::new(5.0, 11.0, 1.0, 0.0), Backend::Procedural(vec![]), [0.0; 3]).is_err());
    }

    #[test]
    fn collision_examples() {
        let obstacle = Aabb::new(Vec3::new(4.0, 4.0, 0.0), Vec3::new(5.0, 5.0, 1.5)).unwrap();
        let empty = scene_with(vec![]);
        let busy = scene_with(vec![obstacle]);
        let a = Pose::new(2.0, 4.5, 1.0, 0.0);
        let b = Pose::new(7.0, 4.5, 1.0, 0.0);
        assert!(!empty.segment_collides(&a, &b, 0.3));
        assert!(busy.segment_collides(&a, &b, 0.0));
        // 0.05 m from the y = 5 face.
        let a = Pose::new(2.0, 5.05, 1.0, 0.0);
        let b = Pose::new(7.0, 5.05, 1.0, 0.0);
        assert!(busy.segment_collides(&a, &b, 0.1));
        assert!(!busy.segment_collides(&a, &b, 0.04));
        // Leaving the arena.
        assert!(empty.segment_collides(&Pose::new(9.5, 5.0, 1.0, 0.0), &Pose::new(10.5, 5.0, 1.0, 0.0), 0.0));
        assert!(empty.segment_collides(&Pose::new(5.0, 5.0, 1.5, 0.0), &Pose::new(5.0, 5.0, 2.5, 0.0), 0.0));
    }
}
