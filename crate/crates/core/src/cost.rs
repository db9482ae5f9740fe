//! Scalar objectives: movement cost, one-step exploration cost, rollout cost and weights.

use crate::belief::GridBelief;
use crate::error::{Error, Result};
use crate::geometry::Pose;
use crate::image::Descriptor;
use crate::motion::{step, ControlInput};
use crate::real::Real;
use crate::scene::{render, Camera, SceneModel, ROBOT_RADIUS};
use crate::similarity::{detection_from_dissimilarity, dissimilarity, ImageDescriptor};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostConfig<T> {
    /// Cost per meter moved.
    pub distance_rate: T,
    /// Cost of one colliding (or arena-leaving) step.
    pub collision_penalty: T,
    /// Floor applied to belief mass and detection probability in the exploration cost.
    pub prob_floor: T,
    /// Weight of the terminal dissimilarity in a rollout's cost.
    pub terminal_weight: T,
    /// Collision sphere radius around the robot position.
    pub robot_radius: T,
}

impl<T: Real> Default for CostConfig<T> {
    fn default() -> Self {
        Self {
            distance_rate: T::lit(50.0),
            collision_penalty: T::lit(1000.0),
            prob_floor: T::lit(1e-6),
            terminal_weight: T::one(),
            robot_radius: T::lit(ROBOT_RADIUS),
        }
    }
}

impl<T: Real> CostConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        if !(pos(self.distance_rate) && pos(self.collision_penalty) && pos(self.prob_floor)) {
            return Err(Error::InvalidConfig("distance_rate, collision_penalty and prob_floor must be positive".into()));
        }
        if !(self.terminal_weight >= T::zero()) || !(self.robot_radius >= T::zero()) {
            return Err(Error::InvalidConfig("terminal_weight and robot_radius must be non-negative".into()));
        }
        Ok(())
    }
}

/// `distance_rate · ‖Δposition‖`, plus the collision penalty if the segment collides.
pub fn movement_cost<T: Real>(scene: &SceneModel<T>, s: &Pose<T>, s_next: &Pose<T>, cfg: &CostConfig<T>) -> T {
    let mut c = cfg.distance_rate * s.distance(s_next);
    if scene.segment_collides(s, s_next, cfg.robot_radius) {
        c = c + cfg.collision_penalty;
    }
    c
}

/// `c / (max(p, floor) · max(q, floor))`.
pub fn exploration_cost<T: Real>(c_move: T, p_next: T, q_next: T, cfg: &CostConfig<T>) -> T {
    if c_move == T::zero() {
        return T::zero();
    }
    c_move / (p_next.max(cfg.prob_floor) * q_next.max(cfg.prob_floor))
}

/// Unnormalized weight `exp(-J)`; `+∞` maps to 0.
pub fn weight<T: Real>(j: T) -> T {
    if j == T::infinity() {
        T::zero()
    } else {
        (-j).exp()
    }
}

/// Everything a rollout is scored against, borrowed read-only for one control step.
pub struct RolloutScorer<'a, T: Real, D: ImageDescriptor<T>> {
    pub scene: &'a SceneModel<T>,
    pub camera: &'a Camera<T>,
    pub descriptor: &'a D,
    pub goal: &'a Descriptor<T>,
    pub belief: &'a GridBelief<T>,
    pub cfg: &'a CostConfig<T>,
}

impl<T: Real, D: ImageDescriptor<T>> RolloutScorer<'_, T, D> {
    /// Dissimilarity between the goal and the rendered view from `pose`.
    pub fn dissimilarity_at(&self, pose: &Pose<T>) -> T {
        let img = render(self.scene, self.camera, pose);
        dissimilarity(self.goal, &self.descriptor.describe(&img)).unwrap_or_else(|_| T::one())
    }

    /// Cost of a propagated rollout: terminal dissimilarity plus the exploration cost of every transition.
    ///
    /// Transitions with zero movement cost contribute exactly zero, so their views are not rendered.
    pub fn rollout_cost(&self, trajectory: &[Pose<T>], controls: &[ControlInput<T>]) -> Result<T> {
        if trajectory.len() != controls.len() + 1 {
            return Err(Error::ContractViolation(format!(
                "trajectory of {} poses for {} controls",
                trajectory.len(),
                controls.len()
            )));
        }
        for (k, u) in controls.iter().enumerate() {
            if step(&trajectory[k], u) != trajectory[k + 1] {
                return Err(Error::ContractViolation(format!("trajectory step {k} does not follow its control")));
            }
        }
        let mut total = T::zero();
        let mut last_d = None;
        for k in 0..controls.len() {
            let (s, s_next) = (&trajectory[k], &trajectory[k + 1]);
            let c = movement_cost(self.scene, s, s_next, self.cfg);
            if c == T::zero() {
                last_d = None;
                continue;
            }
            let d = self.dissimilarity_at(s_next);
            last_d = Some(d);
            let p = self.belief.prob_mass(s_next);
            total = total + exploration_cost(c, p, detection_from_dissimilarity(d), self.cfg);
        }
        let terminal = match last_d {
            Some(d) => d,
            None => self.dissimilarity_at(trajectory.last().expect("non-empty trajectory")),
        };
        Ok(total + self.cfg.terminal_weight * terminal)
    }

    pub fn sequence_cost(&self, s0: &Pose<T>, controls: &[ControlInput<T>]) -> Result<T> {
        let tr = crate::motion::propagate(s0, controls);
        self.rollout_cost(&tr, controls)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Aabb, Vec3};
    use crate::grid::CellGrid;
    use crate::motion::{propagate, Channel};
    use crate::scene::{Backend, ColoredBox};
    use crate::similarity::ThumbnailDescriptor;

    fn scene() -> SceneModel<f64> {
        let bounds = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(10.0, 10.0, 2.0)).unwrap();
        let obstacle = Aabb::new(Vec3::new(4.75, 4.75, 0.0), Vec3::new(5.25, 5.25, 1.5)).unwrap();
        let boxes = vec![
            ColoredBox::new(obstacle, [0.2, 0.2, 0.2]),
            ColoredBox::new(Aabb::new(Vec3::new(4.0, 10.0, 0.3), Vec3::new(6.0, 10.1, 1.7)).unwrap(), [0.9, 0.2, 0.1]),
        ];
        SceneModel::new(bounds, vec![obstacle], Pose::new(5.0, 8.0, 1.0, std::f64::consts::FRAC_PI_2), Backend::Procedural(boxes), [0.5; 3])
            .unwrap()
    }

    #[test]
    fn movement_cost_constants() {
        let s = scene();
        let cfg = CostConfig::default();
        let a = Pose::new(1.0, 1.0, 1.0, 0.0);
        assert!((movement_cost(&s, &a, &Pose::new(1.2, 1.0, 1.0, 0.0), &cfg) - 10.0).abs() < 1e-12);
        assert_eq!(movement_cost(&s, &a, &Pose::new(1.0, 1.0, 1.0, 2.0), &cfg), 0.0);
        let through = movement_cost(&s, &Pose::new(4.9, 5.0, 1.0, 0.0), &Pose::new(5.1, 5.0, 1.0, 0.0), &cfg);
        assert!((through - 1010.0).abs() < 1e-9);
    }

    #[test]
    fn exploration_cost_examples() {
        let cfg = CostConfig::<f64>::default();
        assert_eq!(exploration_cost(10.0, 0.5, 0.5, &cfg), 40.0);
        assert_eq!(exploration_cost(0.0, 0.0, 0.0, &cfg), 0.0);
        assert!((exploration_cost(10.0, 0.0, 1.0, &cfg) - 1e7).abs() < 1e-3);
    }

    #[test]
    fn weight_examples() {
        assert_eq!(weight(0.0f64), 1.0);
        assert!((weight(2.0f64.ln()) - 0.5).abs() < 1e-15);
        assert_eq!(weight(f64::INFINITY), 0.0);
    }

    fn scorer_parts() -> (SceneModel<f64>, Camera<f64>, ThumbnailDescriptor, GridBelief<f64>, CostConfig<f64>) {
        let grid = CellGrid::new((0.0, 0.0), 1.0, 10, 10).unwrap();
        (scene(), Camera::planner(), ThumbnailDescriptor::default(), GridBelief::uniform(grid), CostConfig::default())
    }

    #[test]
    fn rollout_cost_terms() {
        let (scene, cam, desc, belief, cfg) = scorer_parts();
        let goal_pose = *scene.goal_pose();
        let goal = desc.describe(&render(&scene, &cam, &goal_pose));
        let sc = RolloutScorer { scene: &scene, camera: &cam, descriptor: &desc, goal: &goal, belief: &belief, cfg: &cfg };

        // Empty horizon: terminal term only.
        let s0 = Pose::new(2.0, 2.0, 1.0, 0.3);
        let c = sc.rollout_cost(&[s0], &[]).unwrap();
        assert_eq!(c, sc.dissimilarity_at(&s0));

        // At-goal fixed point.
        let u = [ControlInput::new(Channel::Vx, 0.0)];
        assert!(sc.rollout_cost(&propagate(&goal_pose, &u), &u).unwrap().abs() < 1e-12);

        // One transition: exploration term plus terminal term.
        let u = [ControlInput::new(Channel::Vx, 0.2)];
        let tr = propagate(&s0, &u);
        let d = sc.dissimilarity_at(&tr[1]);
        let expected = 10.0 / (0.01 * (1.0 - d)) + d;
        assert!((sc.rollout_cost(&tr, &u).unwrap() - expected).abs() < 1e-9);
        assert_eq!(sc.rollout_cost(&tr, &u).unwrap(), sc.rollout_cost(&tr, &u).unwrap());
    }

    #[test]
    fn rollout_cost_hand_example() {
        // Exploration term 10 / (0.5 · 0.5) = 40 plus terminal 0.3 at unit weight.
        let cfg = CostConfig::<f64>::default();
        let total = exploration_cost(10.0, 0.5, 1.0 - 0.5, &cfg) + cfg.terminal_weight * 0.3;
        assert!((total - 40.3).abs() < 1e-12);
    }

    #[test]
    fn mismatched_trajectory_is_rejected() {
        let (scene, cam, desc, belief, cfg) = scorer_parts();
        let goal = desc.describe(&render(&scene, &cam, scene.goal_pose()));
        let sc = RolloutScorer { scene: &scene, camera: &cam, descriptor: &desc, goal: &goal, belief: &belief, cfg: &cfg };
        let s0 = Pose::new(2.0, 2.0, 1.0, 0.0);
        let u = [ControlInput::new(Channel::Vx, 0.5)];
        assert!(matches!(sc.rollout_cost(&[s0], &u), Err(Error::ContractViolation(_))));
        assert!(matches!(sc.rollout_cost(&[s0, s0], &u), Err(Error::ContractViolation(_))));
    }
}
