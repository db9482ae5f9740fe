//! Declarative scene files (TOML).
//!
//! ```toml
//! background = [0.1, 0.1, 0.1]
//! goal = [5.0, 8.5, 1.0, 1.5707963]     # x, y, z, yaw
//! start = [5.0, 6.0, 1.0, 0.0]          # optional initial robot pose
//! splats = "room.ply"                   # optional: use a splat file instead of the boxes
//!
//! [bounds]
//! min = [0.0, 0.0, 0.0]
//! max = [10.0, 10.0, 2.0]
//!
//! [[boxes]]
//! min = [4.75, 6.0, 0.0]
//! max = [5.25, 6.5, 1.5]
//! color = [0.2, 0.2, 0.25]
//! obstacle = true
//! ```
//!
//! Boxes always render on the procedural backend; `obstacle = true` also adds them
//! to the collision geometry. A relative `splats` path resolves against the scene file.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Aabb, Pose, Vec3};
use crate::real::Real;

use super::procedural::ColoredBox;
use super::splat::SplatCloud;
use super::{ply, Backend, SceneModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    pub color: [f64; 3],
    #[serde(default)]
    pub obstacle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    #[serde(default)]
    pub background: [f64; 3],
    pub goal: [f64; 4],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub splats: Option<String>,
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
}

fn vec3<T: Real>(a: [f64; 3]) -> Vec3<T> {
    Vec3::new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2]))
}

fn pose<T: Real>(a: [f64; 4]) -> Result<Pose<T>> {
    Pose::try_new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2]), T::lit(a[3]))
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("scene file: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path.as_ref())?)
    }

    /// Builds the scene; `base_dir` resolves a relative splat path.
    pub fn build<T: Real>(&self, base_dir: Option<&Path>) -> Result<(SceneModel<T>, Option<Pose<T>>)> {
        let bounds = Aabb::new(vec3(self.bounds.min), vec3(self.bounds.max))?;
        let mut boxes = Vec::with_capacity(self.boxes.len());
        let mut obstacles = Vec::new();
        for b in &self.boxes {
            let aabb = Aabb::new(vec3(b.min), vec3(b.max))?;
            if b.obstacle {
                obstacles.push(aabb);
            }
            boxes.push(ColoredBox::new(aabb, b.color.map(T::lit)));
        }
        let backend = match &self.splats {
            Some(p) => {
                let path = match base_dir {
                    Some(d) if Path::new(p).is_relative() => d.join(p),
                    _ => Path::new(p).to_path_buf(),
                };
                Backend::Splats(SplatCloud::new(ply::load_splats(path)?))
            }
            None => Backend::Procedural(boxes),
        };
        let scene = SceneModel::new(bounds, obstacles, pose(self.goal)?, backend, self.background.map(T::lit))?;
        let start = self.start.map(pose).transpose()?;
        Ok((scene, start))
    }

    /// Describes a procedural scene. Boxes coinciding with an obstacle are flagged as obstacles.
    pub fn from_scene<T: Real>(scene: &SceneModel<T>, start: Option<&Pose<T>>) -> Result<Self> {
        let f = |v: Vec3<T>| [v.x.to_f64_lossy(), v.y.to_f64_lossy(), v.z.to_f64_lossy()];
        let Backend::Procedural(boxes) = scene.backend() else {
            return Err(Error::InvalidArgument("only procedural scenes can be described as box lists".into()));
        };
        let mut specs: Vec<BoxSpec> = boxes
            .iter()
            .map(|b| BoxSpec {
                min: f(b.aabb.min),
                max: f(b.aabb.max),
                color: b.color.map(|c| c.to_f64_lossy()),
                obstacle: scene.obstacles().contains(&b.aabb),
            })
            .collect();
        for o in scene.obstacles() {
            if !boxes.iter().any(|b| b.aabb == *o) {
                // Invisible collision geometry still needs a rendered stand-in in the file format.
                specs.push(BoxSpec { min: f(o.min), max: f(o.max), color: [0.0; 3], obstacle: true });
            }
        }
        let p = |p: &Pose<T>| p.to_array().map(|v| v.to_f64_lossy());
        Ok(Self {
            background: scene.background().map(|c| c.to_f64_lossy()),
            goal: p(scene.goal_pose()),
            start: start.map(p),
            splats: None,
            bounds: BoundsSpec { min: f(scene.bounds().min), max: f(scene.bounds().max) },
            boxes: specs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
background = [0.1, 0.1, 0.1]
goal = [5.0, 8.5, 1.0, 1.5707963]
start = [5.0, 6.0, 1.0, 0.0]

[bounds]
min = [0.0, 0.0, 0.0]
max = [10.0, 10.0, 2.0]

[[boxes]]
min = [4.75, 6.5, 0.0]
max = [5.25, 7.0, 1.5]
color = [0.2, 0.2, 0.25]
obstacle = true

[[boxes]]
min = [4.0, 10.0, 0.5]
max = [6.0, 10.1, 1.5]
color = [0.9, 0.1, 0.1]
"#;

    #[test]
    fn parse_and_build() {
        let file = SceneFile::parse(EXAMPLE).unwrap();
        let (scene, start) = file.build::<f64>(None).unwrap();
        assert_eq!(scene.obstacles().len(), 1);
        assert!(start.is_some());
        match scene.backend() {
            Backend::Procedural(b) => assert_eq!(b.len(), 2),
            Backend::Splats(_) => panic!("expected boxes"),
        }
        let again = SceneFile::from_scene(&scene, start.as_ref()).unwrap();
        assert_eq!(again.boxes, file.boxes);
        let reparsed = SceneFile::parse(&again.to_toml()).unwrap();
        assert_eq!(reparsed.boxes.len(), 2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(SceneFile::parse("goal = 3").is_err());
        let mut file = SceneFile::parse(EXAMPLE).unwrap();
        file.goal = [5.0, 6.7, 1.0, 0.0];
        assert!(file.build::<f64>(None).is_err());
    }
}
