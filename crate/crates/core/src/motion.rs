//! Discrete-time blimp kinematics with one-hot body-frame commands.
//!
//! Velocities are expressed per step, so a command is added to the state after
//! rotating its planar part from the body frame into the inertial frame.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_finite, Pose};
use crate::real::Real;

/// The single body-frame channel a command drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    Vx,
    Vy,
    Vz,
    Yaw,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::Vx, Channel::Vy, Channel::Vz, Channel::Yaw];

    pub fn is_translation(self) -> bool {
        !matches!(self, Channel::Yaw)
    }
}

/// Per-channel magnitude limits, in meters/step and radians/step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlBounds<T> {
    pub translation: T,
    pub yaw: T,
}

impl<T: Real> Default for ControlBounds<T> {
    fn default() -> Self {
        Self { translation: T::one(), yaw: T::FRAC_PI_4() }
    }
}

impl<T: Real> ControlBounds<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.translation > T::zero() && self.yaw > T::zero()) {
            return Err(Error::InvalidConfig("control bounds must be positive".into()));
        }
        Ok(())
    }

    pub fn limit(&self, channel: Channel) -> T {
        if channel.is_translation() {
            self.translation
        } else {
            self.yaw
        }
    }
}

/// Body-frame command with exactly one active channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlInput<T> {
    pub channel: Channel,
    /// Signed meters/step (translation) or radians/step (yaw).
    pub magnitude: T,
}

impl<T: Real> ControlInput<T> {
    pub fn new(channel: Channel, magnitude: T) -> Self {
        Self { channel, magnitude }
    }

    /// Validated constructor enforcing the per-channel bound.
    pub fn bounded(channel: Channel, magnitude: T, bounds: &ControlBounds<T>) -> Result<Self> {
        if !magnitude.is_finite() {
            return Err(Error::NonFinite("control magnitude"));
        }
        if magnitude.abs() > bounds.limit(channel) {
            return Err(Error::InvalidArgument(format!(
                "|{magnitude}| exceeds the {channel:?} bound {}",
                bounds.limit(channel)
            )));
        }
        Ok(Self { channel, magnitude })
    }

    pub fn zero() -> Self {
        Self { channel: Channel::Vx, magnitude: T::zero() }
    }

    pub fn clamped(self, bounds: &ControlBounds<T>) -> Self {
        let b = bounds.limit(self.channel);
        Self { channel: self.channel, magnitude: self.magnitude.max(-b).min(b) }
    }

    /// The dense `(ν_x, ν_y, ν_z, ω)` vector this command stands for.
    pub fn as_vector(&self) -> [T; 4] {
        let mut v = [T::zero(); 4];
        let i = match self.channel {
            Channel::Vx => 0,
            Channel::Vy => 1,
            Channel::Vz => 2,
            Channel::Yaw => 3,
        };
        v[i] = self.magnitude;
        v
    }
}

/// Fixed-horizon list of commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSequence<T>(pub Vec<ControlInput<T>>);

impl<T: Real> ControlSequence<T> {
    pub fn new(inputs: Vec<ControlInput<T>>) -> Self {
        Self(inputs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inputs(&self) -> &[ControlInput<T>] {
        &self.0
    }

    pub fn first(&self) -> Option<&ControlInput<T>> {
        self.0.first()
    }

    /// Drops the first input and appends `tail`, keeping the horizon.
    pub fn shift(&mut self, tail: ControlInput<T>) {
        if !self.0.is_empty() {
            self.0.remove(0);
        }
        self.0.push(tail);
    }
}

/// One step of the kinematic model.
pub fn step<T: Real>(s: &Pose<T>, u: &ControlInput<T>) -> Pose<T> {
    let m = u.magnitude;
    match u.channel {
        Channel::Vx | Channel::Vy => {
            let (sin, cos) = s.theta.sin_cos();
            let (bx, by) = if u.channel == Channel::Vx { (m, T::zero()) } else { (T::zero(), m) };
            Pose { x: s.x + cos * bx - sin * by, y: s.y + sin * bx + cos * by, z: s.z, theta: s.theta }
        }
        Channel::Vz => Pose { z: s.z + m, ..*s },
        Channel::Yaw => Pose { theta: wrap_finite(s.theta + m), ..*s },
    }
}

/// Trajectory of `K + 1` poses starting at `s0`.
pub fn propagate<T: Real>(s0: &Pose<T>, inputs: &[ControlInput<T>]) -> Vec<Pose<T>> {
    let mut out = Vec::with_capacity(inputs.len() + 1);
    out.push(*s0);
    let mut s = *s0;
    for u in inputs {
        s = step(&s, u);
        out.push(s);
    }
    out
}
