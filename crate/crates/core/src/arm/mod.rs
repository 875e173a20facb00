//! Planar 3-link arm: geometry, kinematics, manipulability and the
//! gravity-free rigid-body plant.

mod dynamics;
mod integrator;
mod kinematics;

pub use dynamics::{coriolis_matrix, forward_acceleration, kinetic_energy, mass_matrix, mass_matrix_derivative};
pub use integrator::{IntegratorOptions, StepDynamics};
pub use kinematics::{
    forward_kinematics, geometric_jacobian, link_jacobian, manipulability_ellipsoid,
    translational_jacobian, Ellipsoid, LinkPoses,
};

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Joint-space vector for the three revolute joints.
pub type Joints = [f64; 3];

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Planar position with orientation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub phi: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, phi: f64) -> Self {
        Self {
            x,
            y,
            phi: wrap_angle(phi),
        }
    }

    pub fn point(x: f64, y: f64) -> Self {
        Self { x, y, phi: 0.0 }
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Pose2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Planar wrench: in-plane force and the moment about the plane normal.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wrench2 {
    pub fx: f64,
    pub fy: f64,
    pub mz: f64,
}

impl Wrench2 {
    pub const ZERO: Wrench2 = Wrench2 {
        fx: 0.0,
        fy: 0.0,
        mz: 0.0,
    };

    pub fn force(fx: f64, fy: f64) -> Self {
        Self { fx, fy, mz: 0.0 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.fx, self.fy, self.mz]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            fx: self.fx * s,
            fy: self.fy * s,
            mz: self.mz * s,
        }
    }
}

/// Physical parameters of the arm. Links are modelled as uniform slender
/// rods unless the inertias and COM offsets are overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmParams {
    pub link_lengths: [f64; 3],
    pub link_masses: [f64; 3],
    pub link_inertias: [f64; 3],
    pub com_offsets: [f64; 3],
    pub joint_damping: [f64; 3],
    pub joint_torque_limits: [f64; 3],
    /// Perpendicular offset of the hand point from the axis of link 3.
    pub hand_tip_offset: f64,
}

impl ArmParams {
    /// Uniform-rod arm with the given lengths and masses.
    pub fn uniform_rods(lengths: [f64; 3], masses: [f64; 3]) -> Self {
        let mut inertias = [0.0; 3];
        let mut coms = [0.0; 3];
        for i in 0..3 {
            inertias[i] = masses[i] * lengths[i] * lengths[i] / 12.0;
            coms[i] = lengths[i] / 2.0;
        }
        Self {
            link_lengths: lengths,
            link_masses: masses,
            link_inertias: inertias,
            com_offsets: coms,
            joint_damping: [0.1; 3],
            joint_torque_limits: [30.0, 20.0, 10.0],
            hand_tip_offset: 0.0,
        }
    }

    /// Arm, forearm and hand lengths and masses of the clock-experiment arm.
    pub fn human_arm() -> Self {
        Self::uniform_rods([0.282, 0.269, 0.044], [4.0, 2.5, 1.0])
    }

    /// Recomputes inertias and COM offsets from the current lengths and masses.
    pub fn with_uniform_rods(mut self) -> Self {
        let r = Self::uniform_rods(self.link_lengths, self.link_masses);
        self.link_inertias = r.link_inertias;
        self.com_offsets = r.com_offsets;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self
            .link_lengths
            .iter()
            .chain(&self.link_masses)
            .chain(&self.link_inertias)
            .all(|v| v.is_finite() && *v > 0.0);
        if !positive {
            return Err(Error::InvalidParams(
                "lengths, masses and inertias must be strictly positive".into(),
            ));
        }
        let non_negative = self
            .joint_damping
            .iter()
            .chain(&self.joint_torque_limits)
            .chain(&self.com_offsets)
            .all(|v| v.is_finite() && *v >= 0.0);
        if !non_negative {
            return Err(Error::InvalidParams(
                "damping, torque limits and COM offsets must be non-negative".into(),
            ));
        }
        if !self.hand_tip_offset.is_finite() {
            return Err(Error::InvalidParams("hand tip offset must be finite".into()));
        }
        Ok(())
    }

    /// Inner and outer radius of the annulus reachable by the wrist.
    pub fn wrist_annulus(&self) -> (f64, f64) {
        let [a, f, _] = self.link_lengths;
        ((a - f).abs(), a + f)
    }
}

impl Default for ArmParams {
    fn default() -> Self {
        Self::human_arm()
    }
}

/// Integrated physical state of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmState {
    pub q: Joints,
    pub dq: Joints,
    pub t: f64,
}

impl ArmState {
    pub fn at_rest(q: Joints, t: f64) -> Self {
        Self { q, dq: [0.0; 3], t }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.dq).all(|v| v.is_finite()) && self.t.is_finite()
    }
}
