//! Dynamic-task posture: aligns the hand link with the expected interaction
//! direction and solves the remaining 2R chain in closed form.

use nalgebra::Vector2;

use crate::arm::{forward_kinematics, translational_jacobian, wrap_angle, ArmParams, Joints, Pose2};
use crate::error::{Error, Result};

/// Margin kept from the edges of the reachable annulus.
pub const REACH_EPS: f64 = 1e-9;

/// Elbow configuration of the 2R sub-chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ElbowBranch {
    /// Positive elbow angle; with the clock in front of the shoulder the
    /// elbow sits on the −y side.
    #[default]
    Out,
    In,
}

impl ElbowBranch {
    pub fn sign(self) -> f64 {
        match self {
            ElbowBranch::Out => 1.0,
            ElbowBranch::In => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s < 0.0 {
            ElbowBranch::In
        } else {
            ElbowBranch::Out
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostureTarget {
    pub wrist: Pose2,
    pub elbow: Pose2,
    pub q_d: Joints,
    pub phi_wt: f64,
    /// Set when the joint-rate cap altered the closed-form solution.
    pub rate_limited: bool,
}

/// Wrist pose that places the hand at `x_d` with the hand link along `w_t`.
pub fn wrist_target(params: &ArmParams, x_d: &Pose2, w_t: [f64; 2]) -> Pose2 {
    let phi = w_t[1].atan2(w_t[0]);
    let (s, c) = phi.sin_cos();
    let l_h = params.link_lengths[2];
    let off = params.hand_tip_offset;
    Pose2::new(x_d.x - l_h * c + off * s, x_d.y - l_h * s - off * c, phi)
}

/// Previous posture and the per-tick joint-rate cap.
#[derive(Debug, Clone, Copy)]
pub struct RateLimit<'a> {
    pub previous: &'a Joints,
    pub max_step: f64,
}

/// Closed-form 2R inverse kinematics for the wrist plus the hand angle.
pub fn arm_ik(
    wrist: &Pose2,
    phi_wt: f64,
    params: &ArmParams,
    branch: ElbowBranch,
    limit: Option<RateLimit<'_>>,
) -> Result<PostureTarget> {
    let [l1, l2, _] = params.link_lengths;
    let (inner, outer) = params.wrist_annulus();
    let r = wrist.norm();
    if r > outer - REACH_EPS || r < inner + REACH_EPS {
        return Err(Error::Unreachable {
            x: wrist.x,
            y: wrist.y,
            inner,
            outer,
        });
    }
    let c2 = ((r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)).clamp(-1.0, 1.0);
    let q2 = branch.sign() * c2.acos();
    let q1 = wrist.y.atan2(wrist.x) - (l2 * q2.sin()).atan2(l1 + l2 * q2.cos());
    let q3 = wrap_angle(phi_wt - q1 - q2);
    let mut q_d = [wrap_angle(q1), q2, q3];

    let mut rate_limited = false;
    if let Some(lim) = limit {
        for i in 0..3 {
            let delta = wrap_angle(q_d[i] - lim.previous[i]);
            let clamped = delta.clamp(-lim.max_step, lim.max_step);
            rate_limited |= clamped != delta;
            q_d[i] = lim.previous[i] + clamped;
        }
    }

    let (elbow, wrist_pose) = if rate_limited {
        let fk = forward_kinematics(params, &q_d);
        (fk.elbow, fk.wrist)
    } else {
        let fk = forward_kinematics(params, &q_d);
        (fk.elbow, Pose2::new(wrist.x, wrist.y, fk.wrist.phi))
    };
    Ok(PostureTarget {
        wrist: wrist_pose,
        elbow,
        q_d,
        phi_wt,
        rate_limited,
    })
}

/// Full posture for a hand reference and interaction direction.
pub fn solve_posture(
    params: &ArmParams,
    x_d: &Pose2,
    w_t: [f64; 2],
    branch: ElbowBranch,
    limit: Option<RateLimit<'_>>,
) -> Result<PostureTarget> {
    let wrist = wrist_target(params, x_d, w_t);
    arm_ik(&wrist, wrist.phi, params, branch, limit)
}

/// `w_tᵀ J_v J_vᵀ w_t`: the squared hand velocity the chain can produce
/// along `w_t` per unit joint speed.
pub fn posture_objective(params: &ArmParams, q: &Joints, w_t: [f64; 2]) -> f64 {
    let jv = translational_jacobian(params, q);
    let w = Vector2::from(w_t);
    (jv.transpose() * w).norm_squared()
}
