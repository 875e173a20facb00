//! Elastic-band reference generator: a virtual point mass pulled towards the
//! target by one FIC spring per task-space axis. Its position is the planned
//! hand reference.

use crate::arm::Pose2;
use crate::error::{Error, Result};
use crate::fic::{fic_effort, FicState, ForceProfile, LinearSaturated, ProfileParams, ProfileRegistry};

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerParams {
    /// Virtual mass (kg).
    pub mass: f64,
    /// Largest desired acceleration per axis (m/s²).
    pub a_max: f64,
    /// Spring stiffness below saturation (N/m).
    pub stiffness: f64,
    pub rate: f64,
    pub profile: String,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            a_max: 1.0,
            stiffness: 1.0e4,
            rate: 1000.0,
            profile: LinearSaturated::NAME.to_string(),
        }
    }
}

impl PlannerParams {
    pub fn f_max(&self) -> f64 {
        self.mass * self.a_max
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.rate
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.a_max > 0.0 && self.rate >= 100.0) {
            return Err(Error::Config(format!(
                "planner needs mass > 0, a_max > 0, rate >= 100 Hz (got {}, {}, {})",
                self.mass, self.a_max, self.rate
            )));
        }
        Ok(())
    }

    pub fn build_profile(&self, registry: &ProfileRegistry) -> Result<Box<dyn ForceProfile>> {
        registry.build(
            &self.profile,
            &ProfileParams {
                k0: self.stiffness,
                f_max: self.f_max(),
                x_b: self.f_max() / self.stiffness.max(f64::MIN_POSITIVE),
                ..Default::default()
            },
        )
    }

    /// Duration of a saturated point-to-point move along one axis.
    pub fn saturated_duration(&self, distance: f64) -> f64 {
        std::f64::consts::PI * (distance / (2.0 * self.a_max)).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerState {
    pub x_d: Pose2,
    pub v_d: [f64; 2],
    pub fic: [FicState; 2],
    pub target: Pose2,
}

impl PlannerState {
    /// At rest on `target`.
    pub fn at(target: Pose2) -> Self {
        Self {
            x_d: target,
            v_d: [0.0; 2],
            fic: [FicState::default(); 2],
            target,
        }
    }

    pub fn speed(&self) -> f64 {
        self.v_d[0].hypot(self.v_d[1])
    }
}

/// Elastic band bound to one force profile.
#[derive(Debug)]
pub struct Planner {
    pub params: PlannerParams,
    profile: Box<dyn ForceProfile>,
}

impl Planner {
    pub fn new(params: PlannerParams, registry: &ProfileRegistry) -> Result<Self> {
        params.validate()?;
        let profile = params.build_profile(registry)?;
        Ok(Self { params, profile })
    }

    pub fn profile(&self) -> &dyn ForceProfile {
        self.profile.as_ref()
    }

    fn accel(&self, fic: &FicState, err: f64, d_err: f64) -> (f64, FicState) {
        let (effort, next) = fic_effort(self.profile.as_ref(), fic, err, d_err);
        (effort / self.params.mass, next)
    }

    /// Advances the band by `dt` with velocity-Verlet.
    pub fn step(&self, state: &PlannerState, dt: f64) -> PlannerState {
        let mut next = *state;
        let pos = [state.x_d.x, state.x_d.y];
        let tgt = [state.target.x, state.target.y];
        let mut new_pos = pos;
        for axis in 0..2 {
            let err = pos[axis] - tgt[axis];
            let v = state.v_d[axis];
            let (a0, fic) = self.accel(&state.fic[axis], err, v);
            let x1 = pos[axis] + v * dt + 0.5 * a0 * dt * dt;
            let (a1, _) = self.accel(&fic, x1 - tgt[axis], v + a0 * dt);
            new_pos[axis] = x1;
            next.v_d[axis] = v + 0.5 * (a0 + a1) * dt;
            next.fic[axis] = fic;
        }
        next.x_d = Pose2::new(new_pos[0], new_pos[1], state.x_d.phi);
        next
    }

    /// Acceleration the band currently commands, without advancing it.
    pub fn acceleration(&self, state: &PlannerState) -> [f64; 2] {
        let pos = [state.x_d.x, state.x_d.y];
        let tgt = [state.target.x, state.target.y];
        std::array::from_fn(|axis| self.accel(&state.fic[axis], pos[axis] - tgt[axis], state.v_d[axis]).0)
    }
}

/// Replaces the target. The velocity is kept so the reference stays C¹ and
/// each axis starts a new divergence from its current error.
pub fn set_target(state: &PlannerState, target: Pose2) -> PlannerState {
    if target == state.target {
        return *state;
    }
    let mut next = *state;
    next.target = target;
    next.fic = [
        FicState::diverging_from(state.x_d.x - target.x),
        FicState::diverging_from(state.x_d.y - target.y),
    ];
    next
}
