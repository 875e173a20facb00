//! Lower control hierarchy: per-link regions of attraction, the haptic
//! joints' coordination and the two-plateau joint torque controllers.

use nalgebra::Vector3;

use crate::arm::{forward_kinematics, geometric_jacobian, link_jacobian, ArmParams, ArmState, Joints, Pose2, Wrench2};
use crate::error::{Error, Result};
use crate::fic::{fic_effort, FicState, ForceProfile, LinearSaturated, ProfileParams, ProfileRegistry, TanhSaturated, TwoPlateau};
use crate::planner::PlannerState;
use crate::posture::{solve_posture, ElbowBranch, PostureTarget, RateLimit};

/// Region-of-attraction gains of one link end-point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoaGains {
    pub k0: f64,
    pub x_b: f64,
    pub f_max: f64,
}

impl RoaGains {
    fn params(&self) -> ProfileParams {
        ProfileParams {
            k0: self.k0,
            f_max: self.f_max,
            x_b: self.x_b,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackParams {
    /// Elbow, wrist and hand end-point gains.
    pub roa: [RoaGains; 3],
    pub roa_profile: String,
    /// Joint error where the desired-torque plateau starts (rad).
    pub joint_x1: [f64; 3],
    /// Joint error where the plateau ends; saturation is reached at twice it.
    pub joint_x2: [f64; 3],
    pub tmax_rule: String,
    /// Largest posture change per control tick (rad).
    pub max_joint_step: f64,
    pub elbow_branch: ElbowBranch,
    pub control_rate: f64,
}

impl Default for StackParams {
    fn default() -> Self {
        let hand = RoaGains {
            k0: 16_000.0,
            x_b: 0.003,
            f_max: 50.0,
        };
        let half = RoaGains {
            k0: 8_000.0,
            x_b: 0.003,
            f_max: 25.0,
        };
        Self {
            roa: [half, half, hand],
            roa_profile: TanhSaturated::NAME.to_string(),
            joint_x1: [0.0015; 3],
            joint_x2: [0.05; 3],
            tmax_rule: PartialJacobian::NAME.to_string(),
            max_joint_step: 0.02,
            elbow_branch: ElbowBranch::Out,
            control_rate: 1000.0,
        }
    }
}

impl StackParams {
    pub fn dt(&self) -> f64 {
        1.0 / self.control_rate
    }

    pub fn validate(&self) -> Result<()> {
        if self.control_rate != 1000.0 {
            return Err(Error::Config(format!(
                "control rate must be 1000 Hz (got {})",
                self.control_rate
            )));
        }
        for i in 0..3 {
            TwoPlateau::new(0.0, 1.0, self.joint_x1[i], self.joint_x2[i])?;
        }
        if !(self.max_joint_step > 0.0) {
            return Err(Error::Config("max joint step must be > 0".into()));
        }
        Ok(())
    }
}

/// Rule deriving the live joint torque limits from the link wrenches.
pub trait TorqueLimitRule: std::fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;

    fn limits(&self, arm: &ArmParams, q: &Joints, wrenches: &[Wrench2; 3]) -> [f64; 3];
}

fn joint_torque(j: &nalgebra::Matrix3<f64>, w: &Wrench2, joint: usize) -> f64 {
    (j.transpose() * Vector3::from(w.as_array()))[joint]
}

/// Rows 1–2 use the Jacobians of the elbow and wrist end-points where the
/// arm and forearm wrenches act; row 3 uses the hand Jacobian.
#[derive(Debug, Clone, Copy, Default)]
pub struct PartialJacobian;

impl PartialJacobian {
    pub const NAME: &'static str = "partial-jacobian";
}

impl TorqueLimitRule for PartialJacobian {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn limits(&self, arm: &ArmParams, q: &Joints, w: &[Wrench2; 3]) -> [f64; 3] {
        let t = arm.joint_torque_limits;
        let je = link_jacobian(arm, q, 0);
        let jw = link_jacobian(arm, q, 1);
        let jh = geometric_jacobian(arm, q);
        [
            t[0].min(joint_torque(&je, &w[0], 0).abs()),
            t[1].min(joint_torque(&jw, &w[1], 1).abs()),
            t[2].min(2.0 * joint_torque(&jh, &w[2], 2).abs()),
        ]
    }
}

/// Rows i of the hand Jacobian transpose applied to each link wrench.
#[derive(Debug, Clone, Copy, Default)]
pub struct LiteralRows;

impl LiteralRows {
    pub const NAME: &'static str = "literal-rows";
}

impl TorqueLimitRule for LiteralRows {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn limits(&self, arm: &ArmParams, q: &Joints, w: &[Wrench2; 3]) -> [f64; 3] {
        let t = arm.joint_torque_limits;
        let jh = geometric_jacobian(arm, q);
        [
            t[0].min(joint_torque(&jh, &w[0], 0).abs()),
            t[1].min(joint_torque(&jh, &w[1], 1).abs()),
            t[2].min(2.0 * joint_torque(&jh, &w[2], 2).abs()),
        ]
    }
}

type RuleBuilder = fn() -> Box<dyn TorqueLimitRule>;

pub struct TorqueLimitRegistry {
    entries: Vec<(&'static str, RuleBuilder)>,
}

impl TorqueLimitRegistry {
    pub fn builtin() -> Self {
        Self {
            entries: vec![
                (PartialJacobian::NAME, || Box::new(PartialJacobian)),
                (LiteralRows::NAME, || Box::new(LiteralRows)),
            ],
        }
    }

    pub fn register(&mut self, name: &'static str, build: RuleBuilder) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, build));
    }

    pub fn build(&self, name: &str) -> Result<Box<dyn TorqueLimitRule>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, b)| b())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "torque-limit rule",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

impl Default for TorqueLimitRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

/// Controller memory carried between ticks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StackState {
    pub roa: [[FicState; 2]; 3],
    pub joints: [FicState; 3],
    prev_targets: Option<[Pose2; 3]>,
    prev_q_d: Option<Joints>,
}

impl StackState {
    /// Fresh controller whose posture history starts at `q`.
    pub fn starting_at(q: Joints) -> Self {
        Self {
            prev_q_d: Some(q),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// Link end-point errors (current − target) for elbow, wrist, hand.
    pub link_errors: [[f64; 2]; 3],
    pub joint_errors: Joints,
    pub rate_limited: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub tau_applied: Joints,
    /// Elbow (arm), wrist (forearm) and hand wrenches.
    pub w_ld: [Wrench2; 3],
    pub t_d: Joints,
    pub t_max: Joints,
    pub q_d: Joints,
    pub posture: PostureTarget,
    pub diagnostics: Diagnostics,
}

/// Composed control law with its strategies resolved.
#[derive(Debug)]
pub struct MotorStack {
    pub params: StackParams,
    roa_profiles: [Box<dyn ForceProfile>; 3],
    rule: Box<dyn TorqueLimitRule>,
}

/// Profile that only drives the FIC phase logic.
const IDLE: LinearSaturated = LinearSaturated::idle();

impl MotorStack {
    pub fn new(params: StackParams, profiles: &ProfileRegistry, rules: &TorqueLimitRegistry) -> Result<Self> {
        params.validate()?;
        let build = |i: usize| profiles.build(&params.roa_profile, &params.roa[i].params());
        let roa_profiles = [build(0)?, build(1)?, build(2)?];
        let rule = rules.build(&params.tmax_rule)?;
        Ok(Self {
            params,
            roa_profiles,
            rule,
        })
    }

    pub fn with_defaults(params: StackParams) -> Result<Self> {
        Self::new(params, &ProfileRegistry::builtin(), &TorqueLimitRegistry::builtin())
    }

    pub fn rule(&self) -> &dyn TorqueLimitRule {
        self.rule.as_ref()
    }

    /// Per-link task-space FICs. Returns the wrenches and the link errors.
    pub fn region_of_attraction(
        &self,
        arm: &ArmParams,
        state: &ArmState,
        targets: &[Pose2; 3],
        target_velocities: &[[f64; 2]; 3],
        fic: &mut [[FicState; 2]; 3],
    ) -> ([Wrench2; 3], [[f64; 2]; 3]) {
        let fk = forward_kinematics(arm, &state.q);
        let dq = Vector3::from(state.dq);
        let mut wrenches = [Wrench2::ZERO; 3];
        let mut errors = [[0.0; 2]; 3];
        for link in 0..3 {
            let pos = fk.get(link);
            let vel = link_jacobian(arm, &state.q, link) * dq;
            let cur = [pos.x, pos.y];
            let tgt = [targets[link].x, targets[link].y];
            let mut force = [0.0; 2];
            for axis in 0..2 {
                let err = cur[axis] - tgt[axis];
                let d_err = vel[axis] - target_velocities[link][axis];
                let (f, next) = fic_effort(self.roa_profiles[link].as_ref(), &fic[link][axis], err, d_err);
                force[axis] = f;
                fic[link][axis] = next;
                errors[link][axis] = err;
            }
            wrenches[link] = Wrench2::force(force[0], force[1]);
        }
        (wrenches, errors)
    }

    /// Desired torques `Jᵀ(2·W_d − W)` and the live torque limits.
    pub fn joints_coordination(
        &self,
        arm: &ArmParams,
        q: &Joints,
        wrenches: &[Wrench2; 3],
        measured: &Wrench2,
    ) -> (Joints, Joints) {
        let j = geometric_jacobian(arm, q);
        let w = wrenches[2];
        let drive = Vector3::new(2.0 * w.fx - measured.fx, 2.0 * w.fy - measured.fy, 2.0 * w.mz - measured.mz);
        let t_d = j.transpose() * drive;
        (t_d.into(), self.rule.limits(arm, q, wrenches))
    }

    /// Two-plateau FIC per joint: the first plateau holds `|T_d|`, the second
    /// saturates at `T_max`.
    pub fn joint_controllers(
        &self,
        state: &ArmState,
        q_d: &Joints,
        dq_d: &Joints,
        t_d: &Joints,
        t_max: &Joints,
        fic: &mut [FicState; 3],
    ) -> (Joints, Joints) {
        let mut tau = [0.0; 3];
        let mut errors = [0.0; 3];
        for i in 0..3 {
            let err = state.q[i] - q_d[i];
            let d_err = state.dq[i] - dq_d[i];
            errors[i] = err;
            let limit = t_max[i];
            let (effort, next) = if limit > 0.0 {
                let plateau = t_d[i].abs().min(limit);
                let profile = TwoPlateau::new(plateau, limit, self.params.joint_x1[i], self.params.joint_x2[i])
                    .expect("breakpoints validated with the stack parameters");
                fic_effort(&profile, &fic[i], err, d_err)
            } else {
                fic_effort(&IDLE, &fic[i], err, d_err)
            };
            fic[i] = next;
            tau[i] = effort.clamp(-limit.max(0.0), limit.max(0.0));
        }
        (tau, errors)
    }

    /// One 1 kHz tick of the full hierarchy.
    pub fn control_tick(
        &self,
        arm: &ArmParams,
        state: &ArmState,
        planner: &PlannerState,
        w_t: [f64; 2],
        measured: &Wrench2,
        mem: &mut StackState,
    ) -> Result<ControlOutput> {
        let dt = self.params.dt();
        let limit = mem.prev_q_d.as_ref().map(|q| RateLimit {
            previous: q,
            max_step: self.params.max_joint_step,
        });
        let posture = solve_posture(arm, &planner.x_d, w_t, self.params.elbow_branch, limit)?;
        let targets = [posture.elbow, posture.wrist, planner.x_d];
        let mut target_vel = [[0.0; 2]; 3];
        if let Some(prev) = mem.prev_targets {
            for link in 0..2 {
                target_vel[link] = [
                    (targets[link].x - prev[link].x) / dt,
                    (targets[link].y - prev[link].y) / dt,
                ];
            }
        }
        target_vel[2] = planner.v_d;
        let dq_d: Joints = match mem.prev_q_d {
            Some(prev) => std::array::from_fn(|i| (posture.q_d[i] - prev[i]) / dt),
            None => [0.0; 3],
        };

        let (w_ld, link_errors) = self.region_of_attraction(arm, state, &targets, &target_vel, &mut mem.roa);
        let (t_d, t_max) = self.joints_coordination(arm, &state.q, &w_ld, measured);
        let (tau_applied, joint_errors) =
            self.joint_controllers(state, &posture.q_d, &dq_d, &t_d, &t_max, &mut mem.joints);

        mem.prev_targets = Some(targets);
        mem.prev_q_d = Some(posture.q_d);
        Ok(ControlOutput {
            tau_applied,
            w_ld,
            t_d,
            t_max,
            q_d: posture.q_d,
            posture,
            diagnostics: Diagnostics {
                link_errors,
                joint_errors,
                rate_limited: posture.rate_limited,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arm::{kinetic_energy, StepDynamics};
    use crate::planner::{set_target, Planner, PlannerParams};
    use proptest::prelude::*;

    fn arm() -> ArmParams {
        ArmParams::human_arm()
    }

    fn stack() -> MotorStack {
        MotorStack::with_defaults(StackParams::default()).unwrap()
    }

    fn home_posture(w_t: [f64; 2]) -> Joints {
        solve_posture(&arm(), &Pose2::point(0.3, 0.0), w_t, ElbowBranch::Out, None)
            .unwrap()
            .q_d
    }

    fn link_targets(arm: &ArmParams, q: &Joints) -> [Pose2; 3] {
        let fk = forward_kinematics(arm, q);
        [fk.elbow, fk.wrist, fk.hand]
    }

    #[test]
    fn zero_error_gives_exactly_zero_torque() {
        let arm = arm();
        let s = stack();
        let q = home_posture([1.0, 0.0]);
        let state = ArmState::at_rest(q, 0.0);
        let mut roa = [[FicState::default(); 2]; 3];
        let (w, errors) = s.region_of_attraction(&arm, &state, &link_targets(&arm, &q), &[[0.0; 2]; 3], &mut roa);
        assert_eq!(errors, [[0.0; 2]; 3]);
        assert!(w.iter().all(|w| w.as_array() == [0.0; 3]));
        let (t_d, t_max) = s.joints_coordination(&arm, &q, &w, &Wrench2::ZERO);
        assert_eq!(t_d, [0.0; 3]);
        assert_eq!(t_max, [0.0; 3]);
        let mut joints = [FicState::default(); 3];
        let (tau, _) = s.joint_controllers(&state, &q, &[0.0; 3], &t_d, &t_max, &mut joints);
        assert_eq!(tau, [0.0; 3]);
    }

    #[test]
    fn one_millimetre_hand_error_is_linear() {
        let arm = arm();
        let s = stack();
        let q = home_posture([1.0, 0.0]);
        let state = ArmState::at_rest(q, 0.0);
        let mut targets = link_targets(&arm, &q);
        targets[2].x -= 0.001;
        let mut roa = [[FicState::default(); 2]; 3];
        let (w, errors) = s.region_of_attraction(&arm, &state, &targets, &[[0.0; 2]; 3], &mut roa);
        assert!((errors[2][0] - 0.001).abs() < 1e-12);
        let k0 = s.params.roa[2].k0;
        assert!((w[2].fx + k0 * 0.001).abs() < 1e-9 * k0, "{}", w[2].fx);
        assert_eq!(w[2].fy, 0.0);
        assert_eq!(w[0].fx, 0.0);
    }

    #[test]
    fn large_link_errors_saturate() {
        let arm = arm();
        let s = stack();
        let q = home_posture([0.0, 1.0]);
        let state = ArmState::at_rest(q, 0.0);
        let mut targets = link_targets(&arm, &q);
        for t in &mut targets {
            t.x += 0.1;
            t.y -= 0.2;
        }
        let mut roa = [[FicState::default(); 2]; 3];
        let (w, _) = s.region_of_attraction(&arm, &state, &targets, &[[0.0; 2]; 3], &mut roa);
        for (link, w) in w.iter().enumerate() {
            let f_max = s.params.roa[link].f_max;
            assert!(w.fx > 0.0 && w.fy < 0.0);
            assert!(w.fx <= f_max && -w.fy <= f_max);
            assert!(w.fx > 0.99 * f_max);
        }
    }

    #[test]
    fn desired_torque_is_twice_jacobian_transpose() {
        let arm = arm();
        let s = stack();
        let q = [0.3, 1.1, -0.4];
        let w = [Wrench2::force(1.0, 2.0), Wrench2::force(-3.0, 0.5), Wrench2::force(4.0, -7.0)];
        let (t_d, _) = s.joints_coordination(&arm, &q, &w, &Wrench2::ZERO);
        let expect = geometric_jacobian(&arm, &q).transpose() * Vector3::new(8.0, -14.0, 0.0);
        for i in 0..3 {
            assert!((t_d[i] - expect[i]).abs() < 1e-12);
        }
        let measured = Wrench2::force(4.0, -7.0);
        let (half, _) = s.joints_coordination(&arm, &q, &w, &measured);
        for i in 0..3 {
            assert!((2.0 * half[i] - t_d[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_jacobian_rows() {
        let arm = arm();
        let q = [0.3, 1.1, -0.4];
        let w = [Wrench2::force(1.0, 2.0), Wrench2::force(-3.0, 0.5), Wrench2::force(0.4, -0.7)];
        let lim = PartialJacobian.limits(&arm, &q, &w);
        // elbow force about the shoulder: a1 × F
        let (s1, c1) = q[0].sin_cos();
        let a1 = arm.link_lengths[0];
        let row1 = (a1 * c1 * 2.0 - a1 * s1 * 1.0).abs();
        assert!((lim[0] - row1).abs() < 1e-12);
        let jh = geometric_jacobian(&arm, &q);
        let row3 = 2.0 * (jh[(0, 2)] * 0.4 - jh[(1, 2)] * 0.7).abs();
        assert!((lim[2] - row3).abs() < 1e-12);
        let lit = LiteralRows.limits(&arm, &q, &w);
        assert!((lit[0] - (jh[(0, 0)] * 1.0 + jh[(1, 0)] * 2.0).abs()).abs() < 1e-12);
        assert_eq!(lit[2], lim[2]);
    }

    #[test]
    fn registry_builds_rules_by_name() {
        let r = TorqueLimitRegistry::builtin();
        assert_eq!(r.build("literal-rows").unwrap().name(), "literal-rows");
        assert!(matches!(r.build("nope"), Err(Error::UnknownStrategy { .. })));
        let mut p = StackParams::default();
        p.tmax_rule = "nope".into();
        assert!(MotorStack::with_defaults(p).is_err());
    }

    #[test]
    fn joint_plateaus() {
        let s = stack();
        let x1 = s.params.joint_x1[0];
        let x2 = s.params.joint_x2[0];
        let t_d = [3.0, -2.0, 0.5];
        let t_max = [8.0, 8.0, 8.0];
        for (err, expect) in [(0.5 * (x1 + x2), [3.0, 2.0, 0.5]), (2.5 * x2, [8.0; 3])] {
            let state = ArmState::at_rest([err; 3], 0.0);
            let mut fic = [FicState::default(); 3];
            let (tau, _) = s.joint_controllers(&state, &[0.0; 3], &[0.0; 3], &t_d, &t_max, &mut fic);
            for i in 0..3 {
                assert!((tau[i] + expect[i]).abs() < 1e-12, "{tau:?}");
            }
        }
        // plateau above the live limit is cut to the limit
        let state = ArmState::at_rest([0.5 * (x1 + x2); 3], 0.0);
        let mut fic = [FicState::default(); 3];
        let (tau, _) = s.joint_controllers(&state, &[0.0; 3], &[0.0; 3], &[9.0; 3], &[4.0, 0.0, -1.0], &mut fic);
        assert_eq!(tau, [-4.0, 0.0, 0.0]);
    }

    proptest! {
        #[test]
        fn limits_never_exceed_actuation(
            q in prop::array::uniform3(-3.0f64..3.0),
            f in prop::array::uniform6(-200.0f64..200.0),
            literal in any::<bool>(),
        ) {
            let arm = arm();
            let w = [Wrench2::force(f[0], f[1]), Wrench2::force(f[2], f[3]), Wrench2::force(f[4], f[5])];
            let lim = if literal { LiteralRows.limits(&arm, &q, &w) } else { PartialJacobian.limits(&arm, &q, &w) };
            for i in 0..3 {
                prop_assert!(lim[i] >= 0.0 && lim[i] <= arm.joint_torque_limits[i]);
            }
        }

        #[test]
        fn applied_torque_within_live_limit(
            err in prop::array::uniform3(-0.3f64..0.3),
            derr in prop::array::uniform3(-2.0f64..2.0),
            t_d in prop::array::uniform3(-40.0f64..40.0),
            t_max in prop::array::uniform3(0.0f64..30.0),
        ) {
            let s = stack();
            let state = ArmState { q: err, dq: derr, t: 0.0 };
            let mut fic = [FicState::default(); 3];
            let (tau, _) = s.joint_controllers(&state, &[0.0; 3], &[0.0; 3], &t_d, &t_max, &mut fic);
            for i in 0..3 {
                prop_assert!(tau[i].abs() <= t_max[i]);
            }
        }
    }

    /// Runs the full loop towards `goal` from rest at home and returns the
    /// hand trace and the injected work ∫τᵀdq.
    fn simulate(goal: Pose2, seconds: f64) -> (Vec<[f64; 2]>, f64, f64) {
        let arm = arm();
        let s = stack();
        let home = Pose2::point(0.3, 0.0);
        let w_t = if goal == home {
            [1.0, 0.0]
        } else {
            let d = goal.distance(&home);
            [(goal.x - home.x) / d, (goal.y - home.y) / d]
        };
        let q0 = home_posture(w_t);
        let planner = Planner::new(PlannerParams::default(), &ProfileRegistry::builtin()).unwrap();
        let mut plan = set_target(&PlannerState::at(home), goal);
        let mut state = ArmState::at_rest(q0, 0.0);
        let mut mem = StackState::starting_at(q0);
        let mut dynamics = StepDynamics::default();
        let mut trace = Vec::new();
        let mut work = 0.0;
        let ticks = (seconds * 1000.0).round() as usize;
        for k in 0..ticks {
            state.t = k as f64 * 1e-3;
            plan = planner.step(&plan, 1e-3);
            let out = s.control_tick(&arm, &state, &plan, w_t, &Wrench2::ZERO, &mut mem).unwrap();
            for i in 0..3 {
                assert!(out.tau_applied[i].abs() <= arm.joint_torque_limits[i]);
            }
            let next = dynamics.step(&arm, &state, &out.tau_applied, &Wrench2::ZERO, 1e-3).unwrap();
            work += (0..3)
                .map(|i| out.tau_applied[i] * 0.5 * (state.dq[i] + next.dq[i]) * 1e-3)
                .sum::<f64>();
            state = next;
            trace.push(forward_kinematics(&arm, &state.q).hand.xy());
        }
        (trace, work, kinetic_energy(&arm, &state))
    }

    #[test]
    fn equilibrium_holds() {
        let home = Pose2::point(0.3, 0.0);
        let (trace, work, _) = simulate(home, 1.0);
        let drift = trace
            .iter()
            .map(|p| (p[0] - home.x).hypot(p[1] - home.y))
            .fold(0.0, f64::max);
        assert!(drift < 1e-6, "{drift}");
        assert!(work.abs() < 1e-9);
    }

    #[test]
    fn step_settles_within_a_millimetre() {
        for goal in [Pose2::point(0.4, 0.0), Pose2::point(0.3, 0.1), Pose2::point(0.2293, -0.0707)] {
            let (trace, work, ke) = simulate(goal, 1.0);
            let last = trace.last().unwrap();
            let err = (last[0] - goal.x).hypot(last[1] - goal.y);
            assert!(err < 1e-3, "{goal:?}: {err}");
            // injected work stays of the order of the reach itself
            assert!(work.is_finite() && work.abs() < 0.5, "{work}");
            assert!(ke < 1e-3, "{ke}");
        }
    }
}
