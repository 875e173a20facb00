//! Clock experiment: eight centre-out targets, alternating home→target and
//! target→home movements at a fixed period, simulated at 1 kHz.

mod config;
mod io;

pub use config::{ExperimentConfig, HomePolicy, InteractionDirection};
pub use io::{
    read_records, read_samples, sha256_hex, write_manifest, write_records, write_samples, SampleWriter,
    RunManifest, MANIFEST_FILE, RECORDS_FILE, SAMPLES_FILE,
};

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::analysis::movement_metrics;
use crate::arm::{translational_jacobian, ArmParams, ArmState, Joints, Pose2, StepDynamics, Wrench2};
use crate::error::{Error, Result};
use crate::fic::ProfileRegistry;
use crate::planner::{set_target, Planner, PlannerState};
use crate::posture::solve_posture;
use crate::stack::{MotorStack, StackState, TorqueLimitRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Outbound,
    Return,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Outbound => "home-to-target",
            Direction::Return => "target-to-home",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "home-to-target" => Some(Direction::Outbound),
            "target-to-home" => Some(Direction::Return),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MovementStatus {
    Ok,
    /// Unreachable posture or integration failure inside the movement.
    Aborted,
    /// Fewer samples than a full window.
    Incomplete,
}

impl MovementStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            MovementStatus::Ok => "ok",
            MovementStatus::Aborted => "aborted",
            MovementStatus::Incomplete => "incomplete",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(MovementStatus::Ok),
            "aborted" => Some(MovementStatus::Aborted),
            "incomplete" => Some(MovementStatus::Incomplete),
            _ => None,
        }
    }
}

/// One 1 kHz log row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub movement_id: u32,
    pub target_id: u32,
    pub direction: Direction,
    pub x_d: [f64; 2],
    pub v_d: [f64; 2],
    pub x: [f64; 2],
    pub v: [f64; 2],
    pub q: Joints,
    pub dq: Joints,
    pub tau: Joints,
    /// Elbow, wrist and hand region-of-attraction forces.
    pub w_ld: [[f64; 2]; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MovementRecord {
    pub movement_id: u32,
    pub target_id: u32,
    pub direction: Direction,
    pub r_planned: f64,
    pub r_executed: f64,
    pub rmse_pos: f64,
    pub rmse_vel: f64,
    pub peak_speed: f64,
    pub settle_time: f64,
    pub final_error: f64,
    pub status: MovementStatus,
}

impl MovementRecord {
    pub(crate) fn aborted(movement_id: u32, target_id: u32, direction: Direction) -> Self {
        Self::flagged(movement_id, target_id, direction, MovementStatus::Aborted)
    }

    pub(crate) fn flagged(movement_id: u32, target_id: u32, direction: Direction, status: MovementStatus) -> Self {
        Self {
            movement_id,
            target_id,
            direction,
            r_planned: 0.0,
            r_executed: 0.0,
            rmse_pos: 0.0,
            rmse_vel: 0.0,
            peak_speed: 0.0,
            settle_time: 0.0,
            final_error: 0.0,
            status,
        }
    }
}

/// Samples and records of a run, ordered by target block then time.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub samples: Vec<TrajectorySample>,
    pub records: Vec<MovementRecord>,
}

/// A configured experiment with its strategies resolved.
#[derive(Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    planner: Planner,
    stack: MotorStack,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        Self::with_registries(config, &ProfileRegistry::builtin(), &TorqueLimitRegistry::builtin())
    }

    pub fn with_registries(
        config: ExperimentConfig,
        profiles: &ProfileRegistry,
        rules: &TorqueLimitRegistry,
    ) -> Result<Self> {
        config.validate()?;
        let planner = Planner::new(config.planner.clone(), profiles)?;
        let stack = MotorStack::new(config.stack.clone(), profiles, rules)?;
        Ok(Self {
            config,
            planner,
            stack,
        })
    }

    pub fn home(&self) -> Pose2 {
        self.config.home()
    }

    /// Target `id` (1-based), counter-clockwise from +x.
    pub fn target(&self, id: u32) -> Pose2 {
        self.config.target(id)
    }

    pub fn ticks_per_movement(&self) -> usize {
        self.config.ticks_per_movement()
    }

    pub fn movements_per_block(&self) -> usize {
        2 * self.config.cycles_per_target as usize
    }

    /// Interaction direction used throughout the block of `target_id`.
    pub fn interaction_direction(&self, target_id: u32) -> [f64; 2] {
        match self.config.interaction {
            InteractionDirection::HomeToTarget => {
                let h = self.home();
                let t = self.target(target_id);
                let d = (t.x - h.x).hypot(t.y - h.y);
                [(t.x - h.x) / d, (t.y - h.y) / d]
            }
            InteractionDirection::Fixed(angle) => [angle.cos(), angle.sin()],
        }
    }

    /// Resting arm posture at home for the block of `target_id`.
    pub fn initial_posture(&self, target_id: u32) -> Result<Joints> {
        let p = solve_posture(
            &self.config.arm,
            &self.home(),
            self.interaction_direction(target_id),
            self.config.stack.elbow_branch,
            None,
        )?;
        Ok(p.q_d)
    }

    /// Posture the solver assigns to the target of block `target_id`.
    pub fn target_posture(&self, target_id: u32) -> Result<Joints> {
        let p = solve_posture(
            &self.config.arm,
            &self.target(target_id),
            self.interaction_direction(target_id),
            self.config.stack.elbow_branch,
            None,
        )?;
        Ok(p.q_d)
    }

    /// Simulates the block of `target_id`, handing every sample to `sink`
    /// in time order and returning one record per movement.
    pub fn run_block(
        &self,
        target_id: u32,
        sink: &mut dyn FnMut(&TrajectorySample),
    ) -> Result<Vec<MovementRecord>> {
        let cfg = &self.config;
        let arm: &ArmParams = &cfg.arm;
        let dt = self.stack.params.dt();
        let ticks = self.ticks_per_movement();
        let movements = self.movements_per_block();
        let block = (target_id - 1) as usize;
        let first_movement = block * movements;
        let w_t = self.interaction_direction(target_id);
        let home = self.home();
        let target = self.target(target_id);

        let q0 = self.initial_posture(target_id)?;
        let first_tick = (first_movement * ticks) as u64;
        let mut state = ArmState::at_rest(q0, first_tick as f64 * dt);
        let mut planner = PlannerState::at(home);
        let mut mem = StackState::starting_at(q0);
        let mut dynamics = StepDynamics::new(cfg.integrator);
        let mut records = Vec::with_capacity(movements);
        let mut buffer: Vec<TrajectorySample> = Vec::with_capacity(ticks);

        for m in 0..movements {
            let movement_id = (first_movement + m) as u32;
            let (direction, goal) = if m % 2 == 0 {
                (Direction::Outbound, target)
            } else {
                (Direction::Return, home)
            };
            planner = set_target(&planner, goal);
            buffer.clear();
            let mut aborted = false;

            for k in 0..ticks {
                let tick = first_tick + (m * ticks + k) as u64;
                state.t = tick as f64 * dt;
                planner = self.planner.step(&planner, dt);
                let mut torque = [0.0; 3];
                if !aborted {
                    match self.stack.control_tick(arm, &state, &planner, w_t, &Wrench2::ZERO, &mut mem) {
                        Ok(out) => {
                            buffer.push(sample(arm, &state, &planner, &out, movement_id, target_id, direction));
                            torque = out.tau_applied;
                        }
                        Err(_) => aborted = true,
                    }
                }
                match dynamics.step(arm, &state, &torque, &Wrench2::ZERO, dt) {
                    Ok(next) => state = next,
                    Err(e) if aborted => return Err(e),
                    Err(_) => {
                        // hold the arm and let the rest of the window pass
                        aborted = true;
                        state.dq = [0.0; 3];
                    }
                }
            }

            for s in &buffer {
                sink(s);
            }
            let record = if aborted {
                MovementRecord::aborted(movement_id, target_id, direction)
            } else {
                movement_metrics(&buffer, &goal, cfg.trim_fraction, ticks)
                    .unwrap_or_else(|_| MovementRecord::aborted(movement_id, target_id, direction))
            };
            records.push(record);
        }
        Ok(records)
    }

    /// Runs every target block (in parallel) and collects all samples.
    pub fn run(&self) -> Result<RunOutput> {
        let blocks: Vec<Result<(Vec<TrajectorySample>, Vec<MovementRecord>)>> = (1..=self.config.n_targets)
            .into_par_iter()
            .map(|id| {
                let mut samples = Vec::new();
                let records = self.run_block(id, &mut |s| samples.push(*s))?;
                Ok((samples, records))
            })
            .collect();
        let mut out = RunOutput::default();
        for b in blocks {
            let (s, r) = b?;
            out.samples.extend(s);
            out.records.extend(r);
        }
        Ok(out)
    }

    /// Runs every block, streaming samples to `out_dir/samples.csv` without
    /// holding them in memory, and writes the records file.
    pub fn run_to_dir(&self, out_dir: &Path) -> Result<Vec<MovementRecord>> {
        std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
        let part = |id: u32| out_dir.join(format!(".samples.part{id}"));
        let blocks: Vec<Result<Vec<MovementRecord>>> = (1..=self.config.n_targets)
            .into_par_iter()
            .map(|id| {
                let path = part(id);
                let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
                let mut writer = SampleWriter::new(BufWriter::new(file), false)?;
                let mut failed = None;
                let records = self.run_block(id, &mut |s| {
                    if failed.is_none() {
                        failed = writer.write(s).err();
                    }
                })?;
                if let Some(e) = failed {
                    return Err(e);
                }
                writer.finish()?;
                Ok(records)
            })
            .collect();
        let mut records = Vec::new();
        for b in blocks {
            records.extend(b?);
        }

        let samples_path = out_dir.join(SAMPLES_FILE);
        let file = File::create(&samples_path).map_err(|e| Error::io(&samples_path, e))?;
        let mut out = BufWriter::new(file);
        SampleWriter::new(&mut out, true)?.finish()?;
        for id in 1..=self.config.n_targets {
            let path = part(id);
            let mut f = File::open(&path).map_err(|e| Error::io(&path, e))?;
            std::io::copy(&mut f, &mut out).map_err(|e| Error::io(&samples_path, e))?;
            std::fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
        }
        out.flush().map_err(|e| Error::io(&samples_path, e))?;
        write_records(&records, &out_dir.join(RECORDS_FILE))?;
        Ok(records)
    }

    /// Runs every block and returns only the records.
    pub fn run_records(&self) -> Result<Vec<MovementRecord>> {
        let blocks: Vec<Result<Vec<MovementRecord>>> = (1..=self.config.n_targets)
            .into_par_iter()
            .map(|id| self.run_block(id, &mut |_| {}))
            .collect();
        let mut out = Vec::new();
        for b in blocks {
            out.extend(b?);
        }
        Ok(out)
    }
}

fn sample(
    arm: &ArmParams,
    state: &ArmState,
    planner: &PlannerState,
    out: &crate::stack::ControlOutput,
    movement_id: u32,
    target_id: u32,
    direction: Direction,
) -> TrajectorySample {
    let fk = crate::arm::forward_kinematics(arm, &state.q);
    let v = translational_jacobian(arm, &state.q) * nalgebra::Vector3::from(state.dq);
    TrajectorySample {
        t: state.t,
        movement_id,
        target_id,
        direction,
        x_d: planner.x_d.xy(),
        v_d: planner.v_d,
        x: fk.hand.xy(),
        v: [v[0], v[1]],
        q: state.q,
        dq: state.dq,
        tau: out.tau_applied,
        w_ld: [
            [out.w_ld[0].fx, out.w_ld[0].fy],
            [out.w_ld[1].fx, out.w_ld[1].fy],
            [out.w_ld[2].fx, out.w_ld[2].fy],
        ],
    }
}

/// Target positions on the clock circle.
pub fn clock_targets(center: &Pose2, radius: f64, n: u32) -> Vec<Pose2> {
    (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            Pose2::point(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect()
}
