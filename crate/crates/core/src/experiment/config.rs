//! Experiment configuration: flat `section.key = value` text (TOML syntax)
//! with embedded defaults and `key=value` overrides.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use toml::Value;

use crate::arm::{ArmParams, IntegratorOptions, Pose2};
use crate::error::{Error, Result};
use crate::planner::PlannerParams;
use crate::posture::{solve_posture, ElbowBranch};
use crate::stack::{RoaGains, StackParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HomePolicy {
    /// Home at the clock centre.
    #[default]
    Center,
}

/// Expected interaction direction fed to the posture solver.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InteractionDirection {
    /// Unit vector from home to the block's target, held for the whole block.
    #[default]
    HomeToTarget,
    /// Fixed direction, angle in radians from +x.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub clock_center: Pose2,
    pub clock_radius: f64,
    pub n_targets: u32,
    pub cycles_per_target: u32,
    pub target_period: f64,
    pub home_policy: HomePolicy,
    pub interaction: InteractionDirection,
    pub trim_fraction: f64,
    /// Reserved: the simulation is deterministic.
    pub seed: u64,
    pub output_path: PathBuf,
    pub arm: ArmParams,
    pub planner: PlannerParams,
    pub stack: StackParams,
    pub integrator: IntegratorOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            clock_center: Pose2::point(0.3, 0.0),
            clock_radius: 0.1,
            n_targets: 8,
            cycles_per_target: 100,
            target_period: 1.0,
            home_policy: HomePolicy::Center,
            interaction: InteractionDirection::HomeToTarget,
            trim_fraction: crate::analysis::DEFAULT_TRIM,
            seed: 0,
            output_path: PathBuf::from("out"),
            arm: ArmParams::human_arm(),
            planner: PlannerParams::default(),
            stack: StackParams::default(),
            integrator: IntegratorOptions::default(),
        }
    }
}

const LINKS: [&str; 3] = ["elbow", "wrist", "hand"];

impl ExperimentConfig {
    pub fn home(&self) -> Pose2 {
        match self.home_policy {
            HomePolicy::Center => self.clock_center,
        }
    }

    pub fn target(&self, id: u32) -> Pose2 {
        let a = 2.0 * PI * (id - 1) as f64 / self.n_targets as f64;
        Pose2::point(
            self.clock_center.x + self.clock_radius * a.cos(),
            self.clock_center.y + self.clock_radius * a.sin(),
        )
    }

    pub fn ticks_per_movement(&self) -> usize {
        (self.target_period * self.stack.control_rate).round() as usize
    }

    /// Where movement of `direction` in the block of `target_id` ends.
    pub fn goal(&self, target_id: u32, direction: super::Direction) -> Pose2 {
        match direction {
            super::Direction::Outbound => self.target(target_id),
            super::Direction::Return => self.home(),
        }
    }

    pub fn total_movements(&self) -> usize {
        2 * self.cycles_per_target as usize * self.n_targets as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clock_radius > 0.0) {
            return Err(Error::Config("experiment.clock_radius must be > 0".into()));
        }
        if self.cycles_per_target < 1 || self.n_targets < 1 {
            return Err(Error::Config("cycles and targets must be >= 1".into()));
        }
        if !(self.target_period > 0.0) {
            return Err(Error::Config("experiment.target_period must be > 0".into()));
        }
        if !(0.0..=0.05).contains(&self.trim_fraction) {
            return Err(Error::Config(format!(
                "analysis.trim_fraction must lie in [0, 0.05] (got {})",
                self.trim_fraction
            )));
        }
        self.arm.validate()?;
        self.planner.validate()?;
        self.stack.validate()?;
        if (self.planner.rate - self.stack.control_rate).abs() > 0.0 {
            return Err(Error::Config("planner and control rates must match".into()));
        }
        // every target and the home pose must be reachable with the posture
        // used during its block
        for id in 1..=self.n_targets {
            let t = self.target(id);
            let h = self.home();
            let w = match self.interaction {
                InteractionDirection::HomeToTarget => {
                    let d = (t.x - h.x).hypot(t.y - h.y);
                    [(t.x - h.x) / d, (t.y - h.y) / d]
                }
                InteractionDirection::Fixed(a) => [a.cos(), a.sin()],
            };
            solve_posture(&self.arm, &t, w, self.stack.elbow_branch, None)?;
            solve_posture(&self.arm, &h, w, self.stack.elbow_branch, None)?;
        }
        Ok(())
    }

    /// Reads a config file and applies `key=value` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text, overrides)
    }

    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut flat = BTreeMap::new();
        flatten("", &Value::Table(table), &mut flat);
        for o in overrides {
            let (k, v) = parse_override(o)?;
            flat.insert(k, v);
        }
        let mut cfg = Self::default();
        cfg.apply(&flat)?;
        Ok(cfg)
    }

    /// Applies flat dotted keys on top of the current values.
    pub fn apply(&mut self, flat: &BTreeMap<String, Value>) -> Result<()> {
        for (key, value) in flat {
            self.set(key, value)?;
        }
        let geometry = ["arm.link_lengths", "arm.link_masses"].iter().any(|k| flat.contains_key(*k));
        if geometry {
            let rods = ArmParams::uniform_rods(self.arm.link_lengths, self.arm.link_masses);
            if !flat.contains_key("arm.link_inertias") {
                self.arm.link_inertias = rods.link_inertias;
            }
            if !flat.contains_key("arm.com_offsets") {
                self.arm.com_offsets = rods.com_offsets;
            }
        }
        Ok(())
    }

    fn set(&mut self, key: &str, v: &Value) -> Result<()> {
        let (section, name) = key.split_once('.').unwrap_or(("", key));
        match (section, name) {
            ("experiment", "clock_center") => {
                let [x, y] = arr::<2>(key, v)?;
                self.clock_center = Pose2::point(x, y);
            }
            ("experiment", "clock_radius") => self.clock_radius = num(key, v)?,
            ("experiment", "n_targets") => self.n_targets = int(key, v)? as u32,
            ("experiment", "cycles_per_target") => self.cycles_per_target = int(key, v)? as u32,
            ("experiment", "target_period") => self.target_period = num(key, v)?,
            ("experiment", "home_policy") => match text(key, v)? {
                "center" => self.home_policy = HomePolicy::Center,
                other => return Err(bad(key, other)),
            },
            ("experiment", "interaction_direction") => {
                self.interaction = match v {
                    Value::String(s) if s == "home-to-target" => InteractionDirection::HomeToTarget,
                    Value::String(s) => return Err(bad(key, s)),
                    _ => InteractionDirection::Fixed(num(key, v)?),
                }
            }
            ("experiment", "seed") => self.seed = int(key, v)?,
            ("experiment", "output_path") => self.output_path = PathBuf::from(text(key, v)?),
            ("analysis", "trim_fraction") => self.trim_fraction = num(key, v)?,

            ("arm", "link_lengths") => self.arm.link_lengths = arr(key, v)?,
            ("arm", "link_masses") => self.arm.link_masses = arr(key, v)?,
            ("arm", "link_inertias") => self.arm.link_inertias = arr(key, v)?,
            ("arm", "com_offsets") => self.arm.com_offsets = arr(key, v)?,
            ("arm", "joint_damping") => self.arm.joint_damping = arr(key, v)?,
            ("arm", "joint_torque_limits") => self.arm.joint_torque_limits = arr(key, v)?,
            ("arm", "hand_tip_offset") => self.arm.hand_tip_offset = num(key, v)?,

            ("planner", "mass") => self.planner.mass = num(key, v)?,
            ("planner", "a_max") => self.planner.a_max = num(key, v)?,
            ("planner", "stiffness") => self.planner.stiffness = num(key, v)?,
            ("planner", "rate") => self.planner.rate = num(key, v)?,
            ("planner", "profile") => self.planner.profile = text(key, v)?.to_string(),

            ("stack", "roa_profile") => self.stack.roa_profile = text(key, v)?.to_string(),
            ("stack", "joint_x1") => self.stack.joint_x1 = arr(key, v)?,
            ("stack", "joint_x2") => self.stack.joint_x2 = arr(key, v)?,
            ("stack", "tmax_rule") => self.stack.tmax_rule = text(key, v)?.to_string(),
            ("stack", "max_joint_step") => self.stack.max_joint_step = num(key, v)?,
            ("stack", "control_rate") => self.stack.control_rate = num(key, v)?,
            ("stack", "elbow_branch") => {
                self.stack.elbow_branch = match text(key, v)? {
                    "out" => ElbowBranch::Out,
                    "in" => ElbowBranch::In,
                    other => return Err(bad(key, other)),
                }
            }
            ("stack", roa) if roa.contains('.') => {
                let (link, field) = roa.split_once('.').expect("checked");
                let i = LINKS
                    .iter()
                    .position(|l| *l == link)
                    .ok_or_else(|| unknown(key))?;
                let g: &mut RoaGains = &mut self.stack.roa[i];
                match field {
                    "k0" => g.k0 = num(key, v)?,
                    "x_b" => g.x_b = num(key, v)?,
                    "f_max" => g.f_max = num(key, v)?,
                    _ => return Err(unknown(key)),
                }
            }

            ("integrator", "rel_tol") => self.integrator.rel_tol = num(key, v)?,
            ("integrator", "abs_tol") => self.integrator.abs_tol = num(key, v)?,
            ("integrator", "min_step") => self.integrator.min_step = num(key, v)?,
            ("integrator", "max_step") => self.integrator.max_step = num(key, v)?,
            _ => return Err(unknown(key)),
        }
        Ok(())
    }

    /// Every setting as flat dotted keys, in a stable order.
    pub fn to_flat(&self) -> Vec<(String, Value)> {
        let f = Value::Float;
        let a = |x: &[f64]| Value::Array(x.iter().map(|v| Value::Float(*v)).collect());
        let s = |x: &str| Value::String(x.to_string());
        let mut out = vec![
            ("experiment.clock_center".into(), a(&self.clock_center.xy())),
            ("experiment.clock_radius".into(), f(self.clock_radius)),
            ("experiment.n_targets".into(), Value::Integer(self.n_targets.into())),
            ("experiment.cycles_per_target".into(), Value::Integer(self.cycles_per_target.into())),
            ("experiment.target_period".into(), f(self.target_period)),
            ("experiment.home_policy".into(), s("center")),
            (
                "experiment.interaction_direction".into(),
                match self.interaction {
                    InteractionDirection::HomeToTarget => s("home-to-target"),
                    InteractionDirection::Fixed(angle) => f(angle),
                },
            ),
            ("experiment.seed".into(), Value::Integer(self.seed as i64)),
            ("experiment.output_path".into(), s(&self.output_path.to_string_lossy())),
            ("analysis.trim_fraction".into(), f(self.trim_fraction)),
            ("arm.link_lengths".into(), a(&self.arm.link_lengths)),
            ("arm.link_masses".into(), a(&self.arm.link_masses)),
            ("arm.link_inertias".into(), a(&self.arm.link_inertias)),
            ("arm.com_offsets".into(), a(&self.arm.com_offsets)),
            ("arm.joint_damping".into(), a(&self.arm.joint_damping)),
            ("arm.joint_torque_limits".into(), a(&self.arm.joint_torque_limits)),
            ("arm.hand_tip_offset".into(), f(self.arm.hand_tip_offset)),
            ("planner.mass".into(), f(self.planner.mass)),
            ("planner.a_max".into(), f(self.planner.a_max)),
            ("planner.stiffness".into(), f(self.planner.stiffness)),
            ("planner.rate".into(), f(self.planner.rate)),
            ("planner.profile".into(), s(&self.planner.profile)),
            ("stack.roa_profile".into(), s(&self.stack.roa_profile)),
        ];
        for (link, g) in LINKS.iter().zip(&self.stack.roa) {
            out.push((format!("stack.{link}.k0"), f(g.k0)));
            out.push((format!("stack.{link}.x_b"), f(g.x_b)));
            out.push((format!("stack.{link}.f_max"), f(g.f_max)));
        }
        out.extend([
            ("stack.joint_x1".into(), a(&self.stack.joint_x1)),
            ("stack.joint_x2".into(), a(&self.stack.joint_x2)),
            ("stack.tmax_rule".into(), s(&self.stack.tmax_rule)),
            ("stack.max_joint_step".into(), f(self.stack.max_joint_step)),
            (
                "stack.elbow_branch".into(),
                s(match self.stack.elbow_branch {
                    ElbowBranch::Out => "out",
                    ElbowBranch::In => "in",
                }),
            ),
            ("stack.control_rate".into(), f(self.stack.control_rate)),
            ("integrator.rel_tol".into(), f(self.integrator.rel_tol)),
            ("integrator.abs_tol".into(), f(self.integrator.abs_tol)),
            ("integrator.min_step".into(), f(self.integrator.min_step)),
            ("integrator.max_step".into(), f(self.integrator.max_step)),
        ]);
        out
    }

    /// The configuration as loadable text.
    pub fn to_text(&self) -> String {
        self.to_flat()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, Value>) {
    match v {
        Value::Table(t) => {
            for (k, v) in t {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, v, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

/// `key=value`; the value is read as a TOML value, falling back to a bare string.
pub(crate) fn parse_override(s: &str) -> Result<(String, Value)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{s}` is not key=value")))?;
    let k = k.trim();
    let v = v.trim();
    if k.is_empty() {
        return Err(Error::Config(format!("override `{s}` has an empty key")));
    }
    let value = format!("v = {v}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(v.to_string()));
    Ok((k.to_string(), value))
}

fn unknown(key: &str) -> Error {
    Error::Config(format!("unknown key `{key}`"))
}

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value `{value}` for `{key}`"))
}

fn num(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Config(format!("`{key}` expects a number, got {v}"))),
    }
}

fn int(key: &str, v: &Value) -> Result<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(Error::Config(format!("`{key}` expects a non-negative integer, got {v}"))),
    }
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::Config(format!("`{key}` expects a string, got {v}")))
}

fn arr<const N: usize>(key: &str, v: &Value) -> Result<[f64; N]> {
    let items = v
        .as_array()
        .filter(|a| a.len() == N)
        .ok_or_else(|| Error::Config(format!("`{key}` expects {N} numbers, got {v}")))?;
    let mut out = [0.0; N];
    for (o, item) in out.iter_mut().zip(items) {
        *o = num(key, item)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.total_movements(), 1600);
        let t1 = c.target(1);
        assert!((t1.x - 0.4).abs() < 1e-15 && t1.y.abs() < 1e-15);
        let t3 = c.target(3);
        assert!((t3.x - 0.3).abs() < 1e-15 && (t3.y - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sections_and_dotted_keys_agree() {
        let a = ExperimentConfig::from_text("[planner]\na_max = 2.0\n[stack.hand]\nk0 = 800\n", &[]).unwrap();
        let b = ExperimentConfig::from_text("planner.a_max = 2.0\nstack.hand.k0 = 800.0\n", &[]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.planner.a_max, 2.0);
        assert_eq!(a.stack.roa[2].k0, 800.0);
    }

    #[test]
    fn overrides_last_wins() {
        let o = vec![
            "experiment.cycles_per_target=3".to_string(),
            "planner.a_max=2".to_string(),
            "experiment.cycles_per_target=1".to_string(),
        ];
        let c = ExperimentConfig::from_text("experiment.cycles_per_target = 7\n", &o).unwrap();
        assert_eq!(c.cycles_per_target, 1);
        assert_eq!(c.total_movements(), 16);
        assert_eq!(c.planner.a_max, 2.0);
    }

    #[test]
    fn bare_string_override() {
        let c = ExperimentConfig::from_text("", &["stack.tmax_rule=literal-rows".into()]).unwrap();
        assert_eq!(c.stack.tmax_rule, "literal-rows");
    }

    #[test]
    fn unknown_and_mistyped_keys_are_rejected() {
        assert!(ExperimentConfig::from_text("planner.a_mx = 1.0", &[]).is_err());
        assert!(ExperimentConfig::from_text("planner.a_max = \"fast\"", &[]).is_err());
        assert!(ExperimentConfig::from_text("arm.link_lengths = [1.0, 2.0]", &[]).is_err());
        assert!(ExperimentConfig::from_text("", &["novalue".into()]).is_err());
    }

    #[test]
    fn rod_inertias_follow_geometry_unless_given() {
        let c = ExperimentConfig::from_text("arm.link_masses = [2.0, 2.0, 2.0]", &[]).unwrap();
        assert!((c.arm.link_inertias[0] - 2.0 * 0.282 * 0.282 / 12.0).abs() < 1e-15);
        let c = ExperimentConfig::from_text(
            "arm.link_masses = [2.0, 2.0, 2.0]\narm.link_inertias = [0.1, 0.1, 0.1]",
            &[],
        )
        .unwrap();
        assert_eq!(c.arm.link_inertias, [0.1; 3]);
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::default();
        c.planner.a_max = 1.7;
        c.interaction = InteractionDirection::Fixed(0.25);
        c.stack.elbow_branch = ElbowBranch::In;
        let back = ExperimentConfig::from_text(&c.to_text(), &[]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_experiments_are_rejected() {
        for bad in [
            "experiment.clock_radius = 0.0",
            "experiment.cycles_per_target = 0",
            "experiment.target_period = -1.0",
            "experiment.clock_center = [0.9, 0.0]",
            "analysis.trim_fraction = 0.2",
        ] {
            let c = ExperimentConfig::from_text(bad, &[]).unwrap();
            assert!(c.validate().is_err(), "{bad}");
        }
    }
}
