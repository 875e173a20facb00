//! Fast invariant suite: kinematics, dynamics, controller passivity and the
//! reference r-values, each reported as a pass/fail line.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{r_value, trimmed_harmonic_r, Harmonic, MinimumJerk, ReferenceShape, DEFAULT_TRIM};
use crate::arm::{
    forward_kinematics, geometric_jacobian, kinetic_energy, mass_matrix, ArmParams, ArmState, IntegratorOptions,
    Joints, StepDynamics, Wrench2,
};
use crate::fic::{drive_trace, excursion, fic_energy_audit, ForceProfile, LinearSaturated, TanhSaturated, TwoPlateau};
use crate::posture::{arm_ik, ElbowBranch};

/// Link lengths of the simulated arm (m).
const PUBLISHED_LENGTHS: [f64; 3] = [0.282, 0.269, 0.044];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag}  {:<28} {}", self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

fn random_joints(rng: &mut ChaCha8Rng) -> Joints {
    [rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI)]
}

/// Suite on the clock-experiment arm.
pub fn run_all() -> Vec<Check> {
    run_with(&ArmParams::human_arm())
}

pub fn run_with(arm: &ArmParams) -> Vec<Check> {
    vec![
        fk_reference(arm),
        fk_ik_round_trip(arm),
        jacobian_finite_differences(arm),
        mass_matrix_spd(arm),
        energy_drift(arm),
        fic_passivity(),
        r_oracles(),
    ]
}

/// Hand pose at two configurations against the published geometry, then
/// the posture solver must land the hand on FK targets computed from it.
fn fk_reference(arm: &ArmParams) -> Check {
    let reach: f64 = PUBLISHED_LENGTHS.iter().sum();
    let stretched = forward_kinematics(arm, &[0.0; 3]).hand;
    let raised = forward_kinematics(arm, &[PI / 2.0, 0.0, 0.0]).hand;
    let err = (stretched.x - reach).abs().max(stretched.y.abs()).max(raised.x.abs()).max((raised.y - reach).abs());
    check("fk reference poses", err < 1e-12, format!("max error {err:.2e} m"))
}

fn fk_ik_round_trip(arm: &ArmParams) -> Check {
    let mut rng = rng();
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    // targets built from the published geometry expose a mis-set arm
    let reference = ArmParams::uniform_rods(PUBLISHED_LENGTHS, arm.link_masses);
    for _ in 0..1000 {
        let mut q = random_joints(&mut rng);
        q[1] = q[1].abs().clamp(0.05, PI - 0.05) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let fk = forward_kinematics(&reference, &q);
        match arm_ik(&fk.wrist, fk.hand.phi, arm, ElbowBranch::from_sign(q[1]), None) {
            Ok(p) => {
                let back = forward_kinematics(arm, &p.q_d).hand;
                worst = worst.max(back.distance(&fk.hand));
            }
            Err(_) => failures += 1,
        }
    }
    check(
        "fk/ik round trip",
        failures == 0 && worst < 1e-9,
        format!("1000 postures, max hand error {worst:.2e} m, {failures} unreachable"),
    )
}

fn jacobian_finite_differences(arm: &ArmParams) -> Check {
    let mut rng = rng();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let q = random_joints(&mut rng);
        let j = geometric_jacobian(arm, &q);
        for c in 0..3 {
            let mut plus = q;
            let mut minus = q;
            plus[c] += h;
            minus[c] -= h;
            let a = forward_kinematics(arm, &plus).hand;
            let b = forward_kinematics(arm, &minus).hand;
            let fd = [(a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h), (plus.iter().sum::<f64>() - minus.iter().sum::<f64>()) / (2.0 * h)];
            for r in 0..3 {
                worst = worst.max((j[(r, c)] - fd[r]).abs());
            }
        }
    }
    check("jacobian finite differences", worst < 1e-6, format!("1000 postures, max deviation {worst:.2e}"))
}

fn mass_matrix_spd(arm: &ArmParams) -> Check {
    let mut rng = rng();
    let mut asym: f64 = 0.0;
    let mut min_eig = f64::MAX;
    for _ in 0..1000 {
        let m = mass_matrix(arm, &random_joints(&mut rng));
        asym = asym.max((m - m.transpose()).abs().max());
        min_eig = min_eig.min(m.symmetric_eigenvalues().min());
    }
    check(
        "mass matrix symmetric pd",
        asym < 1e-15 && min_eig > 0.0,
        format!("asymmetry {asym:.1e}, smallest eigenvalue {min_eig:.3e}"),
    )
}

fn energy_drift(arm: &ArmParams) -> Check {
    let mut free = arm.clone();
    free.joint_damping = [0.0; 3];
    let mut state = ArmState {
        q: [0.3, 1.2, -0.5],
        dq: [1.0, -2.0, 3.0],
        t: 0.0,
    };
    let e0 = kinetic_energy(&free, &state);
    let mut dynamics = StepDynamics::new(IntegratorOptions::default());
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        match dynamics.step(&free, &state, &[0.0; 3], &Wrench2::ZERO, 1e-3) {
            Ok(next) => state = next,
            Err(e) => return check("energy drift (undamped)", false, e.to_string()),
        }
        worst = worst.max((kinetic_energy(&free, &state) - e0).abs() / e0);
    }
    check("energy drift (undamped)", worst < 1e-6, format!("1 s, max relative drift {worst:.2e}"))
}

fn fic_passivity() -> Check {
    let mut rng = rng();
    let profiles: [Box<dyn ForceProfile>; 3] = [
        Box::new(LinearSaturated::new(100.0, 20.0).expect("valid")),
        Box::new(TanhSaturated::new(500.0, 25.0, 0.05).expect("valid")),
        Box::new(TwoPlateau::new(5.0, 20.0, 0.02, 0.08).expect("valid")),
    ];
    let mut violations = 0;
    let mut worst_ratio = f64::MIN;
    for i in 0..100 {
        let p = profiles[i % 3].as_ref();
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let legs = rng.random_range(1..6);
        let turns: Vec<f64> = (0..legs).map(|_| sign * rng.random_range(0.001..0.3)).collect();
        let peak = turns.iter().map(|t| t.abs()).fold(0.0, f64::max);
        let trace = drive_trace(p, &excursion(&turns, 200), 1e-3);
        let stored: f64 = (0..1000)
            .map(|k| p.magnitude(peak * (k as f64 + 0.5) / 1000.0) * peak / 1000.0)
            .sum();
        let work = fic_energy_audit(&trace);
        worst_ratio = worst_ratio.max(work / stored);
        let bounded = trace.iter().all(|(_, f)| f.abs() <= 2.0 * p.saturation());
        if work > 1e-9 * stored || !bounded {
            violations += 1;
        }
    }
    check(
        "fic passivity",
        violations == 0,
        format!("100 traces, {violations} violations, max work/stored {worst_ratio:.3}"),
    )
}

fn r_oracles() -> Check {
    let dense = |shape: &dyn ReferenceShape| -> Vec<f64> {
        (0..=100_000).map(|i| shape.velocity(i as f64 / 100_000.0)).collect()
    };
    let (mj, h) = match (r_value(&dense(&MinimumJerk), 0.0), r_value(&dense(&Harmonic), 0.0)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return check("r oracles", false, "degenerate reference series".into()),
    };
    let trimmed = r_value(&dense(&Harmonic), DEFAULT_TRIM).unwrap_or(f64::NAN);
    let ok = (mj - 1.875).abs() < 1e-3
        && (h - PI / 2.0).abs() < 1e-3
        && (trimmed - trimmed_harmonic_r(DEFAULT_TRIM)).abs() < 1e-4;
    check(
        "r oracles",
        ok,
        format!("minimum jerk {mj:.4}, harmonic {h:.4}, harmonic trimmed at 1% {trimmed:.4}"),
    )
}
