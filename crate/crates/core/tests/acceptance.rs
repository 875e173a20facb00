//! Acceptance suite: one PASS/FAIL line per criterion on the scaled
//! 80-movement clock run. Exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use hpmc::analysis::{
    executed_speeds, planned_speeds, r_value, shape_correlation, trimmed_harmonic_r, Harmonic, MinimumJerk,
    ReferenceShape,
};
use hpmc::arm::manipulability_ellipsoid;
use hpmc::experiment::{
    read_samples, Experiment, ExperimentConfig, MovementRecord, MovementStatus, TrajectorySample, RECORDS_FILE,
    SAMPLES_FILE,
};

const CYCLES: u32 = 5;
const RUNTIME_BUDGET: Duration = Duration::from_secs(120);
const LOW_MANIPULABILITY_COUNT: usize = 2;

struct Outcome {
    lines: Vec<String>,
    failed: usize,
}

impl Outcome {
    fn report(&mut self, name: &str, passed: bool, detail: String) {
        self.failed += usize::from(!passed);
        let line = format!("{}  {name}: {detail}", if passed { "PASS" } else { "FAIL" });
        println!("{line}");
        self.lines.push(line);
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Targets whose direction of travel the arm is worst at, ranked by the
/// directional extent of the manipulability ellipse averaged over the
/// home and target postures.
fn low_manipulability_targets(exp: &Experiment, cfg: &ExperimentConfig) -> Vec<(u32, f64)> {
    let mut ranked: Vec<(u32, f64)> = (1..=cfg.n_targets)
        .map(|id| {
            let u = exp.interaction_direction(id);
            let at = |q| manipulability_ellipsoid(&cfg.arm, &q).directional_extent(u);
            let e = 0.5 * (at(exp.initial_posture(id).unwrap()) + at(exp.target_posture(id).unwrap()));
            (id, e)
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    ranked.truncate(LOW_MANIPULABILITY_COUNT);
    ranked
}

fn dense_r(shape: &dyn ReferenceShape) -> f64 {
    let n = 100_000;
    let speeds: Vec<f64> = (0..=n).map(|i| shape.velocity(i as f64 / n as f64)).collect();
    r_value(&speeds, 0.0).unwrap()
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig::from_text("", &[format!("experiment.cycles_per_target={CYCLES}")]).unwrap();
    let exp = Experiment::new(cfg.clone()).unwrap();
    let trim = cfg.trim_fraction;
    let mut out = Outcome {
        lines: Vec::new(),
        failed: 0,
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let records = exp.run_to_dir(dir_a.path()).unwrap();
    let elapsed = started.elapsed();
    exp.run_to_dir(dir_b.path()).unwrap();
    let samples = read_samples(&dir_a.path().join(SAMPLES_FILE)).unwrap();

    let ok: Vec<&MovementRecord> = records.iter().filter(|r| r.status == MovementStatus::Ok).collect();
    out.report(
        "scaled run",
        records.len() == 80 && ok.len() == 80 && elapsed < RUNTIME_BUDGET,
        format!("{} movements, {} completed, {:.1} s (budget {} s)", records.len(), ok.len(), elapsed.as_secs_f64(), RUNTIME_BUDGET.as_secs()),
    );

    // 1: planned r
    let r_plan = mean(&ok.iter().map(|r| r.r_planned).collect::<Vec<_>>());
    out.report(
        "1 planned r",
        (1.55..=1.65).contains(&r_plan),
        format!(
            "r_planned {r_plan:.4} in [1.55, 1.65]; window = first to last sample at or above {:.1}% of peak speed (trimmed harmonic {:.4}, untrimmed {:.4})",
            100.0 * trim,
            trimmed_harmonic_r(trim),
            PI / 2.0
        ),
    );

    // 2: executed r
    let r_exec: Vec<f64> = ok.iter().map(|r| r.r_executed).collect();
    let r_exec_mean = mean(&r_exec);
    let above = ok.iter().filter(|r| r.r_executed > r.r_planned).count();
    let frac = above as f64 / ok.len() as f64;
    out.report(
        "2 executed r",
        (1.65..=2.0).contains(&r_exec_mean) && frac >= 0.9,
        format!(
            "mean {r_exec_mean:.4} in [1.65, 2.00]; r_executed > r_planned on {above}/{} ({:.0}%, need >= 90%); simulated arm inertias are not the published ones, so only direction and band are compared",
            ok.len(),
            100.0 * frac
        ),
    );

    // 3: tracking
    let med_pos = median(ok.iter().map(|r| r.rmse_pos).collect());
    let mut vel_by_target: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for r in &ok {
        vel_by_target.entry(r.target_id).or_default().push(r.rmse_vel);
    }
    let vel_mean: BTreeMap<u32, f64> = vel_by_target.iter().map(|(k, v)| (*k, mean(v))).collect();
    let (best_id, best) = vel_mean
        .iter()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, v)| (*k, *v))
        .unwrap();
    let low = low_manipulability_targets(&exp, &cfg);
    let ratios: Vec<(u32, f64)> = low.iter().map(|(id, _)| (*id, vel_mean[id] / best)).collect();
    let per_target = vel_mean
        .iter()
        .map(|(k, v)| format!("{k}:{:.1}", v * 1e3))
        .collect::<Vec<_>>()
        .join(" ");
    out.report(
        "3 tracking",
        med_pos < 1e-3 && ratios.iter().all(|(_, q)| *q >= 1.5),
        format!(
            "median position rmse {:.3} mm (< 1 mm); velocity rmse mm/s per target [{per_target}]; low-manipulability targets {} vs best target {best_id}: ratios {} (need >= 1.5)",
            med_pos * 1e3,
            low.iter().map(|(id, e)| format!("{id} (extent {e:.4})")).collect::<Vec<_>>().join(", "),
            ratios.iter().map(|(id, q)| format!("{id}:{q:.2}")).collect::<Vec<_>>().join(" ")
        ),
    );

    // 4: reference oracles
    let r_mj = dense_r(&MinimumJerk);
    let r_h = dense_r(&Harmonic);
    out.report(
        "4 reference oracles",
        (r_mj - 1.875).abs() <= 1e-3 && (r_h - PI / 2.0).abs() <= 1e-3,
        format!(
            "minimum jerk {r_mj:.5} (1.875 ± 0.001), harmonic {r_h:.5} (1.5708 ± 0.001); the published harmonic value 1.596 is not reproduced by either the analytic profile or the {:.0}%-trimmed window ({:.4})",
            100.0 * trim,
            trimmed_harmonic_r(trim)
        ),
    );

    // 5: property suites, torque limits, determinism
    let st_started = Instant::now();
    let checks = hpmc::selftest::run_all();
    let st_elapsed = st_started.elapsed();
    let st_failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    out.report(
        "5a property suites",
        st_failed.is_empty() && st_elapsed < Duration::from_secs(60),
        format!(
            "{} checks in {:.1} s (< 60 s), failed: [{}]",
            checks.len(),
            st_elapsed.as_secs_f64(),
            st_failed.join(", ")
        ),
    );
    let limits = cfg.arm.joint_torque_limits;
    let violations = samples
        .iter()
        .filter(|s| (0..3).any(|i| s.tau[i].abs() > limits[i]))
        .count();
    let peak: Vec<f64> = (0..3)
        .map(|i| samples.iter().map(|s| s.tau[i].abs()).fold(0.0, f64::max))
        .collect();
    out.report(
        "5b torque limits",
        violations == 0,
        format!(
            "{violations} of {} samples over limits {limits:?}; peak |tau| [{:.2}, {:.2}, {:.2}] N·m",
            samples.len(),
            peak[0],
            peak[1],
            peak[2]
        ),
    );
    let identical = [SAMPLES_FILE, RECORDS_FILE].iter().all(|f| {
        std::fs::read(dir_a.path().join(f)).unwrap() == std::fs::read(dir_b.path().join(f)).unwrap()
    });
    out.report(
        "5c determinism",
        identical,
        format!("two runs {} byte-identical", if identical { "are" } else { "are not" }),
    );

    // 6: shape
    let mut by_movement: BTreeMap<u32, Vec<TrajectorySample>> = BTreeMap::new();
    for s in &samples {
        by_movement.entry(s.movement_id).or_default().push(*s);
    }
    let low_ids: Vec<u32> = low.iter().map(|(id, _)| *id).collect();
    let mut worst_planned = f64::INFINITY;
    let (mut wins, mut considered) = (0, 0);
    for m in by_movement.values() {
        let c = shape_correlation(&planned_speeds(m), trim, &Harmonic).unwrap();
        worst_planned = worst_planned.min(c);
        if low_ids.contains(&m[0].target_id) {
            let exec = executed_speeds(m);
            considered += 1;
            if shape_correlation(&exec, trim, &MinimumJerk).unwrap() > shape_correlation(&exec, trim, &Harmonic).unwrap() {
                wins += 1;
            }
        }
    }
    let win_frac = wins as f64 / considered.max(1) as f64;
    out.report(
        "6 shape",
        worst_planned > 0.999 && considered > 0 && win_frac >= 0.6,
        format!(
            "min planned-vs-harmonic correlation {worst_planned:.6} (> 0.999); executed closer to minimum jerk on {wins}/{considered} low-manipulability movements ({:.0}%, desk-scale threshold 60%)",
            100.0 * win_frac
        ),
    );

    println!("{} criteria, {} failed", out.lines.len(), out.failed);
    if out.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
