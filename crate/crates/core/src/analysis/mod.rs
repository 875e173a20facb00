//! Movement analysis: r-values, tracking errors, aggregates and reference
//! shape comparison.

mod plot;
mod reference;

pub use plot::{
    emit_plot_data, reference_speeds, render_report, PlotFiles, ELLIPSE_FILE, OVERLAY_FILE, PATH_FILE, REPORT_FILE,
    RMSE_FILE, R_FILE,
};
pub use reference::{
    Harmonic, MinimumJerk, ReferenceRegistry, ReferenceShape, ReferenceTrajectory, ShapeBuilder,
};

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use crate::arm::Pose2;
use crate::error::{Error, Result};
use crate::experiment::{Direction, ExperimentConfig, MovementRecord, MovementStatus, TrajectorySample};

/// Default speed threshold, as a fraction of the peak, below which leading
/// and trailing samples are dropped before averaging.
pub const DEFAULT_TRIM: f64 = 0.01;

/// Distance to the goal under which a movement counts as settled (m).
pub const SETTLE_RADIUS: f64 = 1e-3;

/// Active window of a speed series: from the first to the last sample at or
/// above `trim · peak`.
pub fn active_window(speeds: &[f64], trim: f64) -> Result<RangeInclusive<usize>> {
    if speeds.len() < 10 {
        return Err(Error::DegenerateSeries(format!(
            "{} samples, need at least 10",
            speeds.len()
        )));
    }
    let peak = speeds.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) || !peak.is_finite() {
        return Err(Error::DegenerateSeries("no positive speed".into()));
    }
    let cut = trim * peak;
    let first = speeds.iter().position(|&s| s >= cut).unwrap_or(0);
    let last = speeds.iter().rposition(|&s| s >= cut).unwrap_or(speeds.len() - 1);
    Ok(first..=last)
}

/// Peak over mean speed across the active window.
pub fn r_value(speeds: &[f64], trim: f64) -> Result<f64> {
    let w = active_window(speeds, trim)?;
    let slice = &speeds[w];
    let peak = slice.iter().cloned().fold(0.0, f64::max);
    let mean = slice.iter().sum::<f64>() / slice.len() as f64;
    Ok(peak / mean)
}

/// r of a harmonic speed profile after trimming below `trim · peak`.
pub fn trimmed_harmonic_r(trim: f64) -> f64 {
    use std::f64::consts::PI;
    let s0 = trim.asin() / PI;
    PI * (1.0 - 2.0 * s0) / (2.0 * (PI * s0).cos())
}

pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "series length mismatch");
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

/// Pearson correlation between the active window of `speeds` and the
/// velocity of `shape` stretched over that window.
pub fn shape_correlation(speeds: &[f64], trim: f64, shape: &dyn ReferenceShape) -> Result<f64> {
    let w = active_window(speeds, trim)?;
    let slice = &speeds[w];
    let n = slice.len();
    if n < 3 {
        return Err(Error::DegenerateSeries("active window shorter than 3 samples".into()));
    }
    let reference: Vec<f64> = (0..n)
        .map(|i| shape.velocity(i as f64 / (n - 1) as f64))
        .collect();
    Ok(pearson(slice, &reference))
}

pub fn planned_speeds(samples: &[TrajectorySample]) -> Vec<f64> {
    samples.iter().map(|s| s.v_d[0].hypot(s.v_d[1])).collect()
}

pub fn executed_speeds(samples: &[TrajectorySample]) -> Vec<f64> {
    samples.iter().map(|s| s.v[0].hypot(s.v[1])).collect()
}

/// Metrics of one movement from its 1 kHz samples. `expected_len` is the
/// number of samples in a complete window.
pub fn movement_metrics(
    samples: &[TrajectorySample],
    goal: &Pose2,
    trim: f64,
    expected_len: usize,
) -> Result<MovementRecord> {
    let first = samples
        .first()
        .ok_or_else(|| Error::DegenerateSeries("movement without samples".into()))?;
    let planned = planned_speeds(samples);
    let executed = executed_speeds(samples);
    let r_planned = r_value(&planned, trim)?;
    let r_executed = r_value(&executed, trim)?;
    let rmse_pos = rms(samples
        .iter()
        .map(|s| (s.x_d[0] - s.x[0]).hypot(s.x_d[1] - s.x[1])));
    let rmse_vel = rms(samples
        .iter()
        .map(|s| (s.v_d[0] - s.v[0]).hypot(s.v_d[1] - s.v[1])));
    let peak_speed = executed.iter().cloned().fold(0.0, f64::max);
    let dist = |s: &TrajectorySample| (s.x[0] - goal.x).hypot(s.x[1] - goal.y);
    let last = samples.last().expect("non-empty");
    let settle_index = samples
        .iter()
        .rposition(|s| dist(s) >= SETTLE_RADIUS)
        .map_or(0, |i| i + 1);
    let settle_time = match samples.get(settle_index) {
        Some(s) => s.t - first.t,
        None => last.t - first.t,
    };
    let status = if samples.len() < expected_len {
        MovementStatus::Incomplete
    } else {
        MovementStatus::Ok
    };
    Ok(MovementRecord {
        movement_id: first.movement_id,
        target_id: first.target_id,
        direction: first.direction,
        r_planned,
        r_executed,
        rmse_pos,
        rmse_vel,
        peak_speed,
        settle_time,
        final_error: dist(last),
        status,
    })
}

/// Records recomputed from logged samples. Movements shorter than a full
/// window are flagged incomplete.
pub fn records_from_samples(samples: &[TrajectorySample], config: &ExperimentConfig) -> Vec<MovementRecord> {
    let expected = config.ticks_per_movement();
    plot::by_movement(samples)
        .into_values()
        .map(|m| {
            let s = &m[0];
            let goal = config.goal(s.target_id, s.direction);
            match movement_metrics(m, &goal, config.trim_fraction, expected) {
                Ok(r) => r,
                Err(_) => MovementRecord::flagged(s.movement_id, s.target_id, s.direction, MovementStatus::Incomplete),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Mean and sample standard deviation (zero for a single value).
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self::default();
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupStats {
    pub count: usize,
    pub r_planned: MeanStd,
    pub r_executed: MeanStd,
    pub rmse_pos: MeanStd,
    pub rmse_vel: MeanStd,
}

impl GroupStats {
    fn of(records: &[&MovementRecord]) -> Self {
        let col = |f: fn(&MovementRecord) -> f64| MeanStd::of(&records.iter().map(|r| f(r)).collect::<Vec<_>>());
        Self {
            count: records.len(),
            r_planned: col(|r| r.r_planned),
            r_executed: col(|r| r.r_executed),
            rmse_pos: col(|r| r.rmse_pos),
            rmse_vel: col(|r| r.rmse_vel),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateStats {
    pub per_target: BTreeMap<u32, GroupStats>,
    pub overall: GroupStats,
    /// Records left out because they were aborted or incomplete.
    pub excluded: usize,
}

/// Per-target and overall mean ± sample std over completed movements.
pub fn aggregate(records: &[MovementRecord]) -> Result<AggregateStats> {
    let usable: Vec<&MovementRecord> = records.iter().filter(|r| r.status == MovementStatus::Ok).collect();
    if usable.is_empty() {
        return Err(Error::EmptyGroup("no completed movements".into()));
    }
    let mut groups: BTreeMap<u32, Vec<&MovementRecord>> = BTreeMap::new();
    for r in &usable {
        groups.entry(r.target_id).or_default().push(r);
    }
    Ok(AggregateStats {
        per_target: groups.iter().map(|(k, v)| (*k, GroupStats::of(v))).collect(),
        overall: GroupStats::of(&usable),
        excluded: records.len() - usable.len(),
    })
}

/// Stats for one direction of travel only.
pub fn aggregate_direction(records: &[MovementRecord], direction: Direction) -> Result<AggregateStats> {
    let subset: Vec<MovementRecord> = records.iter().filter(|r| r.direction == direction).cloned().collect();
    aggregate(&subset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn dense(shape: &dyn ReferenceShape, n: usize) -> Vec<f64> {
        (0..=n).map(|i| shape.velocity(i as f64 / n as f64)).collect()
    }

    #[test]
    fn constant_speed_has_unit_r() {
        assert!((r_value(&[0.3; 50], DEFAULT_TRIM).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_series() {
        assert!(r_value(&[0.0; 50], DEFAULT_TRIM).is_err());
        assert!(r_value(&[1.0; 5], DEFAULT_TRIM).is_err());
    }

    #[test]
    fn minimum_jerk_r_is_1_875() {
        let r = r_value(&dense(&MinimumJerk, 100_000), 0.0).unwrap();
        assert!((r - 1.875).abs() < 1e-3, "{r}");
    }

    #[test]
    fn harmonic_r_is_half_pi() {
        let r = r_value(&dense(&Harmonic, 100_000), 0.0).unwrap();
        assert!((r - PI / 2.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn r_is_scale_invariant_and_sampling_stable() {
        for shape in [&MinimumJerk as &dyn ReferenceShape, &Harmonic] {
            let v = dense(shape, 700);
            let scaled: Vec<f64> = v.iter().map(|x| 3.7 * x).collect();
            let r = r_value(&v, DEFAULT_TRIM).unwrap();
            assert!((r - r_value(&scaled, DEFAULT_TRIM).unwrap()).abs() < 1e-12);
            let fine = r_value(&dense(shape, 1400), DEFAULT_TRIM).unwrap();
            assert!((r - fine).abs() / fine < 1e-3);
        }
    }

    #[test]
    fn trimmed_harmonic_closed_form() {
        assert!((trimmed_harmonic_r(0.0) - PI / 2.0).abs() < 1e-15);
        let r = r_value(&dense(&Harmonic, 200_000), DEFAULT_TRIM).unwrap();
        assert!((r - trimmed_harmonic_r(DEFAULT_TRIM)).abs() < 1e-4, "{r}");
        assert!((trimmed_harmonic_r(DEFAULT_TRIM) - 1.5609).abs() < 1e-4);
    }

    #[test]
    fn dwell_is_trimmed() {
        let mut v = vec![0.0; 200];
        v.extend(dense(&Harmonic, 700));
        v.extend(vec![0.0; 300]);
        let r = r_value(&v, DEFAULT_TRIM).unwrap();
        assert!((r - trimmed_harmonic_r(DEFAULT_TRIM)).abs() < 2e-3, "{r}");
        assert!(r_value(&v, 0.0).unwrap() > 2.0);
    }

    #[test]
    fn shape_correlation_identifies_profile() {
        let v = dense(&Harmonic, 700);
        assert!(shape_correlation(&v, DEFAULT_TRIM, &Harmonic).unwrap() > 0.9999);
        let mj = shape_correlation(&v, DEFAULT_TRIM, &MinimumJerk).unwrap();
        assert!(mj < 0.999);
    }

    #[test]
    fn mean_std() {
        let s = MeanStd::of(&[1.6, 1.8]);
        assert!((s.mean - 1.7).abs() < 1e-15);
        assert!((s.std - 0.141_421_356).abs() < 1e-8);
        assert_eq!(MeanStd::of(&[2.0]).std, 0.0);
        assert_eq!(MeanStd::of(&[2.0, 2.0]), MeanStd { mean: 2.0, std: 0.0 });
    }

    #[test]
    fn pearson_bounds() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&a, &[2.0, 4.0, 6.0, 8.0]) - 1.0).abs() < 1e-15);
        assert!((pearson(&a, &[-1.0, -2.0, -3.0, -4.0]) + 1.0).abs() < 1e-15);
    }
}
