//! Figure data files and the plain-text summary report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::arm::{manipulability_ellipsoid, Joints};
use crate::error::{Error, Result};
use crate::experiment::{Direction, Experiment, MovementRecord, MovementStatus, TrajectorySample};

use super::{active_window, aggregate, aggregate_direction, planned_speeds, executed_speeds, AggregateStats};
use super::{Harmonic, MinimumJerk, ReferenceShape};

pub const R_FILE: &str = "fig3_r_per_target.csv";
pub const RMSE_FILE: &str = "fig4_rmse_per_target.csv";
pub const ELLIPSE_FILE: &str = "fig5_ellipses.csv";
pub const PATH_FILE: &str = "fig5_paths.csv";
pub const OVERLAY_FILE: &str = "fig6_overlay.csv";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    /// target, r_planned_mean, r_planned_std, r_executed_mean, r_executed_std
    pub r_per_target: PathBuf,
    /// target, rmse_pos_mean, rmse_pos_std, rmse_vel_mean, rmse_vel_std
    pub rmse_per_target: PathBuf,
    /// pose, x, y, q1, q2, q3, axis_major, axis_minor, major_angle
    pub ellipses: PathBuf,
    /// target, movement_id, t, x_d, y_d, x, y (first outbound movement per target)
    pub paths: PathBuf,
    /// target, movement_id, t, planned, executed, min_jerk, harmonic
    pub overlay: PathBuf,
    pub report: PathBuf,
}

struct Table {
    path: PathBuf,
    out: BufWriter<File>,
}

impl Table {
    fn create(path: PathBuf, header: &str) -> Result<Self> {
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut t = Self {
            path,
            out: BufWriter::new(file),
        };
        t.line(header)?;
        Ok(t)
    }

    fn line(&mut self, s: &str) -> Result<()> {
        writeln!(self.out, "{s}").map_err(|e| Error::io(&self.path, e))
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.9e}")).collect::<Vec<_>>().join(",")
}

/// Groups samples by movement, keeping their order.
pub(crate) fn by_movement(samples: &[TrajectorySample]) -> BTreeMap<u32, &[TrajectorySample]> {
    let mut out = BTreeMap::new();
    let mut start = 0;
    for i in 1..=samples.len() {
        if i == samples.len() || samples[i].movement_id != samples[start].movement_id {
            out.insert(samples[start].movement_id, &samples[start..i]);
            start = i;
        }
    }
    out
}

/// Reference speeds stretched over the planned active window of a movement.
pub fn reference_speeds(samples: &[TrajectorySample], trim: f64, shape: &dyn ReferenceShape) -> Result<Vec<f64>> {
    let planned = planned_speeds(samples);
    let w = active_window(&planned, trim)?;
    let (a, b) = (*w.start(), *w.end());
    let dt = samples[1].t - samples[0].t;
    let duration = (b - a) as f64 * dt;
    let distance: f64 = planned[a..=b].windows(2).map(|p| 0.5 * (p[0] + p[1]) * dt).sum();
    Ok((0..samples.len())
        .map(|i| {
            if i < a || i > b || duration <= 0.0 {
                0.0
            } else {
                distance / duration * shape.velocity((i - a) as f64 / (b - a) as f64)
            }
        })
        .collect())
}

/// Writes the figure data files and the report into `out_dir`.
pub fn emit_plot_data(
    records: &[MovementRecord],
    samples: &[TrajectorySample],
    experiment: &Experiment,
    out_dir: &Path,
) -> Result<PlotFiles> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let stats = aggregate(records)?;
    let cfg = &experiment.config;

    let mut t = Table::create(out_dir.join(R_FILE), "target,r_planned_mean,r_planned_std,r_executed_mean,r_executed_std")?;
    for (id, g) in &stats.per_target {
        t.line(&format!(
            "{id},{}",
            row(&[g.r_planned.mean, g.r_planned.std, g.r_executed.mean, g.r_executed.std])
        ))?;
    }
    let r_per_target = t.finish()?;

    let mut t = Table::create(out_dir.join(RMSE_FILE), "target,rmse_pos_mean,rmse_pos_std,rmse_vel_mean,rmse_vel_std")?;
    for (id, g) in &stats.per_target {
        t.line(&format!(
            "{id},{}",
            row(&[g.rmse_pos.mean, g.rmse_pos.std, g.rmse_vel.mean, g.rmse_vel.std])
        ))?;
    }
    let rmse_per_target = t.finish()?;

    let mut t = Table::create(out_dir.join(ELLIPSE_FILE), "pose,x,y,q1,q2,q3,axis_major,axis_minor,major_angle")?;
    let mut pose_line = |label: String, q: Joints, x: f64, y: f64| -> Result<()> {
        let e = manipulability_ellipsoid(&cfg.arm, &q);
        t.line(&format!(
            "{label},{}",
            row(&[x, y, q[0], q[1], q[2], e.axes[0], e.axes[1], e.major_angle()])
        ))
    };
    let home = experiment.home();
    pose_line("home".into(), experiment.initial_posture(1)?, home.x, home.y)?;
    for id in 1..=cfg.n_targets {
        let target = experiment.target(id);
        let q = experiment.target_posture(id)?;
        pose_line(format!("target{id}"), q, target.x, target.y)?;
    }
    let ellipses = t.finish()?;

    let movements = by_movement(samples);
    let mut firsts: BTreeMap<u32, &[TrajectorySample]> = BTreeMap::new();
    for m in movements.values() {
        if m[0].direction == Direction::Outbound {
            firsts.entry(m[0].target_id).or_insert(m);
        }
    }

    let mut t = Table::create(out_dir.join(PATH_FILE), "target,movement_id,t,x_d,y_d,x,y")?;
    for m in firsts.values() {
        for s in m.iter() {
            t.line(&format!(
                "{},{},{}",
                s.target_id,
                s.movement_id,
                row(&[s.t, s.x_d[0], s.x_d[1], s.x[0], s.x[1]])
            ))?;
        }
    }
    let paths = t.finish()?;

    let mut t = Table::create(out_dir.join(OVERLAY_FILE), "target,movement_id,t,planned,executed,min_jerk,harmonic")?;
    for m in firsts.values() {
        let ok = records
            .iter()
            .any(|r| r.movement_id == m[0].movement_id && r.status == MovementStatus::Ok);
        if !ok {
            continue;
        }
        let planned = planned_speeds(m);
        let executed = executed_speeds(m);
        let mj = reference_speeds(m, cfg.trim_fraction, &MinimumJerk)?;
        let h = reference_speeds(m, cfg.trim_fraction, &Harmonic)?;
        let t0 = m[0].t;
        for i in 0..m.len() {
            t.line(&format!(
                "{},{},{}",
                m[i].target_id,
                m[i].movement_id,
                row(&[m[i].t - t0, planned[i], executed[i], mj[i], h[i]])
            ))?;
        }
    }
    let overlay = t.finish()?;

    let report = out_dir.join(REPORT_FILE);
    std::fs::write(&report, render_report(records, cfg.trim_fraction)?).map_err(|e| Error::io(&report, e))?;

    Ok(PlotFiles {
        r_per_target,
        rmse_per_target,
        ellipses,
        paths,
        overlay,
        report,
    })
}

fn table(out: &mut String, stats: &AggregateStats) {
    let _ = writeln!(
        out,
        "{:>8} {:>5}  {:>18}  {:>18}  {:>22}  {:>22}",
        "target", "n", "r planned", "r executed", "rmse pos (mm)", "rmse vel (mm/s)"
    );
    let mut line = |label: String, g: &super::GroupStats| {
        let _ = writeln!(
            out,
            "{:>8} {:>5}  {:>18}  {:>18}  {:>10.4} ± {:>9.4}  {:>10.3} ± {:>9.3}",
            label,
            g.count,
            g.r_planned.to_string(),
            g.r_executed.to_string(),
            1e3 * g.rmse_pos.mean,
            1e3 * g.rmse_pos.std,
            1e3 * g.rmse_vel.mean,
            1e3 * g.rmse_vel.std,
        );
    };
    for (id, g) in &stats.per_target {
        line(id.to_string(), g);
    }
    line("all".into(), &stats.overall);
}

/// Plain-text results table: overall and per-target r and tracking errors.
pub fn render_report(records: &[MovementRecord], trim: f64) -> Result<String> {
    let stats = aggregate(records)?;
    let mut out = String::new();
    let _ = writeln!(out, "movements: {} analysed, {} excluded", stats.overall.count, stats.excluded);
    let _ = writeln!(
        out,
        "r window: samples from the first to the last at or above {:.1}% of the peak speed",
        100.0 * trim
    );
    let _ = writeln!(out, "r planned  (x_d): {}", stats.overall.r_planned);
    let _ = writeln!(out, "r executed (x):   {}", stats.overall.r_executed);
    let usable: Vec<&MovementRecord> = records.iter().filter(|r| r.status == MovementStatus::Ok).collect();
    let above = usable.iter().filter(|r| r.r_executed > r.r_planned).count();
    let _ = writeln!(
        out,
        "r executed > r planned: {above}/{} movements",
        usable.len()
    );
    let _ = writeln!(out, "references: minimum jerk 1.875, harmonic {:.4}", std::f64::consts::FRAC_PI_2);
    let _ = writeln!(out);
    table(&mut out, &stats);
    for d in [Direction::Outbound, Direction::Return] {
        if let Ok(s) = aggregate_direction(records, d) {
            let _ = writeln!(out, "\n{}", d.as_str());
            table(&mut out, &s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn movement(id: u32, n: usize, speed: impl Fn(f64) -> (f64, f64)) -> Vec<TrajectorySample> {
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                let (vp, ve) = speed(s);
                TrajectorySample {
                    t: id as f64 + i as f64 * 1e-3,
                    movement_id: id,
                    target_id: 1 + id / 2,
                    direction: if id % 2 == 0 { Direction::Outbound } else { Direction::Return },
                    x_d: [0.3, 0.0],
                    v_d: [vp, 0.0],
                    x: [0.3, 0.0],
                    v: [0.0, ve],
                    q: [0.0; 3],
                    dq: [0.0; 3],
                    tau: [0.0; 3],
                    w_ld: [[0.0; 2]; 3],
                }
            })
            .collect()
    }

    #[test]
    fn grouping_keeps_movements_apart() {
        let mut s = movement(0, 20, |_| (1.0, 1.0));
        s.extend(movement(1, 30, |_| (1.0, 1.0)));
        let g = by_movement(&s);
        assert_eq!(g.len(), 2);
        assert_eq!(g[&0].len(), 20);
        assert_eq!(g[&1].len(), 30);
        assert!(by_movement(&[]).is_empty());
    }

    #[test]
    fn reference_speeds_follow_the_planned_window() {
        let m = movement(0, 1001, |s| (0.1 * Harmonic.velocity(s), 0.0));
        let h = reference_speeds(&m, 0.0, &Harmonic).unwrap();
        let planned = planned_speeds(&m);
        for (a, b) in h.iter().zip(&planned) {
            assert!((a - b).abs() < 1e-6, "{a} {b}");
        }
        let mj = reference_speeds(&m, 0.0, &MinimumJerk).unwrap();
        let peak = mj.iter().cloned().fold(0.0, f64::max);
        assert!((peak - 0.1 * 1.875).abs() < 1e-4);
    }

    #[test]
    fn report_lists_overall_and_targets() {
        let mk = |id, r: f64, status| MovementRecord {
            movement_id: id,
            target_id: 1 + id / 2,
            direction: if id % 2 == 0 { Direction::Outbound } else { Direction::Return },
            r_planned: 1.6,
            r_executed: r,
            rmse_pos: 1e-4,
            rmse_vel: 1e-3,
            peak_speed: 0.2,
            settle_time: 0.7,
            final_error: 1e-5,
            status,
        };
        let recs = vec![
            mk(0, 1.8, MovementStatus::Ok),
            mk(1, 1.7, MovementStatus::Ok),
            mk(2, 1.9, MovementStatus::Aborted),
        ];
        let text = render_report(&recs, 0.01).unwrap();
        assert!(text.contains("2 analysed, 1 excluded"));
        assert!(text.contains("r executed (x):   1.7500 ± 0.0707"));
        assert!(text.contains("2/2 movements"));
        assert!(render_report(&recs[2..], 0.01).is_err());
    }
}
