//! Point-to-point reference profiles for shape comparison.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Normalised point-to-point shape on s ∈ [0, 1], from 0 to 1.
pub trait ReferenceShape: std::fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    fn position(&self, s: f64) -> f64;
    /// d(position)/ds.
    fn velocity(&self, s: f64) -> f64;
}

/// Quintic minimum-jerk profile.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinimumJerk;

impl MinimumJerk {
    pub const NAME: &'static str = "minimum-jerk";
}

impl ReferenceShape for MinimumJerk {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn position(&self, s: f64) -> f64 {
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }

    fn velocity(&self, s: f64) -> f64 {
        30.0 * s * s * (1.0 - s) * (1.0 - s)
    }
}

/// Half-cycle sinusoid.
#[derive(Debug, Clone, Copy, Default)]
pub struct Harmonic;

impl Harmonic {
    pub const NAME: &'static str = "harmonic";
}

impl ReferenceShape for Harmonic {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn position(&self, s: f64) -> f64 {
        0.5 * ((PI * s - PI / 2.0).sin() + 1.0)
    }

    fn velocity(&self, s: f64) -> f64 {
        0.5 * PI * (PI * s - PI / 2.0).cos()
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceTrajectory {
    pub shape: Arc<dyn ReferenceShape>,
    pub distance: f64,
    pub duration: f64,
}

impl ReferenceTrajectory {
    pub fn new(shape: Arc<dyn ReferenceShape>, distance: f64, duration: f64) -> Result<Self> {
        if !(distance > 0.0 && duration > 0.0) {
            return Err(Error::Config(format!(
                "reference needs distance > 0 and duration > 0 (got {distance}, {duration})"
            )));
        }
        Ok(Self {
            shape,
            distance,
            duration,
        })
    }

    pub fn minimum_jerk(distance: f64, duration: f64) -> Result<Self> {
        Self::new(Arc::new(MinimumJerk), distance, duration)
    }

    pub fn harmonic(distance: f64, duration: f64) -> Result<Self> {
        Self::new(Arc::new(Harmonic), distance, duration)
    }

    /// Position and velocity at time `t` into the movement.
    pub fn eval(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::Domain {
                t,
                duration: self.duration,
            });
        }
        let s = t / self.duration;
        Ok((
            self.distance * self.shape.position(s),
            self.distance * self.shape.velocity(s) / self.duration,
        ))
    }
}

pub type ShapeBuilder = fn() -> Arc<dyn ReferenceShape>;

pub struct ReferenceRegistry {
    entries: Vec<(&'static str, ShapeBuilder)>,
}

impl ReferenceRegistry {
    pub fn builtin() -> Self {
        Self {
            entries: vec![
                (MinimumJerk::NAME, || Arc::new(MinimumJerk)),
                (Harmonic::NAME, || Arc::new(Harmonic)),
            ],
        }
    }

    pub fn register(&mut self, name: &'static str, build: ShapeBuilder) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, build));
    }

    pub fn build(&self, name: &str) -> Result<Arc<dyn ReferenceShape>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, b)| b())
            .ok_or_else(|| Error::UnknownStrategy {
                kind: "reference trajectory",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }
}

impl Default for ReferenceRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
