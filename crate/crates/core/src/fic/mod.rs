//! Fractal impedance controller.
//!
//! While the error grows (divergence) the effort follows the force profile.
//! Once it starts shrinking (convergence) the effort becomes the linear
//! spring through the midpoint of the largest excursion, which brings the
//! plant back to zero error with zero velocity. A zero crossing starts a
//! fresh divergence.

mod profile;

pub use profile::{
    ForceProfile, LinearSaturated, ProfileParams, ProfileRegistry, TanhSaturated, TwoPlateau,
    TANH_KNEE, TANH_WIDTH,
};

/// Dead-band on `err·d_err` for detecting the divergence turning point.
pub const PHASE_DEADBAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Phase {
    #[default]
    Divergence,
    Convergence,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FicState {
    pub phase: Phase,
    /// Largest error magnitude of the current excursion.
    pub x_max: f64,
    /// Side of zero the current excursion lives on (±1, 0 when idle).
    pub sign: f64,
}

impl FicState {
    /// Fresh divergence from the given error.
    pub fn diverging_from(err: f64) -> Self {
        Self {
            phase: Phase::Divergence,
            x_max: err.abs(),
            sign: sign_of(err),
        }
    }
}

fn sign_of(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// One controller update. `err` is measured as (plant − setpoint) and the
/// returned effort pushes the plant towards the setpoint.
pub fn fic_effort(profile: &dyn ForceProfile, state: &FicState, err: f64, d_err: f64) -> (f64, FicState) {
    let mut s = *state;
    let side = sign_of(err);

    if err == 0.0 || (s.sign != 0.0 && side != s.sign) {
        s = FicState::diverging_from(err);
    }

    match s.phase {
        Phase::Divergence => {
            s.x_max = s.x_max.max(err.abs());
            s.sign = side;
            if err * d_err < -PHASE_DEADBAND && s.x_max > 0.0 {
                s.phase = Phase::Convergence;
            }
        }
        Phase::Convergence => {
            // strict test: near zero error the product is far below the dead-band
            if err.abs() > s.x_max || err * d_err > 0.0 {
                s = FicState::diverging_from(err);
            }
        }
    }

    let effort = match s.phase {
        Phase::Divergence => -profile.force(err),
        Phase::Convergence => convergence_effort(profile, &s, err),
    };
    (effort, s)
}

fn convergence_effort(profile: &dyn ForceProfile, s: &FicState, err: f64) -> f64 {
    if s.x_max == 0.0 {
        return 0.0;
    }
    let stiffness = 2.0 * profile.magnitude(s.x_max) / s.x_max;
    -stiffness * (err - s.sign * s.x_max / 2.0)
}

/// Net work `∮ effort·d(err)` injected by the controller over a trace of
/// `(err, effort)` pairs, by the trapezoidal rule.
pub fn fic_energy_audit(trace: &[(f64, f64)]) -> f64 {
    trace
        .windows(2)
        .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
        .sum()
}

/// Runs the controller over a prescribed error trace sampled at `dt` and
/// returns the `(err, effort)` pairs. The rate is a backward difference.
pub fn drive_trace(profile: &dyn ForceProfile, errors: &[f64], dt: f64) -> Vec<(f64, f64)> {
    let mut state = FicState::default();
    let mut prev = errors.first().copied().unwrap_or(0.0);
    errors
        .iter()
        .map(|&e| {
            let (effort, next) = fic_effort(profile, &state, e, (e - prev) / dt);
            state = next;
            prev = e;
            (e, effort)
        })
        .collect()
}

/// Piecewise-linear excursion through the given turning points, starting
/// and ending at zero, all on one side.
pub fn excursion(turns: &[f64], samples_per_leg: usize) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend_from_slice(turns);
    pts.push(0.0);
    let mut out = vec![0.0];
    for w in pts.windows(2) {
        for i in 1..=samples_per_leg {
            out.push(w[0] + (w[1] - w[0]) * i as f64 / samples_per_leg as f64);
        }
    }
    out
}
