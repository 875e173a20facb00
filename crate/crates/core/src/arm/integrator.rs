//! Dormand–Prince 5(4) embedded Runge–Kutta with step-size control.

use crate::error::{Error, Result};

use super::{forward_acceleration, ArmParams, ArmState, Joints, Wrench2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub max_step: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            min_step: 1e-5,
            max_step: 1e-3,
        }
    }
}

type Y = [f64; 6];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

/// Plant integrator. Torques and the external wrench are held constant over
/// each call; the step size found in one call seeds the next.
#[derive(Debug, Clone)]
pub struct StepDynamics {
    pub options: IntegratorOptions,
    next_step: f64,
}

impl Default for StepDynamics {
    fn default() -> Self {
        Self::new(IntegratorOptions::default())
    }
}

impl StepDynamics {
    pub fn new(options: IntegratorOptions) -> Self {
        Self {
            next_step: options.max_step,
            options,
        }
    }

    /// Advances `state` by exactly `dt_target` seconds.
    pub fn step(
        &mut self,
        params: &ArmParams,
        state: &ArmState,
        tau: &Joints,
        external: &Wrench2,
        dt_target: f64,
    ) -> Result<ArmState> {
        let opts = self.options;
        let rhs = |y: &Y| -> Y {
            let q = [y[0], y[1], y[2]];
            let dq = [y[3], y[4], y[5]];
            let a = forward_acceleration(params, &q, &dq, tau, external);
            [dq[0], dq[1], dq[2], a[0], a[1], a[2]]
        };

        let mut y: Y = [
            state.q[0], state.q[1], state.q[2], state.dq[0], state.dq[1], state.dq[2],
        ];
        let mut elapsed = 0.0;
        let mut h = self.next_step.clamp(opts.min_step, opts.max_step);
        let mut k = [[0.0; 6]; 7];
        k[0] = rhs(&y);

        while dt_target - elapsed > 1e-15 {
            let remaining = dt_target - elapsed;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };

            for s in 1..7 {
                let mut ys = y;
                for (i, v) in ys.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * k[j][i];
                    }
                    *v += h_try * acc;
                }
                k[s] = rhs(&ys);
            }
            let mut y5 = y;
            let mut err = 0.0f64;
            for i in 0..6 {
                let mut s5 = 0.0;
                let mut s4 = 0.0;
                for s in 0..7 {
                    s5 += B5[s] * k[s][i];
                    s4 += B4[s] * k[s][i];
                }
                y5[i] = y[i] + h_try * s5;
                let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
                err = err.max((h_try * (s5 - s4)).abs() / scale);
            }

            if !err.is_finite() {
                return Err(Error::Integration {
                    t: state.t + elapsed,
                    step: h_try,
                });
            }

            let factor = if err == 0.0 {
                MAX_SCALE
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
            };

            if err <= 1.0 {
                elapsed += h_try;
                y = y5;
                // first-same-as-last: stage 7 was evaluated at y5
                k[0] = k[6];
                if !last {
                    h = (h_try * factor).clamp(opts.min_step, opts.max_step);
                }
            } else {
                if h_try <= opts.min_step {
                    return Err(Error::Integration {
                        t: state.t + elapsed,
                        step: h_try,
                    });
                }
                h = (h_try * factor.min(1.0)).max(opts.min_step);
            }
        }

        self.next_step = h;
        Ok(ArmState {
            q: [y[0], y[1], y[2]],
            dq: [y[3], y[4], y[5]],
            t: state.t + dt_target,
        })
    }
}
