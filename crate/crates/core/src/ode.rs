//! Dormand-Prince 5(4) integrator for two-component linear systems.
//!
//! Solutions of the radial equation grow or decay by many orders of
//! magnitude, so the state is carried as `y * exp(log_scale)` and divided
//! back to unit size whenever it exceeds [`RENORM_THRESHOLD`].

use crate::error::{Error, Result};

pub const RENORM_THRESHOLD: f64 = 1e10;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub type State = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rtol: f64,
    /// Initial step magnitude; the sign is taken from the direction of integration.
    pub first_step: f64,
    /// Upper bound on the step magnitude.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-10, first_step: 1e-3, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

/// Summary of an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    pub end: State,
    pub log_scale: f64,
    pub accepted: usize,
    pub rejected: usize,
    /// Sum over accepted steps of the scaled local error times `rtol`: a
    /// first-order estimate of the relative global error.
    pub error_sum: f64,
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction).
///
/// `observe(t, y, log_scale)` is called at `t0` and after every accepted
/// step; the true solution is `y * exp(log_scale)`.
pub fn integrate<F, O>(
    rhs: F,
    t0: f64,
    t1: f64,
    y0: State,
    log_scale0: f64,
    control: &StepControl,
    mut observe: O,
) -> Result<Integration>
where
    F: Fn(f64, &State) -> State,
    O: FnMut(f64, &State, f64),
{
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut log_scale = log_scale0;
    let max_step = control.max_step.abs();
    let mut h = control.first_step.abs().min(span.abs()).min(max_step) * dir;
    let rtol = control.rtol;
    let mut k1 = rhs(t, &y);
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut error_sum = 0.0;
    observe(t, &y, log_scale);

    while (t1 - t) * dir > 0.0 {
        if accepted + rejected >= control.max_steps {
            return Err(Error::IntegratorFailure(format!("step budget exhausted at t = {t}")));
        }
        let min_step = 1e-14 * t.abs().max(span.abs());
        if h.abs() < min_step {
            return Err(Error::IntegratorFailure(format!("step size underflow at t = {t}")));
        }
        if h.abs() > max_step {
            h = max_step * dir;
        }
        let last = (t + h - t1) * dir >= 0.0;
        if last {
            h = t1 - t;
        } else if (t + 2.0 * h - t1) * dir > 0.0 {
            // Split the remainder evenly rather than leave a sliver step.
            h = 0.5 * (t1 - t);
        }

        let k2 = rhs(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let t_new = if last { t1 } else { t + h };
        let k6 = rhs(
            t + h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t_new, &y_new);

        let floor = 1e-6 * y.iter().chain(y_new.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
        let mut err = 0.0;
        for i in 0..2 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = rtol * (y[i].abs().max(y_new[i].abs()).max(floor));
            let ratio = if sc > 0.0 { e / sc } else { 0.0 };
            err += ratio * ratio;
        }
        let err = (err / 2.0).sqrt();
        if !err.is_finite() {
            return Err(Error::IntegratorFailure(format!("non-finite state near t = {t}")));
        }

        if err <= 1.0 {
            t = t_new;
            y = y_new;
            k1 = k7;
            accepted += 1;
            error_sum += err * rtol;
            let big = y[0].abs().max(y[1].abs());
            if big > RENORM_THRESHOLD {
                y = [y[0] / big, y[1] / big];
                k1 = [k1[0] / big, k1[1] / big];
                log_scale += big.ln();
            }
            observe(t, &y, log_scale);
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }

    Ok(Integration { end: y, log_scale, accepted, rejected, error_sum })
}
