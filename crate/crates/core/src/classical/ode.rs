//! Dormand–Prince 5(4) embedded Runge–Kutta pair with step-size control.

use crate::error::{LabError, Result};

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// What the observer wants after an accepted step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, max_steps: 50_000_000 }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
    ///
    /// `observe` is called with the initial state and after every accepted
    /// step; returning [`Control::Stop`] ends the integration early. Returns
    /// the final time reached.
    pub fn integrate<F, O>(&self, f: F, t0: f64, y: &mut [f64], t_end: f64, mut observe: O) -> Result<f64>
    where
        F: Fn(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64]) -> Control,
    {
        let n = y.len();
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let span = (t_end - t0).abs();
        if observe(t0, y) == Control::Stop || span == 0.0 {
            return Ok(t0);
        }

        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut stage = vec![0.0; n];
        let mut y_new = vec![0.0; n];

        let mut t = t0;
        f(t, y, &mut k1);
        let mut step = self.initial_step(y, &k1, span);
        let mut steps = 0usize;

        while (t_end - t) * dir > 0.0 {
            steps += 1;
            if steps > self.max_steps {
                return Err(LabError::Integration { t, reason: "step budget exhausted".into() });
            }
            let remaining = (t_end - t).abs();
            let last = step >= remaining;
            let hs = if last { remaining } else { step } * dir;
            let min_step = 16.0 * f64::EPSILON * t.abs().max(span);
            if hs.abs() < min_step && !last {
                return Err(LabError::Integration {
                    t,
                    reason: format!("step size underflow (h = {:.3e})", hs.abs()),
                });
            }

            for i in 0..n {
                stage[i] = y[i] + hs * A21 * k1[i];
            }
            f(t + C2 * hs, &stage, &mut k2);
            for i in 0..n {
                stage[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
            }
            f(t + C3 * hs, &stage, &mut k3);
            for i in 0..n {
                stage[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            f(t + C4 * hs, &stage, &mut k4);
            for i in 0..n {
                stage[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            f(t + C5 * hs, &stage, &mut k5);
            for i in 0..n {
                stage[i] = y[i]
                    + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            f(t + hs, &stage, &mut k6);
            for i in 0..n {
                y_new[i] = y[i]
                    + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            f(t + hs, &y_new, &mut k7);

            let mut err = 0.0;
            for i in 0..n {
                let e = hs
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let scale = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / scale) * (e / scale);
            }
            let err = (err / n as f64).sqrt();
            if !err.is_finite() {
                return Err(LabError::Integration { t, reason: "non-finite state".into() });
            }

            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t_end } else { t + hs };
                y.copy_from_slice(&y_new);
                std::mem::swap(&mut k1, &mut k7);
                if observe(t, y) == Control::Stop {
                    return Ok(t);
                }
                if !last {
                    step = hs.abs() * factor;
                }
            } else {
                step = hs.abs() * factor.min(1.0);
            }
        }
        Ok(t)
    }

    fn initial_step(&self, y: &[f64], dy: &[f64], span: f64) -> f64 {
        let n = y.len() as f64;
        let mut d0 = 0.0;
        let mut d1 = 0.0;
        for (yi, di) in y.iter().zip(dy) {
            let sc = self.atol + self.rtol * yi.abs();
            d0 += (yi / sc).powi(2);
            d1 += (di / sc).powi(2);
        }
        let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).max(1e-12 * span.max(1.0))
    }
}
