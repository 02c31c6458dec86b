//! Crank–Nicolson propagation of `i h du/dt = P u` and Gaussian coherent states.

use num_complex::Complex64;

use super::{DiscreteOperator, GridSpec, WaveFunction};
use crate::classical::PhasePoint;
use crate::error::{LabError, Result};
use crate::linalg::TridiagLu;

/// One Cayley step `u <- (I + i dt P / 2h)^{-1} (I - i dt P / 2h) u`.
///
/// A negative `dt` steps backward, i.e. applies `e^{+i |dt| P / h}` to second order.
#[derive(Clone, Debug)]
pub struct Propagator {
    lu: TridiagLu,
    tau: f64,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    pub fn new(op: &DiscreteOperator, dt: f64) -> Result<Self> {
        let tau = dt / (2.0 * op.h);
        let i = Complex64::i();
        let diag: Vec<Complex64> = op.diag.iter().map(|&d| 1.0 + i * tau * d).collect();
        let off: Vec<Complex64> = op.offdiag.iter().map(|&o| i * tau * o).collect();
        let lu = TridiagLu::factor_symmetric(&diag, &off)?;
        Ok(Self {
            lu,
            tau,
            diag: op.diag.clone(),
            offdiag: op.offdiag.clone(),
            scratch: vec![Complex64::new(0.0, 0.0); op.len()],
        })
    }

    pub fn step(&mut self, u: &mut [Complex64]) {
        let n = u.len();
        let mi = -Complex64::i() * self.tau;
        let s = &mut self.scratch;
        for j in 0..n {
            let mut pu = u[j] * self.diag[j];
            if j > 0 {
                pu += u[j - 1] * self.offdiag[j - 1];
            }
            if j + 1 < n {
                pu += u[j + 1] * self.offdiag[j];
            }
            s[j] = u[j] + mi * pu;
        }
        self.lu.solve_in_place(s);
        u.copy_from_slice(s);
    }
}

/// Number of equal steps of size at most `dt` covering `|t|`.
pub fn step_count(t: f64, dt: f64) -> usize {
    ((t.abs() / dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize
}

/// Propagates `u0` by time `t_final` (negative for backward) with steps of at most `dt`.
pub fn propagate(op: &DiscreteOperator, u0: &WaveFunction, t_final: f64, dt: f64) -> Result<WaveFunction> {
    if !(dt > 0.0) {
        return Err(LabError::Config("propagation step dt must be positive".into()));
    }
    let steps = step_count(t_final, dt);
    let mut u = u0.clone();
    if steps == 0 {
        return Ok(u);
    }
    let mut prop = Propagator::new(op, t_final / steps as f64)?;
    for _ in 0..steps {
        prop.step(&mut u.values);
    }
    Ok(u)
}

/// Normalized Gaussian `(pi h)^{-1/4} exp(i xi0 (x - x0) / h - (x - x0)^2 / 2h)`.
pub fn coherent_state(grid: &GridSpec, rho0: &PhasePoint) -> Result<WaveFunction> {
    if rho0.dim() != 1 {
        return Err(LabError::Config("coherent states are one-dimensional".into()));
    }
    let (x0, xi0) = (rho0.x[0], rho0.xi[0]);
    let h = grid.h;
    let guard = grid.half_width - 5.0 * h.sqrt();
    if x0.abs() > guard {
        return Err(LabError::Config(format!(
            "coherent state centre {x0} too close to the wall (|x0| must be <= {guard:.4})"
        )));
    }
    let amp = (std::f64::consts::PI * h).powf(-0.25);
    let values = grid
        .xs()
        .iter()
        .map(|&x| {
            let d = x - x0;
            let phase = Complex64::new(-d * d / (2.0 * h), xi0 * d / h);
            amp * phase.exp()
        })
        .collect();
    let mut u = WaveFunction::new(values, grid.dx());
    u.normalize();
    Ok(u)
}
