//! Smooth compactly supported cutoffs built from the mollifier
//! `psi(s) = exp(-1 / (1 - s^2))`.

use std::sync::OnceLock;

use crate::error::{LabError, Result};

/// Equals 1 on `plateau`, 0 outside `support`, smooth in between.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpSpec {
    pub plateau: (f64, f64),
    pub support: (f64, f64),
}

impl BumpSpec {
    pub fn new(plateau: (f64, f64), support: (f64, f64)) -> Result<Self> {
        let (c, d) = plateau;
        let (a, b) = support;
        if !(a < c && c <= d && d < b) || ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(LabError::Config(format!(
                "bump needs support [{a}, {b}] strictly containing plateau [{c}, {d}]"
            )));
        }
        Ok(Self { plateau, support })
    }

    /// Symmetric bump: plateau `[-r, r]`, support `[-(r + ramp), r + ramp]`.
    pub fn symmetric(r: f64, ramp: f64) -> Result<Self> {
        Self::new((-r, r), (-r - ramp, r + ramp))
    }

    /// Energy filter centred at `e0`: plateau half-width `eps/2`, support half-width `eps`.
    pub fn energy_window(e0: f64, eps: f64) -> Result<Self> {
        Self::new((e0 - eps / 2.0, e0 + eps / 2.0), (e0 - eps, e0 + eps))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = self.support;
        let (c, d) = self.plateau;
        if x <= a || x >= b {
            0.0
        } else if x >= c && x <= d {
            1.0
        } else if x < c {
            smooth_step((x - a) / (c - a))
        } else {
            smooth_step((b - x) / (b - d))
        }
    }
}

fn mollifier(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

/// 16-point Gauss–Legendre nodes and weights on [-1, 1].
fn gauss_legendre() -> &'static [(f64, f64); 16] {
    static RULE: OnceLock<[(f64, f64); 16]> = OnceLock::new();
    RULE.get_or_init(|| {
        const N: usize = 16;
        let mut rule = [(0.0, 0.0); N];
        for (i, slot) in rule.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=N {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = N as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        rule
    })
}

fn integrate_mollifier(lo: f64, hi: f64, panels: usize) -> f64 {
    let rule = gauss_legendre();
    let width = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = lo + width * (p as f64 + 0.5);
        for &(x, w) in rule {
            total += w * mollifier(mid + 0.5 * width * x);
        }
    }
    total * 0.5 * width
}

fn mollifier_mass() -> f64 {
    static MASS: OnceLock<f64> = OnceLock::new();
    *MASS.get_or_init(|| integrate_mollifier(-1.0, 1.0, 64))
}

/// Smooth transition from 0 at `t <= 0` to 1 at `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    // integrate over the shorter side and use S(t) + S(1 - t) = 1
    if t > 0.5 {
        return 1.0 - smooth_step(1.0 - t);
    }
    let upper = 2.0 * t - 1.0;
    integrate_mollifier(-1.0, upper, 12) / mollifier_mass()
}
