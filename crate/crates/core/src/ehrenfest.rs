//! Coherent-state observable `||chi phi(P) u(t)||^2` over the Ehrenfest
//! window, its time integral, and the resulting resolvent lower-bound certificate.

use num_complex::Complex64;

use crate::classical::{PhasePoint, Trapping, TrappingReport};
use crate::error::{LabError, Result};
use crate::quantum::filter::FILTER_TOL;
use crate::quantum::propagate::step_count;
use crate::quantum::{coherent_state, BumpSpec, ChebyshevFilter, Damping, DiscreteOperator, Propagator, WaveFunction};
use crate::resolvent::KOfH;

/// Width of the band next to the Dirichlet walls monitored for reflections.
pub const WALL_BAND: f64 = 2.0;
pub const WALL_TOL: f64 = 1e-6;
pub const DEFAULT_SLACK: f64 = 0.15;

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    /// Symmetric, increasing grid on `[-t_e, t_e]`.
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub t_e: f64,
    /// Largest mass seen in the wall band.
    pub wall_leak: f64,
    pub valid: bool,
}

impl ObservableSeries {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Minimum over `|t| <= t`.
    pub fn min_within(&self, t: f64) -> f64 {
        let tol = 1e-12 * self.t_e.max(1.0);
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(s, _)| s.abs() <= t + tol)
            .map(|(_, &v)| v)
            .fold(f64::INFINITY, f64::min)
    }
}

fn masked_norm_sqr(chi: &[f64], v: &[Complex64], dx: f64) -> f64 {
    dx * chi.iter().zip(v).map(|(c, x)| c * c * x.norm_sqr()).sum::<f64>()
}

fn wall_mass(op: &DiscreteOperator, u: &[Complex64]) -> f64 {
    let edge = match &op.grid {
        Some(g) => g.half_width,
        None => op.x.iter().fold(0.0f64, |m, x| m.max(x.abs())) + op.dx,
    };
    let band: f64 = op
        .x
        .iter()
        .zip(u)
        .filter(|(x, _)| x.abs() > edge - WALL_BAND)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    (op.dx * band).sqrt()
}

/// Records `||chi phi(P) u(t)||^2` on `[-t_e, t_e]` with steps of at most `dt`.
///
/// `phi(P)` commutes with the Cayley propagator, so it is applied once to
/// `u0` and the filtered state is propagated; the bare `u(t)` is propagated
/// alongside for the wall check.
pub fn observable_series(
    op: &DiscreteOperator,
    phi: &BumpSpec,
    u0: &WaveFunction,
    t_e: f64,
    dt: f64,
) -> Result<ObservableSeries> {
    if !(t_e > 0.0 && dt > 0.0) {
        return Err(LabError::Config(format!("observable window needs T_E > 0 and dt > 0, got {t_e}, {dt}")));
    }
    let filter = ChebyshevFilter::auto(phi, op.spectral_bounds, FILTER_TOL, Damping::None)?;
    let filtered = filter.apply(op, u0);
    let steps = step_count(t_e, dt).max(1);
    let tau = t_e / steps as f64;

    let run = |sign: f64| -> Result<(Vec<f64>, f64)> {
        let mut prop = Propagator::new(op, sign * tau)?;
        let mut v = filtered.values.clone();
        let mut u = u0.values.clone();
        let mut values = Vec::with_capacity(steps);
        let mut leak = wall_mass(op, &u);
        for _ in 0..steps {
            prop.step(&mut v);
            prop.step(&mut u);
            values.push(masked_norm_sqr(&op.chi, &v, op.dx));
            leak = leak.max(wall_mass(op, &u));
        }
        Ok((values, leak))
    };
    let (fwd, bwd) = rayon::join(|| run(1.0), || run(-1.0));
    let (fwd, leak_f) = fwd?;
    let (bwd, leak_b) = bwd?;

    let mut times = Vec::with_capacity(2 * steps + 1);
    let mut values = Vec::with_capacity(2 * steps + 1);
    for (k, v) in bwd.iter().enumerate().rev() {
        times.push(-((k + 1) as f64) * tau);
        values.push(*v);
    }
    times.push(0.0);
    values.push(masked_norm_sqr(&op.chi, &filtered.values, op.dx));
    for (k, v) in fwd.iter().enumerate() {
        times.push((k + 1) as f64 * tau);
        values.push(*v);
    }
    let wall_leak = leak_f.max(leak_b);
    Ok(ObservableSeries { times, values, t_e, wall_leak, valid: wall_leak <= WALL_TOL })
}

/// Trapezoid rule over the series window.
pub fn kato_integral(series: &ObservableSeries) -> f64 {
    series
        .times
        .windows(2)
        .zip(series.values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum()
}

/// `|ln h| (1 - eps) / (2 Gamma)`
pub fn ehrenfest_time(h: f64, gamma: f64, eps: f64) -> f64 {
    h.ln().abs() * (1.0 - eps) / (2.0 * gamma)
}

/// `|ln h| (1 - eps)^2 / (8 Gamma)`
pub fn paper_lower_bound(h: f64, gamma: f64, eps: f64) -> f64 {
    h.ln().abs() * (1.0 - eps).powi(2) / (8.0 * gamma)
}

/// Smallest `eps` with `min_{|t| <= T_0 (1 - eps)} value >= 1 - eps`, where the
/// series covers `[-T_0, T_0]`.
pub fn smallest_eps(series: &ObservableSeries) -> f64 {
    let holds = |eps: f64| series.min_within(series.t_e * (1.0 - eps)) >= 1.0 - eps;
    if holds(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    pub eps_cert: f64,
    /// Propagation step; `h / 20` when unset.
    pub dt: Option<f64>,
    pub slack: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { eps_cert: 0.3, dt: None, slack: DEFAULT_SLACK }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EhrenfestCertificate {
    pub h: f64,
    pub gamma: f64,
    pub eps_cert: f64,
    pub t_e: f64,
    pub center: PhasePoint,
    pub min_observable: f64,
    pub kato_integral: f64,
    pub k_measured: f64,
    pub paper_lower_bound: f64,
    pub slack: f64,
    pub kato_ok: bool,
    pub bound_ok: bool,
    /// Smallest `eps` whose window keeps the observable above `1 - eps`.
    pub smallest_eps: f64,
    pub wall_leak: f64,
    /// Set when wall reflections invalidate the series.
    pub void_reason: Option<String>,
}

impl EhrenfestCertificate {
    pub fn is_void(&self) -> bool {
        self.void_reason.is_some()
    }

    pub fn passed(&self) -> bool {
        !self.is_void() && self.kato_ok && self.bound_ok
    }

    pub fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("h", format!("{:.17e}", self.h)),
            ("gamma", format!("{:.17e}", self.gamma)),
            ("eps_cert", format!("{:.17e}", self.eps_cert)),
            ("t_e", format!("{:.17e}", self.t_e)),
            ("center_x", format!("{:.17e}", self.center.x[0])),
            ("center_xi", format!("{:.17e}", self.center.xi[0])),
            ("min_observable", format!("{:.17e}", self.min_observable)),
            ("kato_integral", format!("{:.17e}", self.kato_integral)),
            ("k_measured", format!("{:.17e}", self.k_measured)),
            ("paper_lower_bound", format!("{:.17e}", self.paper_lower_bound)),
            ("slack", format!("{:.17e}", self.slack)),
            ("kato_ok", self.kato_ok.to_string()),
            ("bound_ok", self.bound_ok.to_string()),
            ("smallest_eps", format!("{:.17e}", self.smallest_eps)),
            ("wall_leak", format!("{:.17e}", self.wall_leak)),
            ("void", self.void_reason.clone().unwrap_or_default()),
        ]
    }
}

/// Runs the coherent-state experiment at the trapped point with the largest
/// escape margin and checks the time-integral and final inequalities against `k`.
pub fn certify(
    op: &DiscreteOperator,
    phi: &BumpSpec,
    report: &TrappingReport,
    k: &KOfH,
    opts: &CertifyOptions,
) -> Result<(EhrenfestCertificate, ObservableSeries)> {
    if report.classification != Trapping::Trapping {
        return Err(LabError::Usage("certificate requires a trapping energy; classification is non-trapping".into()));
    }
    let (Some(gamma), Some(center)) = (report.gamma, report.coherent_center()) else {
        return Err(LabError::Usage("trapping report lacks a stability rate or trapped sample".into()));
    };
    let grid = op
        .grid
        .as_ref()
        .ok_or_else(|| LabError::Usage("certificate needs an operator built on a grid".into()))?;
    if !(opts.eps_cert > 0.0 && opts.eps_cert < 1.0) {
        return Err(LabError::Config(format!("eps_cert must lie in (0, 1), got {}", opts.eps_cert)));
    }
    let h = op.h;
    let dt = opts.dt.unwrap_or(h / 20.0);
    let u0 = coherent_state(grid, center)?;

    let t_e = ehrenfest_time(h, gamma, opts.eps_cert);
    let series = observable_series(op, phi, &u0, t_e, dt)?;
    let horizon = observable_series(op, phi, &u0, ehrenfest_time(h, gamma, 0.0), dt)?;

    let min_observable = series.min();
    let kato = kato_integral(&series);
    let bound = paper_lower_bound(h, gamma, opts.eps_cert);
    let void_reason = (!series.valid || !horizon.valid).then(|| {
        format!(
            "wave packet reached the wall band (leak {:.3e} > {WALL_TOL:e}); increase the box half-width L",
            series.wall_leak.max(horizon.wall_leak)
        )
    });
    let usable = void_reason.is_none();
    let cert = EhrenfestCertificate {
        h,
        gamma,
        eps_cert: opts.eps_cert,
        t_e,
        center: center.clone(),
        min_observable,
        kato_integral: kato,
        k_measured: k.k,
        paper_lower_bound: bound,
        slack: opts.slack,
        kato_ok: usable && kato <= 8.0 * k.k * (1.0 + opts.slack),
        bound_ok: usable && bound <= k.k * (1.0 + opts.slack),
        smallest_eps: smallest_eps(&horizon),
        wall_leak: series.wall_leak.max(horizon.wall_leak),
        void_reason,
    };
    Ok((cert, series))
}
