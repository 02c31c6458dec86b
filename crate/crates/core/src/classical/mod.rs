//! Hamiltonian flow of `p(x, xi) = |xi|^2 + V(x)`, trapping detection on an
//! energy shell and the stability rate used for the Ehrenfest horizon.

pub mod ode;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::potentials::PotentialSpec;
use ode::{Control, Dopri5};

/// A point `(x, xi)` of phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        assert_eq!(x.len(), xi.len(), "position and momentum dimensions differ");
        Self { x, xi }
    }

    pub fn new_1d(x: f64, xi: f64) -> Self {
        Self { x: vec![x], xi: vec![xi] }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.x.iter().chain(&self.xi).all(|v| v.is_finite())
    }

    fn to_state(&self) -> Vec<f64> {
        self.x.iter().chain(&self.xi).copied().collect()
    }

    fn from_state(state: &[f64], n: usize) -> Self {
        Self { x: state[..n].to_vec(), xi: state[n..2 * n].to_vec() }
    }
}

/// The principal symbol `|xi|^2 + V(x)`.
pub fn symbol(spec: &PotentialSpec, rho: &PhasePoint) -> f64 {
    rho.xi.iter().map(|v| v * v).sum::<f64>() + spec.value_nd(&rho.x)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Increasing sample times (the endpoint is `t_final`).
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// First time with `|x(t)| > R_escape`, when an escape radius was given.
    pub escape_time: Option<f64>,
    /// `max |p(rho(t)) - p(rho(0))|` over the accepted steps.
    pub energy_drift: f64,
}

fn hamilton_rhs(spec: &PotentialSpec, n: usize) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    move |_, y, dy| {
        let x = &y[..n];
        if n == 1 {
            dy[0] = 2.0 * y[1];
            dy[1] = -spec.d1(y[0]);
            return;
        }
        let grad = spec.gradient(x);
        for i in 0..n {
            dy[i] = 2.0 * y[n + i];
            dy[n + i] = -grad[i];
        }
    }
}

/// Local tolerances tried before giving up on the energy-drift budget.
const LOCAL_TOL_FACTORS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Solves `x' = 2 xi, xi' = -grad V(x)` on `[0, t_final]` (or `[t_final, 0]`).
pub fn flow(spec: &PotentialSpec, rho0: &PhasePoint, t_final: f64, tol: f64) -> Result<Trajectory> {
    flow_with_escape(spec, rho0, t_final, tol, None)
}

/// Like [`flow`], additionally recording the first exit from `|x| <= r_escape`.
pub fn flow_with_escape(
    spec: &PotentialSpec,
    rho0: &PhasePoint,
    t_final: f64,
    tol: f64,
    r_escape: Option<f64>,
) -> Result<Trajectory> {
    if !(tol > 0.0) {
        return Err(LabError::Config("flow tolerance must be positive".into()));
    }
    if !rho0.is_finite() || !t_final.is_finite() {
        return Err(LabError::Config("flow needs a finite initial point and time".into()));
    }
    let n = rho0.dim();
    let e_init = symbol(spec, rho0);
    let mut last_drift = 0.0;
    for factor in LOCAL_TOL_FACTORS {
        let mut state = rho0.to_state();
        let mut times = Vec::new();
        let mut points = Vec::new();
        let mut drift = 0.0f64;
        let mut escape_time = None;
        Dopri5::new(tol * factor).integrate(hamilton_rhs(spec, n), 0.0, &mut state, t_final, |t, y| {
            let p = PhasePoint::from_state(y, n);
            drift = drift.max((symbol(spec, &p) - e_init).abs());
            if let Some(r) = r_escape {
                if escape_time.is_none() && norm(&p.x) > r {
                    escape_time = Some(t);
                }
            }
            times.push(t);
            points.push(p);
            Control::Continue
        })?;
        if drift <= tol {
            if t_final < 0.0 {
                times.reverse();
                points.reverse();
            }
            return Ok(Trajectory { times, points, escape_time, energy_drift: drift });
        }
        last_drift = drift;
    }
    Err(LabError::Integration {
        t: t_final,
        reason: format!("energy drift {last_drift:.3e} exceeds tolerance {tol:.1e}"),
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Outcome of the finite-time trapping test for one initial point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointClass {
    Trapped,
    /// Leaves the ball forward in time, stays bounded backward.
    EscapedForward,
    /// Leaves the ball backward in time, stays bounded forward.
    EscapedBackward,
    EscapedBoth,
}

impl PointClass {
    pub fn name(self) -> &'static str {
        match self {
            PointClass::Trapped => "Trapped",
            PointClass::EscapedForward => "EscapedForward",
            PointClass::EscapedBackward => "EscapedBackward",
            PointClass::EscapedBoth => "EscapedBoth",
        }
    }
}

/// Finite proxies for the trapped set and the integrator settings.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalParams {
    pub r_escape: f64,
    pub t_max: f64,
    pub tol: f64,
    pub shell_tol: f64,
    pub gamma_floor: f64,
    pub t_lyap: f64,
    pub search_box: (f64, f64),
    pub grid_count: usize,
}

impl Default for ClassicalParams {
    fn default() -> Self {
        Self {
            r_escape: 15.0,
            t_max: 200.0,
            tol: 1e-10,
            shell_tol: 1e-9,
            gamma_floor: 0.25,
            t_lyap: 100.0,
            search_box: (-10.0, 10.0),
            grid_count: 401,
        }
    }
}

/// One time direction of [`classify_point`]: `(escaped, max |x| seen)`.
fn run_direction(
    spec: &PotentialSpec,
    rho0: &PhasePoint,
    e0: f64,
    params: &ClassicalParams,
    direction: f64,
) -> Result<(bool, f64)> {
    let n = rho0.dim();
    let mut state = rho0.to_state();
    let mut escaped = false;
    let mut excursion = 0.0f64;
    let mut drift = 0.0f64;
    let e_init = symbol(spec, rho0);
    Dopri5::new(params.tol * LOCAL_TOL_FACTORS[1]).integrate(
        hamilton_rhs(spec, n),
        0.0,
        &mut state,
        direction * params.t_max,
        |_, y| {
            let p = PhasePoint::from_state(y, n);
            drift = drift.max((symbol(spec, &p) - e_init).abs());
            let r = norm(&p.x);
            excursion = excursion.max(r);
            if r > params.r_escape || (n == 1 && monotone_escape(spec, &p, e0, direction)) {
                escaped = true;
                return Control::Stop;
            }
            Control::Continue
        },
    )?;
    if drift > params.tol && !escaped {
        // bounded orbits must honour the drift budget; escaping ones are decided anyway
        let traj = flow(spec, rho0, direction * params.t_max, params.tol)?;
        let far = traj.points.iter().map(|p| norm(&p.x)).fold(0.0, f64::max);
        return Ok((far > params.r_escape, far));
    }
    Ok((escaped, excursion))
}

/// In 1D an outward-moving point with `sup_{|y| >= |x|} V(y) < E0` never turns.
fn monotone_escape(spec: &PotentialSpec, p: &PhasePoint, e0: f64, direction: f64) -> bool {
    let (x, xi) = (p.x[0], p.xi[0]);
    x * xi * direction > 0.0 && e0 - spec.outer_sup(x) > 1e-6
}

/// Classifies `rho0` by whether its orbit stays in `|x| <= R_escape` for
/// `|t| <= T_max`. Returns the class and the largest `|x|` visited.
pub fn classify_point(
    spec: &PotentialSpec,
    rho0: &PhasePoint,
    e0: f64,
    params: &ClassicalParams,
) -> Result<(PointClass, f64)> {
    let energy = symbol(spec, rho0);
    if (energy - e0).abs() > params.shell_tol {
        return Err(LabError::Usage(format!(
            "point is off the energy shell: |p - E0| = {:.3e}",
            (energy - e0).abs()
        )));
    }
    let (fwd, ex_f) = run_direction(spec, rho0, e0, params, 1.0)?;
    let (bwd, ex_b) = run_direction(spec, rho0, e0, params, -1.0)?;
    let class = match (fwd, bwd) {
        (false, false) => PointClass::Trapped,
        (true, false) => PointClass::EscapedForward,
        (false, true) => PointClass::EscapedBackward,
        (true, true) => PointClass::EscapedBoth,
    };
    Ok((class, ex_f.max(ex_b)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trapping {
    NonTrapping,
    Trapping,
}

impl Trapping {
    pub fn name(self) -> &'static str {
        match self {
            Trapping::NonTrapping => "NonTrapping",
            Trapping::Trapping => "Trapping",
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrappingReport {
    pub energy: f64,
    pub classification: Trapping,
    /// Sampled points of the trapped set.
    pub trapped_samples: Vec<PhasePoint>,
    /// Largest `|x|` reached by each trapped sample within `T_max`.
    pub excursions: Vec<f64>,
    /// Points bounded in one time direction only.
    pub semi_trapped: Vec<(PhasePoint, PointClass)>,
    /// `[min x, max x]` of the trapped samples, widened by one scan cell.
    pub spatial_hull: Option<(f64, f64)>,
    pub gamma: Option<f64>,
    pub r_escape: f64,
}

impl TrappingReport {
    /// Trapped sample farthest from the escape boundary; ties go to smallest `|x|`.
    pub fn coherent_center(&self) -> Option<&PhasePoint> {
        let margin = |i: usize| self.r_escape - self.excursions[i];
        (0..self.trapped_samples.len())
            .min_by(|&a, &b| {
                let (ma, mb) = (margin(a), margin(b));
                if (ma - mb).abs() > 1e-9 {
                    mb.partial_cmp(&ma).unwrap()
                } else {
                    let xa = norm(&self.trapped_samples[a].x);
                    let xb = norm(&self.trapped_samples[b].x);
                    xa.partial_cmp(&xb).unwrap()
                }
            })
            .map(|i| &self.trapped_samples[i])
    }
}

/// Scans `x` over the search box on the shell `p = E0` and collects the
/// points whose orbits stay bounded in both time directions.
pub fn sample_trapped_set(spec: &PotentialSpec, e0: f64, params: &ClassicalParams) -> Result<TrappingReport> {
    if !(e0 > 0.0) {
        return Err(LabError::Config("E0 must be positive".into()));
    }
    let (lo, hi) = params.search_box;
    let count = params.grid_count.max(2);
    let cell = (hi - lo) / (count - 1) as f64;
    let mut candidates = Vec::new();
    for k in 0..count {
        let x = lo + cell * k as f64;
        let v = spec.value(x);
        if v > e0 {
            continue;
        }
        let xi = (e0 - v).sqrt();
        candidates.push(PhasePoint::new_1d(x, xi));
        if xi > 0.0 {
            candidates.push(PhasePoint::new_1d(x, -xi));
        }
    }

    let verdicts: Vec<Result<(PointClass, f64)>> = candidates
        .par_iter()
        .map(|rho| classify_point(spec, rho, e0, params))
        .collect();

    let mut trapped_samples = Vec::new();
    let mut excursions = Vec::new();
    let mut semi_trapped = Vec::new();
    for (rho, verdict) in candidates.into_iter().zip(verdicts) {
        let (class, excursion) = verdict?;
        match class {
            PointClass::Trapped => {
                trapped_samples.push(rho);
                excursions.push(excursion);
            }
            PointClass::EscapedForward | PointClass::EscapedBackward => semi_trapped.push((rho, class)),
            PointClass::EscapedBoth => {}
        }
    }

    if trapped_samples.is_empty() {
        return Ok(TrappingReport {
            energy: e0,
            classification: Trapping::NonTrapping,
            trapped_samples,
            excursions,
            semi_trapped,
            spatial_hull: None,
            gamma: None,
            r_escape: params.r_escape,
        });
    }
    let xmin = trapped_samples.iter().map(|p| p.x[0]).fold(f64::INFINITY, f64::min);
    let xmax = trapped_samples.iter().map(|p| p.x[0]).fold(f64::NEG_INFINITY, f64::max);
    let gamma = estimate_gamma(spec, &trapped_samples, params)?;
    Ok(TrappingReport {
        energy: e0,
        classification: Trapping::Trapping,
        trapped_samples,
        excursions,
        semi_trapped,
        spatial_hull: Some((xmin - cell, xmax + cell)),
        gamma: Some(gamma),
        r_escape: params.r_escape,
    })
}

fn is_fixed_point(spec: &PotentialSpec, rho: &PhasePoint) -> bool {
    let grad = spec.gradient(&rho.x);
    rho.xi.iter().all(|v| v.abs() <= 1e-12) && grad.iter().all(|g| g.abs() <= 1e-12)
}

/// Largest real part of the eigenvalues of `[[0, 2 Id], [-Hess V, 0]]`.
///
/// Eigenvalues satisfy `lambda^2 = -2 mu` for each Hessian eigenvalue `mu`.
pub fn linearized_rate(spec: &PotentialSpec, x: &[f64]) -> f64 {
    let hess = spec.hessian(x);
    let eig = SymmetricEigen::new(hess).eigenvalues;
    eig.iter().map(|&mu| (-2.0 * mu).max(0.0).sqrt()).fold(0.0, f64::max)
}

/// Flow of `rho0` together with its tangent map `J(t)`, `J(0) = Id`.
pub fn tangent_flow(
    spec: &PotentialSpec,
    rho0: &PhasePoint,
    t: f64,
    tol: f64,
) -> Result<(PhasePoint, DMatrix<f64>)> {
    let n = rho0.dim();
    let m = 2 * n;
    let mut state = rho0.to_state();
    state.extend(DMatrix::<f64>::identity(m, m).iter());
    Dopri5::new(tol).integrate(tangent_rhs(spec, n), 0.0, &mut state, t, |_, _| Control::Continue)?;
    let point = PhasePoint::from_state(&state, n);
    let j = DMatrix::from_row_slice(m, m, &state[m..]);
    Ok((point, j))
}

fn tangent_rhs(spec: &PotentialSpec, n: usize) -> impl Fn(f64, &[f64], &mut [f64]) + '_ {
    let m = 2 * n;
    move |_, y, dy| {
        hamilton_rhs(spec, n)(0.0, &y[..m], &mut dy[..m]);
        let hess = spec.hessian(&y[..n]);
        let j = &y[m..];
        let dj = &mut dy[m..];
        // rows 0..n: 2 * (xi rows of J); rows n..2n: -H * (x rows of J)
        for c in 0..m {
            for r in 0..n {
                dj[r * m + c] = 2.0 * j[(n + r) * m + c];
                let mut acc = 0.0;
                for k in 0..n {
                    acc += hess[(r, k)] * j[k * m + c];
                }
                dj[(n + r) * m + c] = -acc;
            }
        }
    }
}

/// `(1/T) ln ||J(T)||` with periodic renormalization of the tangent map.
pub fn finite_time_lyapunov(spec: &PotentialSpec, rho0: &PhasePoint, t_lyap: f64, tol: f64) -> Result<f64> {
    let n = rho0.dim();
    let m = 2 * n;
    let mut state = rho0.to_state();
    state.extend(DMatrix::<f64>::identity(m, m).iter());
    let mut t = 0.0;
    let mut log_scale = 0.0;
    while t < t_lyap {
        let reached = Dopri5::new(tol).integrate(tangent_rhs(spec, n), t, &mut state, t_lyap, |_, y| {
            if y[m..].iter().fold(0.0f64, |a, v| a.max(v.abs())) > 1e50 {
                Control::Stop
            } else {
                Control::Continue
            }
        })?;
        let j = DMatrix::from_row_slice(m, m, &state[m..]);
        let s = j.amax();
        if s > 1e50 {
            log_scale += s.ln();
            for v in &mut state[m..] {
                *v /= s;
            }
        }
        t = reached;
    }
    let j = DMatrix::from_row_slice(m, m, &state[m..]);
    let top = j.singular_values().max();
    Ok((log_scale + top.ln()) / t_lyap)
}

/// Stability rate over the trapped samples, floored at `params.gamma_floor`.
pub fn estimate_gamma(spec: &PotentialSpec, samples: &[PhasePoint], params: &ClassicalParams) -> Result<f64> {
    if samples.is_empty() {
        return Err(LabError::Usage("estimate_gamma needs at least one trapped sample".into()));
    }
    let rates: Vec<Result<f64>> = samples
        .par_iter()
        .map(|rho| {
            if is_fixed_point(spec, rho) {
                Ok(linearized_rate(spec, &rho.x))
            } else {
                finite_time_lyapunov(spec, rho, params.t_lyap, params.tol)
            }
        })
        .collect();
    let mut raw = 0.0f64;
    for r in rates {
        raw = raw.max(r?);
    }
    Ok(raw.max(params.gamma_floor))
}
