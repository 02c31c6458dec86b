//! Finite-difference realization of `P = -h^2 Laplacian + V` on `[-L, L]`
//! with Dirichlet walls, plus the cutoff, absorbing potential, energy filter,
//! propagator and coherent states built on it.

pub mod bump;
pub mod filter;
pub mod propagate;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::linalg::{cdot, cnorm, sym_tridiag_apply};
use crate::potentials::PotentialSpec;

pub use bump::BumpSpec;
pub use filter::{apply_filter, dense_filter, ChebyshevFilter, Damping};
pub use propagate::{coherent_state, propagate, Propagator};

/// Uniform grid of `points` interior nodes on `[-half_width, half_width]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub half_width: f64,
    pub points: usize,
    pub h: f64,
    /// Largest energy that must be resolved (`E0 + eps`).
    pub max_energy: f64,
    pub points_per_wavelength: f64,
}

pub const MIN_POINTS: usize = 16;

impl GridSpec {
    pub fn new(half_width: f64, points: usize, h: f64, max_energy: f64, points_per_wavelength: f64) -> Result<Self> {
        if !(half_width > 0.0 && h > 0.0 && max_energy > 0.0) {
            return Err(LabError::Config("grid needs L > 0, h > 0 and a positive energy".into()));
        }
        if points_per_wavelength < 8.0 {
            return Err(LabError::Config(format!(
                "points_per_wavelength must be >= 8, got {points_per_wavelength}"
            )));
        }
        let grid = Self { half_width, points, h, max_energy, points_per_wavelength };
        let minimal = grid.minimal_points();
        if points < minimal {
            return Err(LabError::Config(format!(
                "grid under-resolved: N = {points} but at least N = {minimal} is needed \
                 (h = {h}, L = {half_width}, {points_per_wavelength} points per wavelength)"
            )));
        }
        Ok(grid)
    }

    /// Smallest grid meeting the resolution rule.
    pub fn resolved(half_width: f64, h: f64, max_energy: f64, points_per_wavelength: f64) -> Result<Self> {
        let probe = Self { half_width, points: 0, h, max_energy, points_per_wavelength };
        Self::new(half_width, probe.minimal_points(), h, max_energy, points_per_wavelength)
    }

    fn max_dx(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.h / self.max_energy.sqrt() / self.points_per_wavelength
    }

    pub fn minimal_points(&self) -> usize {
        let cells = (2.0 * self.half_width / self.max_dx()).ceil() as usize;
        cells.saturating_sub(1).max(MIN_POINTS)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / (self.points + 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + (j + 1) as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x(j)).collect()
    }
}

/// Absorbing potential parameters: quartic ramp starting at `|x| = r_a`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapSpec {
    pub r_a: f64,
    pub eta: f64,
}

impl Default for CapSpec {
    fn default() -> Self {
        Self { r_a: 14.0, eta: 1.0 }
    }
}

/// `W(x) = eta ((|x| - R_a) / (L - R_a))^4` for `|x| > R_a`, else 0.
pub fn build_cap(grid: &GridSpec, r_a: f64, eta: f64) -> Result<Vec<f64>> {
    if !(r_a > 0.0 && r_a < grid.half_width) {
        return Err(LabError::Config(format!(
            "CAP start R_a = {r_a} must lie in (0, L = {})",
            grid.half_width
        )));
    }
    let l = grid.half_width;
    Ok(grid.xs().iter().map(|&x| cap_value(x, r_a, l, eta)).collect())
}

fn cap_value(x: f64, r_a: f64, l: f64, eta: f64) -> f64 {
    let ax = x.abs();
    if ax <= r_a {
        0.0
    } else {
        eta * ((ax - r_a) / (l - r_a)).powi(4)
    }
}

/// Grid function with norm `||u||^2 = dx sum |u_j|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction {
    pub values: Vec<Complex64>,
    pub dx: f64,
}

impl WaveFunction {
    pub fn new(values: Vec<Complex64>, dx: f64) -> Self {
        Self { values, dx }
    }

    pub fn zeros(n: usize, dx: f64) -> Self {
        Self { values: vec![Complex64::new(0.0, 0.0); n], dx }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        cnorm(&self.values) * self.dx.sqrt()
    }

    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        cdot(&self.values, &other.values) * self.dx
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for v in &mut self.values {
                *v /= n;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `sum dx x |u|^2`
    pub fn position_mean(&self, xs: &[f64]) -> f64 {
        self.dx * self.values.iter().zip(xs).map(|(u, x)| x * u.norm_sqr()).sum::<f64>()
    }

    pub fn position_variance(&self, xs: &[f64]) -> f64 {
        let m = self.position_mean(xs);
        self.dx * self.values.iter().zip(xs).map(|(u, x)| (x - m).powi(2) * u.norm_sqr()).sum::<f64>()
    }

    /// `Re <u, -i h d/dx u>` with central differences and Dirichlet ends.
    pub fn momentum_mean(&self, h: f64) -> f64 {
        let n = self.values.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            let left = if j > 0 { self.values[j - 1] } else { Complex64::new(0.0, 0.0) };
            let right = if j + 1 < n { self.values[j + 1] } else { Complex64::new(0.0, 0.0) };
            let du = (right - left) / (2.0 * self.dx);
            acc += self.values[j].conj() * (-Complex64::i() * h * du);
        }
        (acc * self.dx).re
    }
}

/// Symmetric tridiagonal `P` with absorbing potential and cutoff data.
#[derive(Clone, Debug)]
pub struct DiscreteOperator {
    pub grid: Option<GridSpec>,
    pub x: Vec<f64>,
    pub h: f64,
    pub dx: f64,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// Absorbing potential `W >= 0`.
    pub cap: Vec<f64>,
    /// Cutoff `chi` sampled on the grid.
    pub chi: Vec<f64>,
    pub chi_spec: Option<BumpSpec>,
    pub spectral_bounds: (f64, f64),
}

impl DiscreteOperator {
    /// Raw constructor for hand-made operators (diagonal toys, scalar cases).
    ///
    /// Spectral bounds come from Gershgorin discs of the given entries.
    pub fn from_parts(diag: Vec<f64>, offdiag: Vec<f64>, cap: Vec<f64>, chi: Vec<f64>, h: f64, dx: f64) -> Result<Self> {
        let n = diag.len();
        if n == 0 || offdiag.len() + 1 != n || cap.len() != n || chi.len() != n {
            return Err(LabError::Config("inconsistent operator part lengths".into()));
        }
        if cap.iter().any(|&w| w < 0.0) {
            return Err(LabError::Config("absorbing potential must be nonnegative".into()));
        }
        let spectral_bounds = gershgorin(&diag, &offdiag);
        let x = (0..n).map(|j| j as f64 * dx).collect();
        Ok(Self { grid: None, x, h, dx, diag, offdiag, cap, chi, chi_spec: None, spectral_bounds })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `P u` (the absorbing potential is not included).
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); u.len()];
        sym_tridiag_apply(&self.diag, &self.offdiag, u, &mut out);
        out
    }

    pub fn apply_into(&self, u: &[Complex64], out: &mut [Complex64]) {
        sym_tridiag_apply(&self.diag, &self.offdiag, u, out);
    }

    /// Dense copy of `P`, for oracles.
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = self.diag[i];
            if i + 1 < n {
                m[(i, i + 1)] = self.offdiag[i];
                m[(i + 1, i)] = self.offdiag[i];
            }
        }
        m
    }

    /// Replaces the cutoff, keeping everything else.
    pub fn with_chi(&self, chi_spec: BumpSpec) -> Self {
        let mut op = self.clone();
        op.chi = self.x.iter().map(|&x| chi_spec.eval(x)).collect();
        op.chi_spec = Some(chi_spec);
        op
    }

    /// Replaces the absorbing potential strength (requires a grid).
    pub fn with_cap(&self, cap: CapSpec) -> Result<Self> {
        let grid = self
            .grid
            .ok_or_else(|| LabError::Usage("with_cap needs a grid-built operator".into()))?;
        let mut op = self.clone();
        op.cap = build_cap(&grid, cap.r_a, cap.eta)?;
        Ok(op)
    }
}

fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for j in 0..n {
        let left = if j > 0 { offdiag[j - 1].abs() } else { 0.0 };
        let right = if j + 1 < n { offdiag[j].abs() } else { 0.0 };
        lo = lo.min(diag[j] - left - right);
        hi = hi.max(diag[j] + left + right);
    }
    let margin = 1e-3 * (hi - lo).max(1e-12);
    (lo - margin, hi + margin)
}

/// Second-order finite differences for `-h^2 d^2/dx^2 + V` with Dirichlet walls.
pub fn build_operator(grid: &GridSpec, spec: &PotentialSpec, cap: CapSpec, chi: BumpSpec) -> Result<DiscreteOperator> {
    let grid = GridSpec::new(grid.half_width, grid.points, grid.h, grid.max_energy, grid.points_per_wavelength)?;
    let x = grid.xs();
    let dx = grid.dx();
    let kinetic = grid.h * grid.h / (dx * dx);
    let potential: Vec<f64> = x.iter().map(|&xj| spec.value(xj)).collect();
    let diag: Vec<f64> = potential.iter().map(|v| 2.0 * kinetic + v).collect();
    let offdiag = vec![-kinetic; grid.points - 1];
    let vmin = potential.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = potential.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // Gershgorin: each disc is [V_j, V_j + 4 h^2 / dx^2]
    let width = 4.0 * kinetic + vmax - vmin;
    let margin = 1e-3 * width;
    let spectral_bounds = (vmin - margin, 4.0 * kinetic + vmax + margin);
    let cap_values = build_cap(&grid, cap.r_a, cap.eta)?;
    let chi_values = x.iter().map(|&xj| chi.eval(xj)).collect();
    Ok(DiscreteOperator {
        grid: Some(grid),
        x,
        h: grid.h,
        dx,
        diag,
        offdiag,
        cap: cap_values,
        chi: chi_values,
        chi_spec: Some(chi),
        spectral_bounds,
    })
}
