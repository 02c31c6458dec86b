//! Functional calculus `phi(P) u`: a Chebyshev expansion on the spectral
//! bounds, and a dense eigendecomposition route used as its oracle.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{BumpSpec, DiscreteOperator, WaveFunction};
use crate::error::{LabError, Result};

/// Target sup error of the expansion against `phi` on the spectral interval.
pub const FILTER_TOL: f64 = 1e-6;
/// Energy mesh used to measure that error.
pub const ERROR_MESH: usize = 4096;
pub const MAX_DEGREE: usize = 1 << 15;
/// Largest size for the dense route.
pub const DENSE_LIMIT: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Damping {
    #[default]
    None,
    Jackson,
}

/// Truncated Chebyshev series of a bump on `[lo, hi]`.
#[derive(Clone, Debug)]
pub struct ChebyshevFilter {
    pub lo: f64,
    pub hi: f64,
    /// Coefficients with the usual halved `c_0` folded in.
    pub coeffs: Vec<f64>,
    pub damping: Damping,
}

impl ChebyshevFilter {
    pub fn new(bump: &BumpSpec, bounds: (f64, f64), degree: usize, damping: Damping) -> Self {
        let (lo, hi) = bounds;
        let nodes = 4 * (degree + 1);
        let center = 0.5 * (hi + lo);
        let half = 0.5 * (hi - lo);
        let mut coeffs = vec![0.0; degree + 1];
        for j in 0..nodes {
            let theta = std::f64::consts::PI * (j as f64 + 0.5) / nodes as f64;
            let t = theta.cos();
            let f = bump.eval(center + half * t);
            if f == 0.0 {
                continue;
            }
            // T_k(t) by recurrence, stable on [-1, 1]
            let (mut t0, mut t1) = (1.0, t);
            coeffs[0] += f;
            if degree >= 1 {
                coeffs[1] += f * t1;
            }
            for c in coeffs.iter_mut().skip(2) {
                let t2 = 2.0 * t * t1 - t0;
                *c += f * t2;
                t0 = t1;
                t1 = t2;
            }
        }
        for c in coeffs.iter_mut() {
            *c *= 2.0 / nodes as f64;
        }
        coeffs[0] *= 0.5;
        if damping == Damping::Jackson {
            let m = (degree + 1) as f64;
            let q = std::f64::consts::PI / m;
            for (k, c) in coeffs.iter_mut().enumerate() {
                let k = k as f64;
                let g = ((m - k) * (q * k).cos() + (q * k).sin() / q.tan()) / m;
                *c *= g;
            }
        }
        Self { lo, hi, coeffs, damping }
    }

    /// Smallest power-of-two degree meeting `tol` on the error mesh.
    pub fn auto(bump: &BumpSpec, bounds: (f64, f64), tol: f64, damping: Damping) -> Result<Self> {
        let mut degree = 32;
        loop {
            let filter = Self::new(bump, bounds, degree, damping);
            let err = filter.sup_error(bump);
            if err <= tol {
                return Ok(filter);
            }
            if degree >= MAX_DEGREE {
                return Err(LabError::FilterDegree { degree, error: err, tol, required: 2 * MAX_DEGREE });
            }
            degree *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Clenshaw evaluation at a scalar energy.
    pub fn eval(&self, e: f64) -> f64 {
        let t = (2.0 * e - self.hi - self.lo) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Max deviation from the bump on a uniform mesh of the interval.
    pub fn sup_error(&self, bump: &BumpSpec) -> f64 {
        (0..ERROR_MESH)
            .map(|k| {
                let e = self.lo + (self.hi - self.lo) * k as f64 / (ERROR_MESH - 1) as f64;
                (self.eval(e) - bump.eval(e)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Applies the series to `u` with the three-term recurrence in `P`.
    pub fn apply(&self, op: &DiscreteOperator, u: &WaveFunction) -> WaveFunction {
        let n = u.len();
        let center = 0.5 * (self.hi + self.lo);
        let half = 0.5 * (self.hi - self.lo);
        let scaled = |v: &[Complex64], out: &mut [Complex64]| {
            op.apply_into(v, out);
            for (o, x) in out.iter_mut().zip(v) {
                *o = (*o - x * center) / half;
            }
        };
        let mut prev = u.values.clone();
        let mut acc: Vec<Complex64> = prev.iter().map(|v| v * self.coeffs[0]).collect();
        if self.coeffs.len() == 1 {
            return WaveFunction::new(acc, u.dx);
        }
        let mut cur = vec![Complex64::new(0.0, 0.0); n];
        scaled(&prev, &mut cur);
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += c * self.coeffs[1];
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for &ck in self.coeffs.iter().skip(2) {
            scaled(&cur, &mut next);
            for j in 0..n {
                next[j] = 2.0 * next[j] - prev[j];
                acc[j] += next[j] * ck;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        WaveFunction::new(acc, u.dx)
    }
}

/// `phi(P) u` through a Chebyshev expansion of the given degree; refuses when
/// that degree misses the sup-error target.
pub fn apply_filter(op: &DiscreteOperator, bump: &BumpSpec, u: &WaveFunction, degree: usize) -> Result<WaveFunction> {
    let filter = ChebyshevFilter::new(bump, op.spectral_bounds, degree, Damping::None);
    let err = filter.sup_error(bump);
    if err > FILTER_TOL {
        let required = ChebyshevFilter::auto(bump, op.spectral_bounds, FILTER_TOL, Damping::None)
            .map(|f| f.degree())
            .unwrap_or(2 * MAX_DEGREE);
        return Err(LabError::FilterDegree { degree, error: err, tol: FILTER_TOL, required });
    }
    Ok(filter.apply(op, u))
}

/// `phi(P) u` from a dense eigendecomposition of `P`.
pub fn dense_filter(op: &DiscreteOperator, f: impl Fn(f64) -> f64, u: &WaveFunction) -> Result<WaveFunction> {
    if op.len() > DENSE_LIMIT {
        return Err(LabError::Usage(format!("dense route limited to N <= {DENSE_LIMIT}")));
    }
    let eig = SymmetricEigen::new(op.dense());
    let q = eig.eigenvectors.map(|v| Complex64::new(v, 0.0));
    let coeffs = q.adjoint() * DVector::from_column_slice(&u.values);
    let weighted = DVector::from_iterator(
        coeffs.len(),
        coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, &lam)| c * f(lam)),
    );
    let out = q * weighted;
    Ok(WaveFunction::new(out.iter().copied().collect(), u.dx))
}
