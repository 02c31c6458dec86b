//! Tridiagonal kernels shared by the propagator and the resolvent.

use num_complex::Complex64;

use crate::error::{LabError, Result};

/// LU factorization of a complex tridiagonal matrix with partial pivoting
/// (the `gttrf`/`gttrs` scheme: row interchanges create one extra
/// superdiagonal of fill).
#[derive(Clone, Debug)]
pub struct TridiagLu {
    dl: Vec<Complex64>,
    d: Vec<Complex64>,
    du: Vec<Complex64>,
    du2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// Factors the matrix with subdiagonal `sub`, diagonal `diag` and
    /// superdiagonal `sup` (`sub.len() == sup.len() == diag.len() - 1`).
    pub fn factor(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        assert!(n >= 1);
        assert_eq!(sub.len(), n - 1);
        assert_eq!(sup.len(), n - 1);
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];

        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i] != Complex64::new(0.0, 0.0) {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if let Some(row) = d.iter().position(|v| *v == Complex64::new(0.0, 0.0) || !v.is_finite()) {
            return Err(LabError::SingularPivot { row });
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    /// Factors the complex symmetric matrix `diag + offdiag * (shift up + shift down)`.
    pub fn factor_symmetric(diag: &[Complex64], offdiag: &[Complex64]) -> Result<Self> {
        Self::factor(offdiag, diag, offdiag)
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.d.len();
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if !self.swapped[i] {
                let t = self.dl[i] * b[i];
                b[i + 1] -= t;
            } else {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }

    /// Solves with the conjugate-transpose of a complex *symmetric* matrix:
    /// `A^H = conj(A)`, so `A^H y = b` iff `A conj(y) = conj(b)`.
    pub fn solve_adjoint_symmetric_in_place(&self, b: &mut [Complex64]) {
        for v in b.iter_mut() {
            *v = v.conj();
        }
        self.solve_in_place(b);
        for v in b.iter_mut() {
            *v = v.conj();
        }
    }
}

/// `out = T u` for a real symmetric tridiagonal `T`.
pub fn sym_tridiag_apply(diag: &[f64], offdiag: &[f64], u: &[Complex64], out: &mut [Complex64]) {
    let n = diag.len();
    debug_assert_eq!(u.len(), n);
    debug_assert_eq!(out.len(), n);
    if n == 1 {
        out[0] = u[0] * diag[0];
        return;
    }
    out[0] = u[0] * diag[0] + u[1] * offdiag[0];
    for j in 1..n - 1 {
        out[j] = u[j] * diag[j] + (u[j - 1] * offdiag[j - 1] + u[j + 1] * offdiag[j]);
    }
    out[n - 1] = u[n - 1] * diag[n - 1] + u[n - 2] * offdiag[n - 2];
}

/// Euclidean norm of a complex slice.
pub fn cnorm(u: &[Complex64]) -> f64 {
    u.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `sum conj(a_j) b_j`
pub fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
