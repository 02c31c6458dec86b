#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use trapping_lab::potentials::PotentialSpec;
use trapping_lab::quantum::{build_operator, BumpSpec, CapSpec, DiscreteOperator, GridSpec, WaveFunction};

pub fn small_operator(points: usize, h: f64, spec: &PotentialSpec, eta: f64, chi: BumpSpec) -> DiscreteOperator {
    let grid = GridSpec::new(8.0, points, h, 1.2, 8.0).unwrap();
    build_operator(&grid, spec, CapSpec { r_a: 5.0, eta }, chi).unwrap()
}

/// `chi (P - z - iW)^{-1} chi` as a dense matrix.
pub fn dense_truncated(op: &DiscreteOperator, z: f64) -> DMatrix<Complex64> {
    let n = op.len();
    let mut m = op.dense().map(|v| Complex64::new(v, 0.0));
    for j in 0..n {
        m[(j, j)] -= Complex64::new(z, op.cap[j]);
    }
    let inv = m.try_inverse().expect("invertible");
    let chi = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(op.chi[i], 0.0) } else { Complex64::new(0.0, 0.0) });
    &chi * inv * &chi
}

pub fn random_wave(rng: &mut ChaCha8Rng, n: usize, dx: f64) -> WaveFunction {
    WaveFunction::new(
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
        dx,
    )
}

pub fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum::<f64>().sqrt();
    num / den
}

/// Exact `exp(-i t P / h)` from the eigendecomposition.
pub fn dense_evolution(op: &DiscreteOperator, u: &WaveFunction, t: f64) -> Vec<Complex64> {
    let eig = op.dense().symmetric_eigen();
    let q = eig.eigenvectors.map(|v| Complex64::new(v, 0.0));
    let c = q.adjoint() * DVector::from_column_slice(&u.values);
    let phased = DVector::from_iterator(
        c.len(),
        c.iter().zip(eig.eigenvalues.iter()).map(|(c, &l)| c * Complex64::from_polar(1.0, -t * l / op.h)),
    );
    (q * phased).iter().copied().collect()
}

/// Crank–Nicolson steps with dense matrices.
pub fn dense_crank_nicolson(op: &DiscreteOperator, u: &WaveFunction, t: f64, steps: usize) -> Vec<Complex64> {
    let n = op.len();
    let tau = t / steps as f64 / (2.0 * op.h);
    let p = op.dense().map(|v| Complex64::new(v, 0.0));
    let id = DMatrix::<Complex64>::identity(n, n);
    let i = Complex64::i();
    let step = (&id + &p * (i * tau)).try_inverse().unwrap() * (&id - &p * (i * tau));
    let mut v = DVector::from_column_slice(&u.values);
    for _ in 0..steps {
        v = &step * v;
    }
    v.iter().copied().collect()
}

