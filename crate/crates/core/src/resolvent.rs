//! Truncated resolvent `A(z) = chi (P - z - iW)^{-1} chi`: solves, operator
//! norm estimates by block power iteration on `A^H A`, and the energy sweep
//! that produces `K(h) = h sup_z ||A(z)||`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::linalg::{cdot, cnorm, TridiagLu};
use crate::quantum::{DiscreteOperator, WaveFunction};

/// Uniform grid of energies on `[E0 - eps, E0 + eps]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ZSweep {
    pub e0: f64,
    pub eps: f64,
    pub count: usize,
    pub z_values: Vec<f64>,
}

impl ZSweep {
    pub fn new(e0: f64, eps: f64, count: usize) -> Result<Self> {
        if count < 3 || !(eps > 0.0) {
            return Err(LabError::Config("z sweep needs count >= 3 and eps > 0".into()));
        }
        let z_values = (0..count)
            .map(|k| {
                // symmetric about E0 by construction
                let s = (2 * k) as f64 / (count - 1) as f64 - 1.0;
                e0 + eps * s
            })
            .collect();
        Ok(Self { e0, eps, count, z_values })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.eps / (self.count - 1) as f64
    }

    pub fn window(&self) -> (f64, f64) {
        (self.e0 - self.eps, self.e0 + self.eps)
    }
}

/// Which stage of the sweep produced a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pass {
    Coarse = 0,
    Refined = 1,
    Polished = 2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolventSample {
    pub z: f64,
    pub norm: f64,
    pub iterations: usize,
    /// Relative change of the estimate in the last iteration.
    pub residual: f64,
    pub converged: bool,
    pub pass: Pass,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KOfH {
    pub h: f64,
    pub sup_norm: f64,
    /// `h * sup_norm`
    pub k: f64,
    pub argmax_z: f64,
}

impl KOfH {
    pub fn new(h: f64, sup_norm: f64, argmax_z: f64) -> Self {
        Self { h, sup_norm, k: h * sup_norm, argmax_z }
    }

    /// Sup over a set of sampled norms.
    pub fn from_samples(h: f64, zs: &[f64], norms: &[f64]) -> Self {
        let (i, &sup) = norms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("at least one sample");
        Self::new(h, sup, zs[i])
    }
}

/// Settings of the norm estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct NormOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Block size: the normalized `chi` plus `block - 1` seeded random vectors.
    pub block: usize,
    pub seed: u64,
    /// `+1` for `P - z - iW`, `-1` for `P - z + iW`.
    pub cap_sign: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000, block: 4, seed: 7, cap_sign: 1.0 }
    }
}

/// Factorization of `P - z - i s W` shared by forward and adjoint solves.
pub struct ShiftedSolver<'a> {
    op: &'a DiscreteOperator,
    lu: TridiagLu,
    pub z: f64,
    cap_sign: f64,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(op: &'a DiscreteOperator, z: f64, cap_sign: f64) -> Result<Self> {
        let diag: Vec<Complex64> = op
            .diag
            .iter()
            .zip(&op.cap)
            .map(|(&d, &w)| Complex64::new(d - z, -cap_sign * w))
            .collect();
        let off: Vec<Complex64> = op.offdiag.iter().map(|&o| Complex64::new(o, 0.0)).collect();
        let lu = TridiagLu::factor_symmetric(&diag, &off)?;
        Ok(Self { op, lu, z, cap_sign })
    }

    pub fn solve(&self, rhs: &mut [Complex64]) {
        self.lu.solve_in_place(rhs);
    }

    pub fn solve_adjoint(&self, rhs: &mut [Complex64]) {
        self.lu.solve_adjoint_symmetric_in_place(rhs);
    }

    /// `chi (P - z - isW)^{-1} chi u`
    pub fn truncated(&self, u: &mut [Complex64]) {
        self.mask(u);
        self.solve(u);
        self.mask(u);
    }

    /// `chi (P - z + isW)^{-1} chi u`, the adjoint of [`Self::truncated`].
    pub fn truncated_adjoint(&self, u: &mut [Complex64]) {
        self.mask(u);
        self.solve_adjoint(u);
        self.mask(u);
    }

    fn mask(&self, u: &mut [Complex64]) {
        for (v, &c) in u.iter_mut().zip(&self.op.chi) {
            *v *= c;
        }
    }

    /// `(P - z - isW) v`, for residual checks.
    pub fn apply_shifted(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = self.op.apply(v);
        for ((o, x), &w) in out.iter_mut().zip(v).zip(&self.op.cap) {
            *o -= x * Complex64::new(self.z, self.cap_sign * w);
        }
        out
    }
}

/// Solves `(P - z - iW) v = rhs`.
pub fn solve_shifted(op: &DiscreteOperator, z: f64, rhs: &WaveFunction) -> Result<WaveFunction> {
    let solver = ShiftedSolver::new(op, z, 1.0)?;
    let mut v = rhs.values.clone();
    solver.solve(&mut v);
    Ok(WaveFunction::new(v, rhs.dx))
}

/// `chi (P - z - iW)^{-1} chi u`.
pub fn truncated_apply(op: &DiscreteOperator, z: f64, u: &WaveFunction) -> Result<WaveFunction> {
    let solver = ShiftedSolver::new(op, z, 1.0)?;
    let mut v = u.values.clone();
    solver.truncated(&mut v);
    Ok(WaveFunction::new(v, u.dx))
}

/// Estimates `||chi (P - z - iW)^{-1} chi||`.
pub fn estimate_norm(op: &DiscreteOperator, z: f64, opts: &NormOptions) -> Result<ResolventSample> {
    estimate_norm_with_vector(op, z, opts).map(|(s, _)| s)
}

/// [`estimate_norm`] also returning the top right singular vector estimate.
pub fn estimate_norm_with_vector(
    op: &DiscreteOperator,
    z: f64,
    opts: &NormOptions,
) -> Result<(ResolventSample, Vec<Complex64>)> {
    if !(opts.tol > 0.0 && opts.tol <= 1e-2) {
        return Err(LabError::Config(format!("norm tolerance must lie in (0, 1e-2], got {}", opts.tol)));
    }
    let solver = ShiftedSolver::new(op, z, opts.cap_sign)?;
    let n = op.len();
    let zero = Complex64::new(0.0, 0.0);
    if op.chi.iter().all(|&c| c == 0.0) {
        let sample = ResolventSample { z, norm: 0.0, iterations: 0, residual: 0.0, converged: true, pass: Pass::Coarse };
        return Ok((sample, vec![zero; n]));
    }

    let block = opts.block.clamp(1, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(block);
    basis.push(op.chi.iter().map(|&c| Complex64::new(c, 0.0)).collect());
    while basis.len() < block {
        basis.push(random_vector(&mut rng, n));
    }
    orthonormalize(&mut basis, &mut rng);

    let mut prev = 0.0f64;
    let mut residual = f64::INFINITY;
    let mut top = vec![zero; n];
    for it in 1..=opts.max_iter {
        let mut images = basis.clone();
        images.par_iter_mut().for_each(|v| solver.truncated(v));
        // Rayleigh–Ritz for A^H A on span(basis): G = W^H W
        let b = basis.len();
        let gram = DMatrix::from_fn(b, b, |i, j| cdot(&images[i], &images[j]));
        let eig = SymmetricEigen::new(gram);
        let mut order: Vec<usize> = (0..b).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
        let sigma = eig.eigenvalues[order[0]].max(0.0).sqrt();

        // rotate basis and images to Ritz vectors, largest first
        let rotate = |vs: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            order
                .iter()
                .map(|&c| {
                    let mut out = vec![zero; n];
                    for (r, v) in vs.iter().enumerate() {
                        let coef = eig.eigenvectors[(r, c)];
                        for (o, x) in out.iter_mut().zip(v) {
                            *o += coef * x;
                        }
                    }
                    out
                })
                .collect()
        };
        let ritz = rotate(&basis);
        let mut ritz_images = rotate(&images);
        top.clone_from(&ritz[0]);

        residual = if sigma > 0.0 { (sigma - prev).abs() / sigma } else { 0.0 };
        if sigma == 0.0 || (it > 1 && residual <= opts.tol) {
            let sample = ResolventSample { z, norm: sigma, iterations: it, residual, converged: true, pass: Pass::Coarse };
            return Ok((sample, top));
        }
        prev = sigma;

        ritz_images.par_iter_mut().for_each(|v| solver.truncated_adjoint(v));
        basis = ritz_images;
        orthonormalize(&mut basis, &mut rng);
    }
    let sample = ResolventSample { z, norm: prev, iterations: opts.max_iter, residual, converged: false, pass: Pass::Coarse };
    Ok((sample, top))
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Modified Gram–Schmidt, applied twice; degenerate vectors are replaced by
/// fresh random ones.
fn orthonormalize(basis: &mut [Vec<Complex64>], rng: &mut ChaCha8Rng) {
    let n = basis[0].len();
    for i in 0..basis.len() {
        for _attempt in 0..3 {
            let original = cnorm(&basis[i]);
            for _pass in 0..2 {
                for j in 0..i {
                    let (head, tail) = basis.split_at_mut(i);
                    let proj = cdot(&head[j], &tail[0]);
                    for (t, q) in tail[0].iter_mut().zip(&head[j]) {
                        *t -= proj * q;
                    }
                }
            }
            let norm = cnorm(&basis[i]);
            if norm > 1e-10 * original.max(f64::MIN_POSITIVE) && norm > 0.0 {
                for v in basis[i].iter_mut() {
                    *v /= norm;
                }
                break;
            }
            basis[i] = random_vector(rng, n);
        }
    }
}

/// Result of a full energy sweep at one `h`.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub kofh: KOfH,
    /// All evaluated samples, sorted by `z`.
    pub samples: Vec<ResolventSample>,
    /// Some sample hit `max_iter`; `K` is then only a lower bound.
    pub lower_bound_only: bool,
}

/// Sweep settings beyond the estimator options.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub norm: NormOptions,
    /// Density factor of the re-sampling around the coarse argmax.
    pub refine_factor: usize,
    /// Number of local maxima polished by successive parabolic interpolation.
    pub polish_peaks: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { norm: NormOptions::default(), refine_factor: 4, polish_peaks: 6 }
    }
}

/// Evaluates the norm over the sweep, re-samples the argmax neighbourhood at
/// `refine_factor` times the density, then polishes the highest local maxima.
pub fn sweep(op: &DiscreteOperator, zs: &ZSweep, opts: &SweepOptions) -> Result<SweepResult> {
    let eval = |z: f64, pass: Pass| -> Result<ResolventSample> {
        estimate_norm(op, z, &opts.norm).map(|mut s| {
            s.pass = pass;
            s
        })
    };
    let (lo, hi) = zs.window();

    let mut samples: Vec<ResolventSample> = zs
        .z_values
        .par_iter()
        .map(|&z| eval(z, Pass::Coarse))
        .collect::<Result<_>>()?;

    let coarse_best = argmax(&samples);
    let z_star = samples[coarse_best].z;
    let spacing = zs.spacing();
    let factor = opts.refine_factor.max(1);
    let fine = spacing / factor as f64;
    let refined: Vec<f64> = (-(factor as i64)..=factor as i64)
        .filter(|k| k % factor as i64 != 0)
        .map(|k| z_star + k as f64 * fine)
        .filter(|&z| z > lo && z < hi)
        .collect();
    let extra: Vec<ResolventSample> = refined
        .par_iter()
        .map(|&z| eval(z, Pass::Refined))
        .collect::<Result<_>>()?;
    samples.extend(extra);
    samples.sort_by(|a, b| a.z.partial_cmp(&b.z).unwrap());

    // local maxima of the sampled curve, highest first
    let mut peaks: Vec<usize> = (0..samples.len())
        .filter(|&i| {
            let left = i == 0 || samples[i - 1].norm <= samples[i].norm;
            let right = i + 1 == samples.len() || samples[i + 1].norm <= samples[i].norm;
            left && right
        })
        .collect();
    peaks.sort_by(|&a, &b| samples[b].norm.partial_cmp(&samples[a].norm).unwrap());
    peaks.truncate(opts.polish_peaks);

    let polished: Vec<Vec<ResolventSample>> = peaks
        .par_iter()
        .map(|&i| {
            let left = if i > 0 { samples[i].z - samples[i - 1].z } else { fine };
            let right = if i + 1 < samples.len() { samples[i + 1].z - samples[i].z } else { fine };
            polish_peak(&|z| eval(z, Pass::Polished), &samples[i], left.min(right), lo, hi)
        })
        .collect::<Result<_>>()?;
    samples.extend(polished.into_iter().flatten());
    samples.sort_by(|a, b| a.z.partial_cmp(&b.z).unwrap());

    let best = argmax(&samples);
    let h = op.h;
    Ok(SweepResult {
        kofh: KOfH::new(h, samples[best].norm, samples[best].z),
        lower_bound_only: samples.iter().any(|s| !s.converged),
        samples,
    })
}

fn argmax(samples: &[ResolventSample]) -> usize {
    samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm.partial_cmp(&b.1.norm).unwrap())
        .map(|(i, _)| i)
        .expect("non-empty sweep")
}

/// Climbs to a local maximum of `z -> ||A(z)||` near `start`.
///
/// Near an isolated pole `1 / ||A(z)||^2` is a quadratic in `z`, so the
/// vertex of the parabola through three samples lands on the peak; the
/// bracket then shrinks geometrically until it reaches rounding level.
fn polish_peak<F>(eval: &F, start: &ResolventSample, delta0: f64, lo: f64, hi: f64) -> Result<Vec<ResolventSample>>
where
    F: Fn(f64) -> Result<ResolventSample>,
{
    let mut out = Vec::new();
    let mut best = start.clone();
    let mut delta = delta0;
    let floor = 8.0 * f64::EPSILON * best.z.abs().max(1.0);
    let inv2 = |n: f64| 1.0 / (n * n);
    for _ in 0..80 {
        if delta <= floor {
            break;
        }
        let zl = (best.z - delta).max(lo);
        let zr = (best.z + delta).min(hi);
        if zr - zl <= floor {
            break;
        }
        let left = if zl < best.z { Some(eval(zl)?) } else { None };
        let right = if zr > best.z { Some(eval(zr)?) } else { None };
        out.extend(left.iter().cloned());
        out.extend(right.iter().cloned());
        let better = [&left, &right]
            .into_iter()
            .flatten()
            .filter(|s| s.norm > best.norm)
            .max_by(|a, b| a.norm.partial_cmp(&b.norm).unwrap())
            .cloned();
        if let Some(s) = better {
            best = s;
            continue;
        }
        let (Some(l), Some(r)) = (left, right) else {
            delta /= 4.0;
            continue;
        };
        let (a, b, c) = (l.z, best.z, r.z);
        let (ga, gb, gc) = (inv2(l.norm), inv2(best.norm), inv2(r.norm));
        let num = (b - a).powi(2) * (gb - gc) - (b - c).powi(2) * (gb - ga);
        let den = (b - a) * (gb - gc) - (b - c) * (gb - ga);
        let vertex = b - 0.5 * num / den;
        if !vertex.is_finite() || vertex <= a || vertex >= c {
            delta /= 4.0;
            continue;
        }
        let moved = (vertex - b).abs();
        let trial = eval(vertex)?;
        out.push(trial.clone());
        if trial.norm > best.norm {
            best = trial;
        }
        delta = (4.0 * moved).min(delta / 4.0).max(floor);
    }
    Ok(out)
}
