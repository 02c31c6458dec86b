//! Analytic potential families and the long-range decay check.
//!
//! Every family is even in `x` and comes with closed-form first and second
//! derivatives. In dimension n >= 2 the 1D profile is applied radially,
//! `V(x) = V(|x|)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Zero,
    AttractiveBump,
    EckartBarrier,
    DoubleBarrier,
}

impl Family {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "Zero" => Ok(Family::Zero),
            "AttractiveBump" => Ok(Family::AttractiveBump),
            "EckartBarrier" => Ok(Family::EckartBarrier),
            "DoubleBarrier" => Ok(Family::DoubleBarrier),
            other => Err(LabError::Config(format!("unknown potential family '{other}'"))),
        }
    }

    pub fn parameter_names(self) -> &'static [&'static str] {
        match self {
            Family::Zero => &[],
            Family::AttractiveBump => &["A"],
            Family::EckartBarrier => &["V0", "w"],
            Family::DoubleBarrier => &["V0", "d", "w"],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Zero => "Zero",
            Family::AttractiveBump => "AttractiveBump",
            Family::EckartBarrier => "EckartBarrier",
            Family::DoubleBarrier => "DoubleBarrier",
        }
    }
}

/// Closed-form profile with its parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Profile {
    Zero,
    /// `-a (1 + x^2)^-2`
    AttractiveBump { a: f64 },
    /// `v0 sech^2(x / w)`
    EckartBarrier { v0: f64, w: f64 },
    /// `v0 sech^2((x - d) / w) + v0 sech^2((x + d) / w)`
    DoubleBarrier { v0: f64, d: f64, w: f64 },
}

/// A named potential family with its parameters and claimed decay exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    pub profile: Profile,
    /// Claimed decay exponent of the long-range hypothesis.
    pub sigma: f64,
}

/// Result of [`PotentialSpec::eval`] for a vector argument.
#[derive(Clone, Debug, PartialEq)]
pub enum Derivative {
    Value(f64),
    Gradient(Vec<f64>),
    Hessian(DMatrix<f64>),
}

impl PotentialSpec {
    pub fn zero() -> Self {
        Self { profile: Profile::Zero, sigma: 1.0 }
    }

    pub fn attractive_bump(a: f64) -> Result<Self> {
        Self::new(Profile::AttractiveBump { a }, 4.0)
    }

    pub fn eckart(v0: f64, w: f64) -> Result<Self> {
        Self::new(Profile::EckartBarrier { v0, w }, 2.0)
    }

    pub fn double_barrier(v0: f64, d: f64, w: f64) -> Result<Self> {
        Self::new(Profile::DoubleBarrier { v0, d, w }, 2.0)
    }

    pub fn new(profile: Profile, sigma: f64) -> Result<Self> {
        let spec = Self { profile, sigma };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec from a family name and `key = value` parameters.
    ///
    /// Recognized keys: `A` (AttractiveBump), `V0`, `w`, `d`. Missing keys take
    /// the value 1 (`d` defaults to 4); keys foreign to the family are rejected.
    pub fn from_named(family: &str, params: &[(&str, f64)], sigma: Option<f64>) -> Result<Self> {
        let family = Family::from_name(family)?;
        let allowed = family.parameter_names();
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(LabError::Config(format!(
                "unknown parameter '{k}' for family {}; expected one of {allowed:?}",
                family.name()
            )));
        }
        let get = |key: &str, default: f64| -> f64 {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|&(_, v)| v)
                .unwrap_or(default)
        };
        for (k, v) in params {
            if !v.is_finite() {
                return Err(LabError::Config(format!("parameter {k} is not finite")));
            }
        }
        let profile = match family {
            Family::Zero => Profile::Zero,
            Family::AttractiveBump => Profile::AttractiveBump { a: get("A", 1.0) },
            Family::EckartBarrier => Profile::EckartBarrier {
                v0: get("V0", 1.0),
                w: get("w", 1.0),
            },
            Family::DoubleBarrier => Profile::DoubleBarrier {
                v0: get("V0", 1.0),
                d: get("d", 4.0),
                w: get("w", 1.0),
            },
        };
        let default_sigma = match family {
            Family::Zero => 1.0,
            Family::AttractiveBump => 4.0,
            _ => 2.0,
        };
        Self::new(profile, sigma.unwrap_or(default_sigma))
    }

    pub fn family(&self) -> Family {
        match self.profile {
            Profile::Zero => Family::Zero,
            Profile::AttractiveBump { .. } => Family::AttractiveBump,
            Profile::EckartBarrier { .. } => Family::EckartBarrier,
            Profile::DoubleBarrier { .. } => Family::DoubleBarrier,
        }
    }

    /// Named parameters in a fixed order, for reports.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match self.profile {
            Profile::Zero => vec![],
            Profile::AttractiveBump { a } => vec![("A", a)],
            Profile::EckartBarrier { v0, w } => vec![("V0", v0), ("w", w)],
            Profile::DoubleBarrier { v0, d, w } => vec![("V0", v0), ("d", d), ("w", w)],
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(LabError::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(LabError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match self.profile {
            Profile::Zero => Ok(()),
            Profile::AttractiveBump { a } => {
                if a.is_finite() {
                    Ok(())
                } else {
                    Err(LabError::Config("A must be finite".into()))
                }
            }
            Profile::EckartBarrier { v0, w } => {
                positive("V0", v0)?;
                positive("w", w)
            }
            Profile::DoubleBarrier { v0, d, w } => {
                positive("V0", v0)?;
                positive("d", d)?;
                positive("w", w)
            }
        }
    }

    /// V(x) in one dimension.
    pub fn value(&self, x: f64) -> f64 {
        match self.profile {
            Profile::Zero => 0.0,
            Profile::AttractiveBump { a } => {
                let q = 1.0 + x * x;
                -a / (q * q)
            }
            Profile::EckartBarrier { v0, w } => v0 * sech2(x / w),
            Profile::DoubleBarrier { v0, d, w } => v0 * (sech2((x - d) / w) + sech2((x + d) / w)),
        }
    }

    /// V'(x) in one dimension.
    pub fn d1(&self, x: f64) -> f64 {
        match self.profile {
            Profile::Zero => 0.0,
            Profile::AttractiveBump { a } => {
                let q = 1.0 + x * x;
                4.0 * a * x / (q * q * q)
            }
            Profile::EckartBarrier { v0, w } => v0 * sech2_d1(x / w) / w,
            Profile::DoubleBarrier { v0, d, w } => {
                v0 * (sech2_d1((x - d) / w) + sech2_d1((x + d) / w)) / w
            }
        }
    }

    /// V''(x) in one dimension.
    pub fn d2(&self, x: f64) -> f64 {
        match self.profile {
            Profile::Zero => 0.0,
            Profile::AttractiveBump { a } => {
                let q = 1.0 + x * x;
                4.0 * a * (1.0 - 5.0 * x * x) / (q * q * q * q)
            }
            Profile::EckartBarrier { v0, w } => v0 * sech2_d2(x / w) / (w * w),
            Profile::DoubleBarrier { v0, d, w } => {
                v0 * (sech2_d2((x - d) / w) + sech2_d2((x + d) / w)) / (w * w)
            }
        }
    }

    /// Evaluates V, its gradient or its Hessian at a point of any dimension.
    pub fn eval(&self, x: &[f64], order: u8) -> Result<Derivative> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LabError::Config("evaluation point must be finite".into()));
        }
        match order {
            0 => Ok(Derivative::Value(self.value_nd(x))),
            1 => Ok(Derivative::Gradient(self.gradient(x))),
            2 => Ok(Derivative::Hessian(self.hessian(x))),
            k => Err(LabError::Config(format!("derivative order {k} not supported"))),
        }
    }

    pub fn value_nd(&self, x: &[f64]) -> f64 {
        if x.len() == 1 {
            self.value(x[0])
        } else {
            self.value(norm(x))
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if x.len() == 1 {
            return vec![self.d1(x[0])];
        }
        let r = norm(x);
        if r == 0.0 {
            return vec![0.0; x.len()];
        }
        let dv = self.d1(r);
        x.iter().map(|xi| dv * xi / r).collect()
    }

    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        if n == 1 {
            return DMatrix::from_element(1, 1, self.d2(x[0]));
        }
        let r = norm(x);
        if r == 0.0 {
            // all families are even, so V'(0) = 0 and the radial Hessian is isotropic
            return DMatrix::identity(n, n) * self.d2(0.0);
        }
        let (dv, ddv) = (self.d1(r), self.d2(r));
        DMatrix::from_fn(n, n, |i, j| {
            let (ui, uj) = (x[i] / r, x[j] / r);
            let delta = if i == j { 1.0 } else { 0.0 };
            ddv * ui * uj + dv / r * (delta - ui * uj)
        })
    }

    /// Upper bound for `sup { V(y) : |y| >= r }`, or `+inf` when no cheap bound
    /// is known. Used to certify monotone escape in one dimension.
    pub fn outer_sup(&self, r: f64) -> f64 {
        let r = r.abs();
        match self.profile {
            Profile::Zero => 0.0,
            Profile::AttractiveBump { a } => {
                if a >= 0.0 {
                    0.0
                } else {
                    self.value(r)
                }
            }
            Profile::EckartBarrier { .. } => self.value(r),
            Profile::DoubleBarrier { d, .. } => {
                if r >= d {
                    self.value(r)
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Sampled sup and inf of V on `[lo, hi]`.
    pub fn range_on(&self, lo: f64, hi: f64, samples: usize) -> (f64, f64) {
        let samples = samples.max(2);
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for k in 0..samples {
            let x = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            let v = self.value(x);
            min = min.min(v);
            max = max.max(v);
        }
        // extrema of the canonical families sit at 0 and at +-d
        for x in self.critical_points() {
            if x >= lo && x <= hi {
                let v = self.value(x);
                min = min.min(v);
                max = max.max(v);
            }
        }
        (min, max)
    }

    fn critical_points(&self) -> Vec<f64> {
        match self.profile {
            Profile::DoubleBarrier { d, .. } => vec![-d, 0.0, d],
            _ => vec![0.0],
        }
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn sech2(u: f64) -> f64 {
    let s = 1.0 / u.cosh();
    s * s
}

/// d/du sech^2(u) = -2 sech^2(u) tanh(u)
fn sech2_d1(u: f64) -> f64 {
    -2.0 * sech2(u) * u.tanh()
}

/// d^2/du^2 sech^2(u) = 4 sech^2 tanh^2 - 2 sech^4
fn sech2_d2(u: f64) -> f64 {
    let s2 = sech2(u);
    let t = u.tanh();
    4.0 * s2 * t * t - 2.0 * s2 * s2
}

/// Sampled decay constants `sup |d^k V(x)| <x>^(sigma + k)` for k = 0, 1, 2.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    pub radius: f64,
    /// Constants sampled on `|x|` in `[R, 10R]`.
    pub constants: [f64; 3],
    /// Constants sampled on `|x|` in `[2R, 20R]`.
    pub constants_doubled: [f64; 3],
    pub violation: bool,
}

/// Samples the long-range bound `|d^k V| <= C <x>^(-sigma-k)` and flags it as
/// violated when a constant grows by more than a factor 2 under `R -> 2R`.
pub fn check_decay(spec: &PotentialSpec, radius: f64, samples: usize) -> Result<DecayReport> {
    if !(radius > 0.0) || samples < 2 {
        return Err(LabError::Config("check_decay needs R > 0 and samples >= 2".into()));
    }
    let sweep = |r: f64| -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for k in 0..samples {
            let t = k as f64 / (samples - 1) as f64;
            let x = r * (1.0 + 9.0 * t);
            let japanese = (1.0 + x * x).sqrt();
            for sign in [1.0, -1.0] {
                let y = sign * x;
                let derivs = [spec.value(y), spec.d1(y), spec.d2(y)];
                for (alpha, d) in derivs.iter().enumerate() {
                    let c = d.abs() * japanese.powf(spec.sigma + alpha as f64);
                    out[alpha] = out[alpha].max(c);
                }
            }
        }
        out
    };
    let constants = sweep(radius);
    let constants_doubled = sweep(2.0 * radius);
    let violation = constants
        .iter()
        .zip(&constants_doubled)
        .any(|(&c, &c2)| c2 > 2.0 * c && c2 > f64::MIN_POSITIVE);
    Ok(DecayReport { radius, constants, constants_doubled, violation })
}
