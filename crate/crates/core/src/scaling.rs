//! Growth-law fits of resolvent norms against `h`: power law `C h^p`,
//! log-enhanced `C |ln h| / h`, exponential `C e^{nu/h}`, and model selection.

use crate::error::{LabError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Converged,
    /// The value is a lower bound (some sample in its sweep hit the iteration cap).
    LowerBoundOnly,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Converged => "converged",
            Provenance::LowerBoundOnly => "lower-bound-only",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "converged" => Ok(Provenance::Converged),
            "lower-bound-only" => Ok(Provenance::LowerBoundOnly),
            other => Err(LabError::Config(format!("unknown provenance '{other}'"))),
        }
    }
}

/// Pairs `(h, value)` with `h` strictly decreasing and `value > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSeries {
    pub h: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

pub const MIN_FIT_POINTS: usize = 4;
pub const MIN_CLASSIFY_POINTS: usize = 5;

impl ScalingSeries {
    pub fn new(h: Vec<f64>, values: Vec<f64>, provenance: Vec<Provenance>) -> Result<Self> {
        if h.len() != values.len() || h.len() != provenance.len() {
            return Err(LabError::Config("series columns differ in length".into()));
        }
        if h.len() < MIN_FIT_POINTS {
            return Err(LabError::Config(format!("a fit needs at least {MIN_FIT_POINTS} points, got {}", h.len())));
        }
        if h.windows(2).any(|w| !(w[1] < w[0])) || h.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(LabError::Config("h must be strictly decreasing inside (0, 1)".into()));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(LabError::Config("series values must be positive and finite".into()));
        }
        Ok(Self { h, values, provenance })
    }

    pub fn converged(h: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = h.len();
        Self::new(h, values, vec![Provenance::Converged; n])
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// Copy without the point at `index`.
    pub fn without(&self, index: usize) -> Result<Self> {
        let drop = |v: &[f64]| v.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, &x)| x).collect();
        let prov = self.provenance.iter().enumerate().filter(|(i, _)| *i != index).map(|(_, &p)| p).collect();
        Self::new(drop(&self.h), drop(&self.values), prov)
    }
}

/// Ordered from least to most divergent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Model {
    PowerLaw,
    LogEnhanced,
    Exponential,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::PowerLaw, Model::LogEnhanced, Model::Exponential];

    pub fn name(self) -> &'static str {
        match self {
            Model::PowerLaw => "power",
            Model::LogEnhanced => "log-enhanced",
            Model::Exponential => "exponential",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| LabError::Config(format!("unknown model '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFit {
    pub model: Model,
    /// Prefactor `C`; for the log-enhanced model the slope of `value h` in `|ln h|`.
    pub c: f64,
    /// `p` (power), `nu` (exponential) or the intercept `b` (log-enhanced).
    pub param: f64,
    /// RMS residual in the fitted coordinates.
    pub residual: f64,
    /// RMS residual over the mean absolute ordinate.
    pub relative_residual: f64,
    /// Residual sum of squares over the ordinate's sum of squared deviations.
    pub normalized_residual: f64,
    pub selected: bool,
    pub ambiguous: bool,
}

impl ModelFit {
    pub fn predict(&self, h: f64) -> f64 {
        match self.model {
            Model::PowerLaw => self.c * h.powf(self.param),
            Model::LogEnhanced => (self.c * h.ln().abs() + self.param) / h,
            Model::Exponential => self.c * (self.param / h).exp(),
        }
    }
}

struct Line {
    intercept: f64,
    slope: f64,
    ss_res: f64,
    ss_tot: f64,
    mean_abs: f64,
    n: usize,
}

fn least_squares(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss_res = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let ss_tot = y.iter().map(|v| (v - my).powi(2)).sum();
    let mean_abs = y.iter().map(|v| v.abs()).sum::<f64>() / n;
    Line { intercept, slope, ss_res, ss_tot, mean_abs, n: x.len() }
}

fn to_fit(model: Model, line: &Line, c: f64, param: f64) -> ModelFit {
    let rms = (line.ss_res / line.n as f64).sqrt();
    // an ordinate without spread leaves nothing to explain: count it as R^2 = 0
    let flat = line.ss_tot <= 1e-24 * line.mean_abs.powi(2) * line.n as f64;
    let normalized = if flat { 1.0 } else { line.ss_res / line.ss_tot };
    ModelFit {
        model,
        c,
        param,
        residual: rms,
        relative_residual: if line.mean_abs > 0.0 { rms / line.mean_abs } else { rms },
        normalized_residual: normalized,
        selected: false,
        ambiguous: false,
    }
}

/// `ln value = ln C + p ln h`
pub fn fit_power(series: &ScalingSeries) -> ModelFit {
    let x: Vec<f64> = series.h.iter().map(|h| h.ln()).collect();
    let y: Vec<f64> = series.values.iter().map(|v| v.ln()).collect();
    let line = least_squares(&x, &y);
    to_fit(Model::PowerLaw, &line, line.intercept.exp(), line.slope)
}

/// `value h = C |ln h| + b`
pub fn fit_log_enhanced(series: &ScalingSeries) -> ModelFit {
    let x: Vec<f64> = series.h.iter().map(|h| h.ln().abs()).collect();
    let y: Vec<f64> = series.h.iter().zip(&series.values).map(|(h, v)| h * v).collect();
    let line = least_squares(&x, &y);
    to_fit(Model::LogEnhanced, &line, line.slope, line.intercept)
}

/// `ln value = ln C + nu / h`
pub fn fit_exponential(series: &ScalingSeries) -> ModelFit {
    let x: Vec<f64> = series.h.iter().map(|h| 1.0 / h).collect();
    let y: Vec<f64> = series.values.iter().map(|v| v.ln()).collect();
    let line = least_squares(&x, &y);
    to_fit(Model::Exponential, &line, line.intercept.exp(), line.slope)
}

pub fn fit(model: Model, series: &ScalingSeries) -> ModelFit {
    match model {
        Model::PowerLaw => fit_power(series),
        Model::LogEnhanced => fit_log_enhanced(series),
        Model::Exponential => fit_exponential(series),
    }
}

/// Relative band within which two normalized residuals count as tied.
pub const TIE_BAND: f64 = 0.10;

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    /// All three fits in [`Model::ALL`] order; exactly one is selected.
    pub fits: Vec<ModelFit>,
    pub selected: Model,
    pub ambiguous: bool,
    /// The power law was ruled out by lower-bound-only points above its fit.
    pub power_excluded: bool,
}

impl Classification {
    pub fn selected_fit(&self) -> &ModelFit {
        self.fits.iter().find(|f| f.selected).expect("one fit is selected")
    }

    pub fn fit(&self, model: Model) -> &ModelFit {
        self.fits.iter().find(|f| f.model == model).expect("all models are fitted")
    }
}

/// Picks the model with the smallest normalized residual; near-ties go to the
/// less divergent model and are flagged.
pub fn classify(series: &ScalingSeries) -> Result<Classification> {
    if series.len() < MIN_CLASSIFY_POINTS {
        return Err(LabError::Config(format!(
            "classification needs at least {MIN_CLASSIFY_POINTS} points, got {}",
            series.len()
        )));
    }
    let mut fits: Vec<ModelFit> = Model::ALL.iter().map(|&m| fit(m, series)).collect();
    let power = &fits[0];
    let power_excluded = series
        .h
        .iter()
        .zip(&series.values)
        .zip(&series.provenance)
        .any(|((&h, &v), &p)| p == Provenance::LowerBoundOnly && v.ln() > power.predict(h).ln() + 1e-12);

    let eligible: Vec<usize> = (0..fits.len()).filter(|&i| !(power_excluded && i == 0)).collect();
    let best = eligible
        .iter()
        .map(|&i| fits[i].normalized_residual)
        .fold(f64::INFINITY, f64::min);
    let tied: Vec<usize> = eligible
        .into_iter()
        .filter(|&i| fits[i].normalized_residual <= best * (1.0 + TIE_BAND) + 1e-15)
        .collect();
    let chosen = tied[0];
    let ambiguous = tied.len() > 1;
    fits[chosen].selected = true;
    fits[chosen].ambiguous = ambiguous;
    Ok(Classification { selected: fits[chosen].model, fits, ambiguous, power_excluded })
}
