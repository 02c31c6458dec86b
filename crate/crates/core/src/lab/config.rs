//! Experiment configuration read from TOML.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::classical::ClassicalParams;
use crate::ehrenfest::{CertifyOptions, DEFAULT_SLACK};
use crate::error::{LabError, Result};
use crate::potentials::PotentialSpec;
use crate::quantum::{BumpSpec, CapSpec};
use crate::resolvent::{NormOptions, SweepOptions, ZSweep};

/// `h` given either as a number or as a string `"1/16"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum HValue {
    Number(f64),
    Text(String),
}

/// Parses `"0.0625"` or `"1/16"`.
pub fn parse_h_text(s: &str) -> Result<f64> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok().zip(b.trim().parse::<f64>().ok()).map(|(a, b)| a / b),
        None => s.parse::<f64>().ok(),
    };
    parsed.ok_or_else(|| LabError::Config(format!("cannot parse h value '{s}'")))
}

fn parse_h(v: &HValue) -> Result<f64> {
    match v {
        HValue::Number(x) => Ok(*x),
        HValue::Text(s) => parse_h_text(s),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    potential: RawPotential,
    experiment: RawExperiment,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    cap: RawCap,
    #[serde(default)]
    cutoff: RawCutoff,
    #[serde(default)]
    resolvent: RawResolvent,
    #[serde(default)]
    ehrenfest: RawEhrenfest,
    #[serde(default)]
    classical: RawClassical,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
struct RawPotential {
    family: String,
    sigma: Option<f64>,
    #[serde(flatten)]
    params: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    #[serde(rename = "E0")]
    e0: f64,
    #[serde(default = "default_eps")]
    eps: f64,
    h_list: Vec<HValue>,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default = "default_z_count")]
    z_count: usize,
}

fn default_eps() -> f64 {
    0.2
}
fn default_seed() -> u64 {
    7
}
fn default_z_count() -> usize {
    41
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGrid {
    #[serde(rename = "L")]
    half_width: f64,
    points_per_wavelength: f64,
}

impl Default for RawGrid {
    fn default() -> Self {
        Self { half_width: 20.0, points_per_wavelength: 8.0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCap {
    #[serde(rename = "R_a")]
    r_a: f64,
    eta: f64,
}

impl Default for RawCap {
    fn default() -> Self {
        let d = CapSpec::default();
        Self { r_a: d.r_a, eta: d.eta }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCutoff {
    chi_margin: f64,
    chi_ramp: f64,
    chi_nontrapping: f64,
    chi_radius: Option<f64>,
    phi_eps: Option<f64>,
}

impl Default for RawCutoff {
    fn default() -> Self {
        Self { chi_margin: 1.0, chi_ramp: 2.0, chi_nontrapping: 3.0, chi_radius: None, phi_eps: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawResolvent {
    tol: f64,
    max_iter: usize,
    block: usize,
    refine: usize,
    polish: usize,
    cap_sign: f64,
}

impl Default for RawResolvent {
    fn default() -> Self {
        let n = NormOptions::default();
        let s = SweepOptions::default();
        Self {
            tol: n.tol,
            max_iter: n.max_iter,
            block: n.block,
            refine: s.refine_factor,
            polish: s.polish_peaks,
            cap_sign: n.cap_sign,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawEhrenfest {
    eps_cert: f64,
    dt_over_h: f64,
    gamma_floor: f64,
    slack: f64,
}

impl Default for RawEhrenfest {
    fn default() -> Self {
        Self { eps_cert: 0.3, dt_over_h: 0.05, gamma_floor: 0.25, slack: DEFAULT_SLACK }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawClassical {
    r_escape: f64,
    t_max: f64,
    tol: f64,
    grid_count: usize,
    search_min: f64,
    search_max: f64,
}

impl Default for RawClassical {
    fn default() -> Self {
        let p = ClassicalParams::default();
        Self {
            r_escape: p.r_escape,
            t_max: p.t_max,
            tol: p.tol,
            grid_count: p.grid_count,
            search_min: p.search_box.0,
            search_max: p.search_box.1,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawOutput {
    dir: PathBuf,
}

impl Default for RawOutput {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

/// Placement of the spatial cutoff `chi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffConfig {
    /// Plateau radius = trapped hull radius + margin.
    pub chi_margin: f64,
    pub chi_ramp: f64,
    /// Plateau radius when nothing is trapped.
    pub chi_nontrapping: f64,
    /// Fixed plateau radius, overriding the two rules above.
    pub chi_radius: Option<f64>,
    /// Half-width of the energy filter support; the sweep half-width when unset.
    pub phi_eps: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    pub e0: f64,
    pub eps: f64,
    pub h_list: Vec<f64>,
    pub seed: u64,
    pub z_count: usize,
    pub half_width: f64,
    pub points_per_wavelength: f64,
    pub cap: CapSpec,
    pub cutoff: CutoffConfig,
    pub sweep: SweepOptions,
    pub certify: CertifyOptions,
    pub dt_over_h: f64,
    pub classical: ClassicalParams,
    pub out_dir: PathBuf,
}

fn check(cond: bool, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(LabError::Config(msg.into()))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text)?;
        Self::from_raw(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::MissingInput(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let params: Vec<(&str, f64)> = raw.potential.params.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        let potential = PotentialSpec::from_named(&raw.potential.family, &params, raw.potential.sigma)?;

        let ex = raw.experiment;
        let h_list = ex.h_list.iter().map(parse_h).collect::<Result<Vec<_>>>()?;
        check(!h_list.is_empty(), "h_list must not be empty")?;
        check(h_list.iter().all(|&h| h > 0.0 && h < 1.0), "every h must lie in (0, 1)")?;
        check(h_list.windows(2).all(|w| w[1] < w[0]), "h_list must be strictly decreasing")?;
        check(ex.e0.is_finite() && ex.e0 > 0.0, "E0 must be positive")?;
        check(ex.eps > 0.0 && ex.eps < ex.e0, "eps must lie in (0, E0)")?;
        check(ex.z_count >= 3, "z_count must be at least 3")?;

        let g = raw.grid;
        check(g.half_width > 0.0, "L must be positive")?;
        check(g.points_per_wavelength >= 8.0, "points_per_wavelength must be at least 8")?;
        let cap = CapSpec { r_a: raw.cap.r_a, eta: raw.cap.eta };
        check(cap.r_a > 0.0 && cap.r_a < g.half_width, "R_a must lie in (0, L)")?;
        check(cap.eta > 0.0, "eta must be positive")?;

        let c = raw.cutoff;
        check(c.chi_margin >= 0.0 && c.chi_ramp > 0.0 && c.chi_nontrapping > 0.0, "cutoff sizes must be positive")?;
        if let Some(r) = c.chi_radius {
            check(r > 0.0, "chi_radius must be positive")?;
        }
        if let Some(p) = c.phi_eps {
            check(p > 0.0, "phi_eps must be positive")?;
        }

        let r = raw.resolvent;
        check(r.tol > 0.0 && r.tol <= 1e-2, "resolvent tol must lie in (0, 1e-2]")?;
        check(r.max_iter >= 1 && r.block >= 1 && r.refine >= 1, "max_iter, block and refine must be positive")?;
        check(r.cap_sign == 1.0 || r.cap_sign == -1.0, "cap_sign must be 1 or -1")?;
        let sweep = SweepOptions {
            norm: NormOptions { tol: r.tol, max_iter: r.max_iter, block: r.block, seed: ex.seed, cap_sign: r.cap_sign },
            refine_factor: r.refine,
            polish_peaks: r.polish,
        };

        let e = raw.ehrenfest;
        check(e.eps_cert > 0.0 && e.eps_cert < 1.0, "eps_cert must lie in (0, 1)")?;
        check(e.dt_over_h > 0.0 && e.dt_over_h <= 1.0, "dt_over_h must lie in (0, 1]")?;
        check(e.gamma_floor > 0.0, "gamma_floor must be positive")?;
        check(e.slack >= 0.0, "slack must be non-negative")?;

        let cl = raw.classical;
        check(cl.r_escape > 0.0 && cl.t_max > 0.0 && cl.tol > 0.0, "classical settings must be positive")?;
        check(cl.search_min < cl.search_max && cl.grid_count >= 2, "classical search box is empty")?;
        let classical = ClassicalParams {
            r_escape: cl.r_escape,
            t_max: cl.t_max,
            tol: cl.tol,
            gamma_floor: e.gamma_floor,
            search_box: (cl.search_min, cl.search_max),
            grid_count: cl.grid_count,
            ..ClassicalParams::default()
        };

        Ok(Self {
            potential,
            e0: ex.e0,
            eps: ex.eps,
            h_list,
            seed: ex.seed,
            z_count: ex.z_count,
            half_width: g.half_width,
            points_per_wavelength: g.points_per_wavelength,
            cap,
            cutoff: CutoffConfig {
                chi_margin: c.chi_margin,
                chi_ramp: c.chi_ramp,
                chi_nontrapping: c.chi_nontrapping,
                chi_radius: c.chi_radius,
                phi_eps: c.phi_eps,
            },
            sweep,
            certify: CertifyOptions { eps_cert: e.eps_cert, dt: None, slack: e.slack },
            dt_over_h: e.dt_over_h,
            classical,
            out_dir: raw.output.dir,
        })
    }

    pub fn zsweep(&self) -> Result<ZSweep> {
        ZSweep::new(self.e0, self.eps, self.z_count)
    }

    /// `chi`: plateau around the trapped hull, or the fixed non-trapping plateau.
    pub fn chi(&self, hull: Option<(f64, f64)>) -> Result<BumpSpec> {
        let radius = match (self.cutoff.chi_radius, hull) {
            (Some(r), _) => r,
            (None, Some((a, b))) => a.abs().max(b.abs()) + self.cutoff.chi_margin,
            (None, None) => self.cutoff.chi_nontrapping,
        };
        BumpSpec::symmetric(radius, self.cutoff.chi_ramp)
    }

    pub fn phi(&self) -> Result<BumpSpec> {
        BumpSpec::energy_window(self.e0, self.cutoff.phi_eps.unwrap_or(self.eps))
    }

    /// Highest energy the grid must resolve.
    pub fn max_energy(&self) -> f64 {
        self.e0 + self.eps
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[potential]
family = "EckartBarrier"
V0 = 1.0

[experiment]
E0 = 1.0
h_list = ["1/16", 0.03125, "1/64"]
"#;

    #[test]
    fn minimal_config_takes_defaults() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.h_list, vec![1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
        assert_eq!(c.eps, 0.2);
        assert_eq!(c.z_count, 41);
        assert_eq!(c.half_width, 20.0);
        assert_eq!(c.cap, CapSpec::default());
        assert_eq!(c.certify.eps_cert, 0.3);
        assert_eq!(c.potential, PotentialSpec::eckart(1.0, 1.0).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let bad_order = MINIMAL.replace(r#"["1/16", 0.03125, "1/64"]"#, r#"["1/64", "1/16"]"#);
        assert!(ExperimentConfig::from_toml_str(&bad_order).is_err());
        let bad_key = MINIMAL.replace("V0 = 1.0", "V0 = 1.0\nA = 2.0");
        assert!(ExperimentConfig::from_toml_str(&bad_key).is_err());
        let bad_section = format!("{MINIMAL}\n[grid]\nLL = 3.0\n");
        assert!(ExperimentConfig::from_toml_str(&bad_section).is_err());
        let bad_cap = format!("{MINIMAL}\n[cap]\nR_a = 25.0\n");
        assert!(ExperimentConfig::from_toml_str(&bad_cap).is_err());
        let bad_h = MINIMAL.replace("\"1/16\"", "\"one/16\"");
        assert!(ExperimentConfig::from_toml_str(&bad_h).is_err());
    }

    #[test]
    fn chi_placement() {
        let c = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.chi(None).unwrap().plateau, (-3.0, 3.0));
        let b = c.chi(Some((-0.05, 0.05))).unwrap();
        assert!((b.plateau.1 - 1.05).abs() < 1e-15 && (b.support.1 - 3.05).abs() < 1e-15);
    }
}
