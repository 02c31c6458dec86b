//! Experiment drivers behind the CLI subcommands.

use std::path::Path;

use crate::classical::{sample_trapped_set, Trapping, TrappingReport};
use crate::ehrenfest::{certify, CertifyOptions, EhrenfestCertificate, ObservableSeries};
use crate::error::{LabError, Result};
use crate::quantum::{build_operator, coherent_state, DiscreteOperator, GridSpec};
use crate::resolvent::{sweep, SweepResult};
use crate::scaling::{classify, Classification, Provenance, ScalingSeries};

use super::config::ExperimentConfig;
use super::io;

pub fn classify_energy(cfg: &ExperimentConfig) -> Result<TrappingReport> {
    sample_trapped_set(&cfg.potential, cfg.e0, &cfg.classical)
}

/// Classical scan; writes `trapping.csv`.
pub fn run_classify(cfg: &ExperimentConfig, out: &Path) -> Result<TrappingReport> {
    let report = classify_energy(cfg)?;
    io::write_trapping(&out.join(io::TRAPPING_CSV), &report)?;
    Ok(report)
}

/// Discretization of the configured problem at one `h`, with `chi` placed from the hull.
pub fn operator_at(cfg: &ExperimentConfig, h: f64, hull: Option<(f64, f64)>) -> Result<DiscreteOperator> {
    let grid = GridSpec::resolved(cfg.half_width, h, cfg.max_energy(), cfg.points_per_wavelength)?;
    build_operator(&grid, &cfg.potential, cfg.cap, cfg.chi(hull)?)
}

pub fn sweep_at(cfg: &ExperimentConfig, h: f64, hull: Option<(f64, f64)>) -> Result<(SweepResult, usize)> {
    let op = operator_at(cfg, h, hull)?;
    let result = sweep(&op, &cfg.zsweep()?, &cfg.sweep)?;
    Ok((result, op.len()))
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub report: TrappingReport,
    pub sweeps: Vec<SweepResult>,
    pub rows: Vec<io::KOfHRow>,
    /// Sup norms per `h`; `None` with fewer than the points a fit needs.
    pub series: Option<ScalingSeries>,
    /// Number of unconverged samples across all sweeps.
    pub warnings: usize,
}

/// Classifies, then sweeps every `h` of the config. Writes `trapping.csv`,
/// `sweep.csv`, `kofh.csv` and (with enough points) `series.csv`.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<SweepOutcome> {
    let report = run_classify(cfg, out)?;
    let mut sweeps = Vec::with_capacity(cfg.h_list.len());
    let mut rows = Vec::with_capacity(cfg.h_list.len());
    for &h in &cfg.h_list {
        let (s, points) = sweep_at(cfg, h, report.spatial_hull)?;
        rows.push(io::KOfHRow::from_sweep(&s, points));
        sweeps.push(s);
    }
    let warnings = sweeps.iter().map(|s| s.samples.iter().filter(|r| !r.converged).count()).sum();
    io::write_sweeps(&out.join(io::SWEEP_CSV), &sweeps)?;
    io::write_kofh(&out.join(io::KOFH_CSV), &rows)?;
    let series = series_from_rows(&rows).ok();
    if let Some(s) = &series {
        io::write_series(&out.join(io::SERIES_CSV), s)?;
    }
    Ok(SweepOutcome { report, sweeps, rows, series, warnings })
}

pub fn series_from_rows(rows: &[io::KOfHRow]) -> Result<ScalingSeries> {
    let prov = rows
        .iter()
        .map(|r| if r.lower_bound_only { Provenance::LowerBoundOnly } else { Provenance::Converged })
        .collect();
    ScalingSeries::new(rows.iter().map(|r| r.h).collect(), rows.iter().map(|r| r.sup_norm).collect(), prov)
}

/// Fits the series in `out/series.csv`; writes `fits.csv`.
pub fn run_fit(out: &Path) -> Result<Classification> {
    let series = io::read_series(&out.join(io::SERIES_CSV))?;
    let c = classify(&series)?;
    io::write_fits(&out.join(io::FITS_CSV), &c)?;
    Ok(c)
}

#[derive(Clone, Debug)]
pub struct CertificateOutcome {
    pub certificate: EhrenfestCertificate,
    pub series: ObservableSeries,
}

/// `K(h)` from `kofh.csv` when it holds a row for `h`, else from a fresh sweep.
fn kofh_for(cfg: &ExperimentConfig, out: &Path, h: f64, op: &DiscreteOperator) -> Result<crate::resolvent::KOfH> {
    let path = out.join(io::KOFH_CSV);
    if path.is_file() {
        if let Some(r) = io::read_kofh(&path)?.into_iter().find(|r| (r.h - h).abs() <= 1e-12 * h) {
            return Ok(crate::resolvent::KOfH::new(r.h, r.sup_norm, r.argmax_z));
        }
    }
    Ok(sweep(op, &cfg.zsweep()?, &cfg.sweep)?.kofh)
}

/// Certificate at `h`; writes the key/value file and the CSV row, and with
/// `dump` also the observable series and the initial coherent state.
pub fn run_certificate(cfg: &ExperimentConfig, h: f64, out: &Path, dump: bool) -> Result<CertificateOutcome> {
    run_certificate_with(cfg, h, out, dump, |_| {})
}

/// [`run_certificate`] with a hook that may alter the operator before use.
pub fn run_certificate_with(
    cfg: &ExperimentConfig,
    h: f64,
    out: &Path,
    dump: bool,
    hook: impl FnOnce(&mut DiscreteOperator),
) -> Result<CertificateOutcome> {
    let report = run_classify(cfg, out)?;
    if report.classification != Trapping::Trapping {
        return Err(LabError::Usage(format!(
            "energy {} is non-trapping for this potential; a certificate needs trapping",
            cfg.e0
        )));
    }
    let mut op = operator_at(cfg, h, report.spatial_hull)?;
    hook(&mut op);
    let k = kofh_for(cfg, out, h, &op)?;
    let opts = CertifyOptions { dt: Some(cfg.dt_over_h * h), ..cfg.certify.clone() };
    let (certificate, series) = certify(&op, &cfg.phi()?, &report, &k, &opts)?;
    io::write_certificate_txt(&io::certificate_txt(out, h), &certificate)?;
    io::upsert_certificate_csv(&out.join(io::CERTIFICATE_CSV), &certificate)?;
    if dump {
        io::write_observable(&io::observable_csv(out, h), &series)?;
        if let (Some(grid), Some(center)) = (&op.grid, report.coherent_center()) {
            io::write_wavefunction(&io::wavefunction_csv(out, h), &grid.xs(), &coherent_state(grid, center)?)?;
        }
    }
    Ok(CertificateOutcome { certificate, series })
}
