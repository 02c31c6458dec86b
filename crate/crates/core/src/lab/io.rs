//! CSV and key/value artifacts written and read by the driver.

use std::fs;
use std::path::{Path, PathBuf};

use crate::classical::TrappingReport;
use crate::ehrenfest::{EhrenfestCertificate, ObservableSeries};
use crate::error::{LabError, Result};
use crate::quantum::WaveFunction;
use crate::resolvent::SweepResult;
use crate::scaling::{Classification, Model, ModelFit, Provenance, ScalingSeries};

pub const TRAPPING_CSV: &str = "trapping.csv";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const KOFH_CSV: &str = "kofh.csv";
pub const SERIES_CSV: &str = "series.csv";
pub const FITS_CSV: &str = "fits.csv";
pub const CERTIFICATE_CSV: &str = "certificate.csv";

pub const TRAPPING_HEADER: [&str; 10] =
    ["kind", "x", "xi", "excursion", "class", "energy", "classification", "gamma", "hull_min", "hull_max"];
pub const SWEEP_HEADER: [&str; 6] = ["h", "z", "norm", "iterations", "converged", "refined_pass"];
pub const KOFH_HEADER: [&str; 7] = ["h", "sup_norm", "K", "argmax_z", "lower_bound_only", "samples", "points"];
pub const SERIES_HEADER: [&str; 3] = ["h", "value", "provenance"];
pub const FITS_HEADER: [&str; 8] =
    ["model", "C", "p_or_nu", "residual", "selected", "ambiguous", "normalized_residual", "relative_residual"];

/// File name tag for one `h`: `1/64 -> "64"`, otherwise the value itself.
pub fn h_tag(h: f64) -> String {
    let inv = 1.0 / h;
    if (inv - inv.round()).abs() < 1e-9 * inv {
        format!("{}", inv.round() as u64)
    } else {
        format!("{h}")
    }
}

pub fn certificate_txt(dir: &Path, h: f64) -> PathBuf {
    dir.join(format!("certificate_h{}.txt", h_tag(h)))
}

pub fn observable_csv(dir: &Path, h: f64) -> PathBuf {
    dir.join(format!("observable_h{}.csv", h_tag(h)))
}

pub fn wavefunction_csv(dir: &Path, h: f64) -> PathBuf {
    dir.join(format!("wavefunction_h{}.csv", h_tag(h)))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    if !path.is_file() {
        return Err(LabError::MissingInput(format!("{} not found", path.display())));
    }
    Ok(csv::Reader::from_path(path)?)
}

fn field<'a>(rec: &'a csv::StringRecord, i: usize, path: &Path) -> Result<&'a str> {
    rec.get(i)
        .ok_or_else(|| LabError::MissingInput(format!("{}: short row {:?}", path.display(), rec)))
}

fn num(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<f64> {
    let s = field(rec, i, path)?;
    s.parse()
        .map_err(|_| LabError::MissingInput(format!("{}: '{s}' is not a number", path.display())))
}

fn check_header(rdr: &mut csv::Reader<fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = rdr.headers()?;
    if header.iter().take(expected.len()).ne(expected.iter().copied()) {
        return Err(LabError::MissingInput(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    Ok(())
}

pub fn write_trapping(path: &Path, report: &TrappingReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(TRAPPING_HEADER)?;
    for (p, ex) in report.trapped_samples.iter().zip(&report.excursions) {
        w.write_record([
            "trapped".into(),
            p.x[0].to_string(),
            p.xi[0].to_string(),
            ex.to_string(),
            "trapped".into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    for (p, class) in &report.semi_trapped {
        w.write_record([
            "semi".into(),
            p.x[0].to_string(),
            p.xi[0].to_string(),
            String::new(),
            class.name().into(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
        ])?;
    }
    let (lo, hi) = report.spatial_hull.unzip();
    w.write_record([
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        report.energy.to_string(),
        report.classification.name().into(),
        opt(report.gamma),
        opt(lo),
        opt(hi),
    ])?;
    w.flush()?;
    Ok(())
}

/// Summary row of a trapping file: `(classification, gamma, hull)`.
pub fn read_trapping_summary(path: &Path) -> Result<(String, Option<f64>, Option<(f64, f64)>)> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &TRAPPING_HEADER, path)?;
    for rec in rdr.records() {
        let rec = rec?;
        if field(&rec, 0, path)? == "summary" {
            let parse = |i: usize| -> Result<Option<f64>> {
                let s = field(&rec, i, path)?;
                if s.is_empty() {
                    Ok(None)
                } else {
                    num(&rec, i, path).map(Some)
                }
            };
            let hull = parse(8)?.zip(parse(9)?);
            return Ok((field(&rec, 6, path)?.to_string(), parse(7)?, hull));
        }
    }
    Err(LabError::MissingInput(format!("{}: no summary row", path.display())))
}

pub fn write_sweeps(path: &Path, sweeps: &[SweepResult]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SWEEP_HEADER)?;
    for s in sweeps {
        for r in &s.samples {
            w.write_record([
                s.kofh.h.to_string(),
                r.z.to_string(),
                r.norm.to_string(),
                r.iterations.to_string(),
                r.converged.to_string(),
                (r.pass as u8).to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row of `kofh.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct KOfHRow {
    pub h: f64,
    pub sup_norm: f64,
    pub k: f64,
    pub argmax_z: f64,
    pub lower_bound_only: bool,
    pub samples: usize,
    pub points: usize,
}

impl KOfHRow {
    pub fn from_sweep(s: &SweepResult, points: usize) -> Self {
        Self {
            h: s.kofh.h,
            sup_norm: s.kofh.sup_norm,
            k: s.kofh.k,
            argmax_z: s.kofh.argmax_z,
            lower_bound_only: s.lower_bound_only,
            samples: s.samples.len(),
            points,
        }
    }
}

pub fn write_kofh(path: &Path, rows: &[KOfHRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(KOFH_HEADER)?;
    for r in rows {
        w.write_record([
            r.h.to_string(),
            r.sup_norm.to_string(),
            r.k.to_string(),
            r.argmax_z.to_string(),
            r.lower_bound_only.to_string(),
            r.samples.to_string(),
            r.points.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_bool(s: &str, path: &Path) -> Result<bool> {
    s.parse()
        .map_err(|_| LabError::MissingInput(format!("{}: '{s}' is not a boolean", path.display())))
}

pub fn read_kofh(path: &Path) -> Result<Vec<KOfHRow>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &KOFH_HEADER, path)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(KOfHRow {
                h: num(&rec, 0, path)?,
                sup_norm: num(&rec, 1, path)?,
                k: num(&rec, 2, path)?,
                argmax_z: num(&rec, 3, path)?,
                lower_bound_only: parse_bool(field(&rec, 4, path)?, path)?,
                samples: num(&rec, 5, path)? as usize,
                points: num(&rec, 6, path)? as usize,
            })
        })
        .collect()
}

pub fn write_series(path: &Path, series: &ScalingSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(SERIES_HEADER)?;
    for ((h, v), p) in series.h.iter().zip(&series.values).zip(&series.provenance) {
        w.write_record([h.to_string(), v.to_string(), p.name().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series(path: &Path) -> Result<ScalingSeries> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &SERIES_HEADER, path)?;
    let (mut h, mut v, mut p) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        h.push(num(&rec, 0, path)?);
        v.push(num(&rec, 1, path)?);
        p.push(Provenance::from_name(field(&rec, 2, path)?)?);
    }
    ScalingSeries::new(h, v, p)
}

pub fn write_fits(path: &Path, c: &Classification) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(FITS_HEADER)?;
    for f in &c.fits {
        w.write_record([
            f.model.name().to_string(),
            f.c.to_string(),
            f.param.to_string(),
            f.residual.to_string(),
            f.selected.to_string(),
            f.ambiguous.to_string(),
            f.normalized_residual.to_string(),
            f.relative_residual.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_fits(path: &Path) -> Result<Vec<ModelFit>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &FITS_HEADER, path)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok(ModelFit {
                model: Model::from_name(field(&rec, 0, path)?)?,
                c: num(&rec, 1, path)?,
                param: num(&rec, 2, path)?,
                residual: num(&rec, 3, path)?,
                selected: parse_bool(field(&rec, 4, path)?, path)?,
                ambiguous: parse_bool(field(&rec, 5, path)?, path)?,
                normalized_residual: num(&rec, 6, path)?,
                relative_residual: num(&rec, 7, path)?,
            })
        })
        .collect()
}

pub fn write_certificate_txt(path: &Path, cert: &EhrenfestCertificate) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut text = String::new();
    for (k, v) in cert.fields() {
        text.push_str(&format!("{k} = {v}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}

/// Replaces the row with the same `h` in the certificate CSV, keeping rows sorted by decreasing `h`.
pub fn upsert_certificate_csv(path: &Path, cert: &EhrenfestCertificate) -> Result<()> {
    let fields = cert.fields();
    let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    let mut rows: Vec<Vec<String>> = Vec::new();
    if path.is_file() {
        let mut rdr = csv::Reader::from_path(path)?;
        if rdr.headers()?.iter().eq(header.iter().copied()) {
            for rec in rdr.records() {
                rows.push(rec?.iter().map(str::to_string).collect());
            }
        }
    }
    let h_of = |row: &Vec<String>| row.first().and_then(|s| s.parse::<f64>().ok()).unwrap_or(0.0);
    rows.retain(|r| (h_of(r) - cert.h).abs() > 1e-12 * cert.h);
    rows.push(fields.into_iter().map(|(_, v)| v).collect());
    rows.sort_by(|a, b| h_of(b).partial_cmp(&h_of(a)).unwrap());
    let mut w = writer(path)?;
    w.write_record(&header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_observable(path: &Path, s: &ObservableSeries) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "value"])?;
    for (t, v) in s.times.iter().zip(&s.values) {
        w.write_record([t.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_observable(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut rdr = reader(path)?;
    check_header(&mut rdr, &["t", "value"], path)?;
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            Ok((num(&rec, 0, path)?, num(&rec, 1, path)?))
        })
        .collect()
}

pub fn write_wavefunction(path: &Path, xs: &[f64], u: &WaveFunction) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x", "re", "im"])?;
    for (x, v) in xs.iter().zip(&u.values) {
        w.write_record([x.to_string(), v.re.to_string(), v.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
