//! Summary table and static SVG plots built from a run directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{LabError, Result};
use crate::scaling::{Model, ModelFit, ScalingSeries};

use super::io;

pub const SUMMARY_TXT: &str = "summary.txt";
pub const NORM_SVG: &str = "norm_vs_h.svg";
pub const LOG_SVG: &str = "kh_vs_logh.svg";
pub const OBSERVABLE_SVG: &str = "observable.svg";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mark {
    Points,
    Line,
}

#[derive(Clone, Debug)]
pub struct Layer {
    pub label: String,
    pub mark: Mark,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Plot {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    pub layers: Vec<Layer>,
    /// Shown in the middle of an empty plot.
    pub note: Option<String>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Renders a plot as a standalone SVG document; identical input gives identical bytes.
pub fn render_svg(plot: &Plot) -> String {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let all: Vec<(f64, f64)> = plot.layers.iter().flat_map(|l| l.points.iter().filter(finite).copied()).collect();
    let (x0, x1) = range(all.iter().map(|p| p.0));
    let (y0, y1) = range(all.iter().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    for k in 0..=TICKS {
        let f = k as f64 / TICKS as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            TOP,
            TOP + ph,
            TOP + ph + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            LEFT,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(&plot.xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&plot.ylabel)
    );
    for layer in &plot.layers {
        let pts: Vec<(f64, f64)> = layer.points.iter().filter(finite).map(|&(x, y)| (sx(x), sy(y))).collect();
        match layer.mark {
            Mark::Line if pts.len() >= 2 => {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                    path.join(" "),
                    layer.color
                );
            }
            _ => {
                for (x, y) in &pts {
                    let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{}"/>"#, layer.color);
                }
            }
        }
    }
    for (i, layer) in plot.layers.iter().enumerate() {
        let y = TOP + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 10.0,
            y - 9.0,
            layer.color,
            LEFT + 26.0,
            y,
            escape(&layer.label)
        );
    }
    if let Some(note) = &plot.note {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" fill="gray">{}</text>"#,
            LEFT + pw / 2.0,
            TOP + ph / 2.0,
            escape(note)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fit_curve(fit: &ModelFit, series: &ScalingSeries, transform: impl Fn(f64, f64) -> (f64, f64)) -> Vec<(f64, f64)> {
    let (h_hi, h_lo) = (series.h[0], *series.h.last().unwrap());
    (0..=64)
        .map(|k| {
            let h = (h_hi.ln() + (h_lo.ln() - h_hi.ln()) * k as f64 / 64.0).exp();
            transform(h, fit.predict(h))
        })
        .collect()
}

fn find_fit(fits: &[ModelFit], model: Model) -> Option<&ModelFit> {
    fits.iter().find(|f| f.model == model)
}

/// Observable dumps in the directory, sorted by name.
fn observable_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("observable_h") && n.ends_with(".csv"))
        })
        .collect();
    files.sort();
    Ok(files)
}

#[derive(Clone, Debug)]
pub struct ReportOutcome {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Writes `summary.txt` and the three plots into `dir` from its `series.csv`,
/// `fits.csv` and (optionally) certificate and observable artifacts.
pub fn emit_report(dir: &Path) -> Result<ReportOutcome> {
    if !dir.is_dir() {
        return Err(LabError::MissingInput(format!("run directory {} does not exist", dir.display())));
    }
    let series = io::read_series(&dir.join(io::SERIES_CSV))?;
    let fits = io::read_fits(&dir.join(io::FITS_CSV))?;
    if fits.len() != 3 || fits.iter().filter(|f| f.selected).count() != 1 {
        return Err(LabError::MissingInput(format!(
            "{} must hold three fits with one selected",
            dir.join(io::FITS_CSV).display()
        )));
    }

    let mut summary = String::new();
    let _ = writeln!(summary, "resolvent norm series");
    let _ = writeln!(summary, "{:>14} {:>22} {:>22} {:>18}", "h", "sup_norm", "h*sup_norm", "provenance");
    for ((h, v), p) in series.h.iter().zip(&series.values).zip(&series.provenance) {
        let _ = writeln!(summary, "{:>14.8} {:>22.12e} {:>22.12e} {:>18}", h, v, h * v, p.name());
    }
    let _ = writeln!(summary);
    let _ = writeln!(summary, "fits (* = selected)");
    let _ = writeln!(
        summary,
        "  {:<14} {:>16} {:>16} {:>14} {:>14} {:>10}",
        "model", "C", "p_or_nu", "residual", "normalized", "ambiguous"
    );
    for f in &fits {
        let _ = writeln!(
            summary,
            "{} {:<14} {:>16.8e} {:>16.8e} {:>14.6e} {:>14.6e} {:>10}",
            if f.selected { "*" } else { " " },
            f.model.name(),
            f.c,
            f.param,
            f.residual,
            f.normalized_residual,
            f.ambiguous
        );
    }
    let cert_path = dir.join(io::CERTIFICATE_CSV);
    if cert_path.is_file() {
        let _ = writeln!(summary);
        let _ = writeln!(summary, "certificates");
        let mut rdr = csv::Reader::from_path(&cert_path)?;
        let header = rdr.headers()?.clone();
        for rec in rdr.records() {
            let rec = rec?;
            let line: Vec<String> = header
                .iter()
                .zip(rec.iter())
                .filter(|(k, _)| {
                    ["h", "gamma", "min_observable", "kato_integral", "k_measured", "paper_lower_bound", "kato_ok", "bound_ok", "void"]
                        .contains(k)
                })
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            let _ = writeln!(summary, "  {}", line.join(" "));
        }
    }

    let data = |f: &dyn Fn(f64, f64) -> (f64, f64)| -> Vec<(f64, f64)> {
        series.h.iter().zip(&series.values).map(|(&h, &v)| f(h, v)).collect()
    };
    let loglog = |h: f64, v: f64| ((1.0 / h).ln(), v.ln());
    let mut norm_layers = vec![Layer { label: "measured".into(), mark: Mark::Points, color: "#1f77b4", points: data(&loglog) }];
    if let Some(f) = find_fit(&fits, Model::PowerLaw) {
        norm_layers.push(Layer {
            label: format!("power fit p = {:.3}", f.param),
            mark: Mark::Line,
            color: "#d62728",
            points: fit_curve(f, &series, loglog),
        });
    }
    let norm_plot = Plot {
        title: "truncated resolvent norm".into(),
        xlabel: "ln(1/h)".into(),
        ylabel: "ln sup_z ||chi R chi||".into(),
        layers: norm_layers,
        note: None,
    };

    let loglin = |h: f64, v: f64| (h.ln().abs(), h * v);
    let mut log_layers = vec![Layer { label: "measured".into(), mark: Mark::Points, color: "#1f77b4", points: data(&loglin) }];
    if let Some(f) = find_fit(&fits, Model::LogEnhanced) {
        log_layers.push(Layer {
            label: format!("log-enhanced fit C = {:.4}", f.c),
            mark: Mark::Line,
            color: "#2ca02c",
            points: fit_curve(f, &series, loglin),
        });
    }
    let log_plot = Plot {
        title: "normalized resolvent size".into(),
        xlabel: "|ln h|".into(),
        ylabel: "h * sup_z ||chi R chi||".into(),
        layers: log_layers,
        note: None,
    };

    let obs_files = observable_files(dir)?;
    let mut obs_layers = Vec::new();
    let palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b"];
    for (i, path) in obs_files.iter().enumerate() {
        let label = path.file_stem().and_then(|n| n.to_str()).unwrap_or("series").to_string();
        obs_layers.push(Layer {
            label,
            mark: Mark::Line,
            color: palette[i % palette.len()],
            points: io::read_observable(path)?,
        });
    }
    let obs_plot = Plot {
        title: "coherent-state observable".into(),
        xlabel: "t".into(),
        ylabel: "||chi phi(P) u(t)||^2".into(),
        note: obs_layers.is_empty().then(|| "no observable series in this run".to_string()),
        layers: obs_layers,
    };

    let mut files = Vec::new();
    for (name, plot) in [(NORM_SVG, &norm_plot), (LOG_SVG, &log_plot), (OBSERVABLE_SVG, &obs_plot)] {
        let path = dir.join(name);
        fs::write(&path, render_svg(plot))?;
        files.push(path);
    }
    let path = dir.join(SUMMARY_TXT);
    fs::write(&path, &summary)?;
    files.push(path);
    Ok(ReportOutcome { summary, files })
}
