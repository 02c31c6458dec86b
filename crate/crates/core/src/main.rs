use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use trapping_lab::lab::{self, config::parse_h_text, exit, ExperimentConfig};
use trapping_lab::{LabError, Result};

/// Resolvent growth and Ehrenfest-time experiments for 1D semiclassical Schrödinger operators.
#[derive(Parser, Debug)]
#[command(name = "trapping-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `[output] dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classical trapped-set scan at E0; writes trapping.csv.
    Classify(Common),
    /// Resolvent sweeps over h_list; writes sweep.csv, kofh.csv, series.csv.
    Sweep(Common),
    /// Coherent-state certificate at one h; exit 3 on failure, 4 when void.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Semiclassical parameter, e.g. 0.015625 or 1/64.
        #[arg(long, value_parser = parse_h_arg)]
        h: f64,
        /// Also write the observable series and the initial coherent state.
        #[arg(long)]
        dump: bool,
    },
    /// Fits series.csv against the three growth models; writes fits.csv.
    Fit(Common),
    /// Summary table and SVG plots from a run directory.
    Report(Common),
}

fn parse_h_arg(s: &str) -> std::result::Result<f64, String> {
    parse_h_text(s).map_err(|e| e.to_string())
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf)> {
    let path = common
        .config
        .as_deref()
        .ok_or_else(|| LabError::Usage("this command needs --config PATH".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    Ok((cfg, out))
}

/// `--out`, else the config's output directory.
fn out_dir(common: &Common) -> Result<PathBuf> {
    match (&common.out, &common.config) {
        (Some(out), _) => Ok(out.clone()),
        (None, Some(_)) => load(common).map(|(_, out)| out),
        (None, None) => Err(LabError::Usage("give --out DIR or --config PATH".into())),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Classify(common) => {
            let (cfg, out) = load(&common)?;
            ensure_dir(&out)?;
            let report = lab::run_classify(&cfg, &out)?;
            println!("classification = {}", report.classification.name());
            if let Some(g) = report.gamma {
                println!("gamma = {g}");
            }
            if let Some((a, b)) = report.spatial_hull {
                println!("hull = [{a}, {b}]");
            }
            println!("trapped_samples = {}", report.trapped_samples.len());
            Ok(exit::OK)
        }
        Command::Sweep(common) => {
            let (cfg, out) = load(&common)?;
            ensure_dir(&out)?;
            let outcome = lab::run_sweep(&cfg, &out)?;
            for r in &outcome.rows {
                println!(
                    "h = {:.8}  sup_norm = {:.6e}  K = {:.6}  argmax_z = {:.10}{}",
                    r.h,
                    r.sup_norm,
                    r.k,
                    r.argmax_z,
                    if r.lower_bound_only { "  (lower bound)" } else { "" }
                );
            }
            if outcome.warnings > 0 {
                eprintln!("warning: {} unconverged samples; flagged rows are lower bounds", outcome.warnings);
            }
            if outcome.series.is_none() {
                eprintln!("warning: fewer than 4 values of h; series.csv not written");
            }
            Ok(exit::OK)
        }
        Command::Certify { common, h, dump } => {
            let (cfg, out) = load(&common)?;
            ensure_dir(&out)?;
            let outcome = lab::run_certificate(&cfg, h, &out, dump)?;
            let cert = &outcome.certificate;
            for (k, v) in cert.fields() {
                println!("{k} = {v}");
            }
            Ok(if cert.is_void() {
                eprintln!("certificate void: {}", cert.void_reason.as_deref().unwrap_or_default());
                exit::CERTIFICATE_VOID
            } else if cert.passed() {
                exit::OK
            } else {
                exit::CERTIFICATE_FAILED
            })
        }
        Command::Fit(common) => {
            let out = out_dir(&common)?;
            let c = lab::run_fit(&out)?;
            for f in &c.fits {
                println!(
                    "{} {:<13} C = {:.6e}  p_or_nu = {:.6e}  normalized_residual = {:.3e}",
                    if f.selected { "*" } else { " " },
                    f.model.name(),
                    f.c,
                    f.param,
                    f.normalized_residual
                );
            }
            if c.ambiguous {
                println!("selection is ambiguous (residuals within 10%)");
            }
            Ok(exit::OK)
        }
        Command::Report(common) => {
            let out = out_dir(&common)?;
            let r = lab::emit_report(&out)?;
            print!("{}", r.summary);
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::INPUT
        }
    };
    ExitCode::from(code as u8)
}
