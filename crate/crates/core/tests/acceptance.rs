//! Acceptance criteria. One PASS/FAIL line per criterion; nonzero exit on any failure.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trapping_lab::classical::{flow, sample_trapped_set, tangent_flow, ClassicalParams, PhasePoint};
use trapping_lab::lab::{operator_at, run_certificate, run_sweep, sweep_at, ExperimentConfig, SweepOutcome};
use trapping_lab::potentials::PotentialSpec;
use trapping_lab::quantum::filter::FILTER_TOL;
use trapping_lab::quantum::{
    apply_filter, build_operator, coherent_state, dense_filter, propagate, BumpSpec, CapSpec, ChebyshevFilter,
    Damping, GridSpec, Propagator,
};
use trapping_lab::resolvent::{estimate_norm, NormOptions};
use trapping_lab::scaling::{classify, fit_exponential, fit_log_enhanced, fit_power, Model};

use common::{dense_crank_nicolson, dense_truncated, random_wave, rel_diff, small_operator};

type Outcome = Result<(bool, String), String>;

fn config(name: &str) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn h_list(cfg: &ExperimentConfig) -> String {
    let inv: Vec<String> = cfg.h_list.iter().map(|h| format!("1/{}", (1.0 / h).round())).collect();
    inv.join(",")
}

fn criterion_1(out: &Path) -> Outcome {
    let cfg = config("attractive_bump.toml");
    let s = run_sweep(&cfg, out).map_err(|e| e.to_string())?;
    let series = s.series.ok_or("no series")?;
    let power = fit_power(&series);
    let log = fit_log_enhanced(&series);
    let ok = (-1.2..=-0.8).contains(&power.param) && power.normalized_residual < log.normalized_residual;
    Ok((
        ok,
        format!(
            "h = {{{}}}: p = {:.4} (want [-1.2, -0.8]), normalized residual power {:.3e} < log-enhanced {:.3e}",
            h_list(&cfg),
            power.param,
            power.normalized_residual,
            log.normalized_residual
        ),
    ))
}

fn criterion_2(s: &SweepOutcome, cfg: &ExperimentConfig) -> Outcome {
    let mut rows: Vec<(f64, f64)> = s.rows.iter().map(|r| (r.h.ln().abs(), r.k)).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let drops: Vec<f64> = rows.windows(2).filter(|w| w[1].1 < w[0].1).map(|w| 1.0 - w[1].1 / w[0].1).collect();
    let monotone = drops.len() <= 1 && drops.iter().all(|&d| d <= 0.05);
    let series = s.series.as_ref().ok_or("no series")?;
    let log = fit_log_enhanced(series);
    let ok = monotone && log.c > 0.0 && log.relative_residual <= 0.2;
    let ks: Vec<String> = rows.iter().map(|r| format!("{:.3}", r.1)).collect();
    Ok((
        ok,
        format!(
            "h = {{{}}}: K = [{}] ({} inversions), log-enhanced C = {:.4}, relative residual {:.3e} (want <= 0.2)",
            h_list(cfg),
            ks.join(", "),
            drops.len(),
            log.c,
            log.relative_residual
        ),
    ))
}

fn criterion_3(out: &Path) -> Outcome {
    let cfg = config("double_barrier.toml");
    let s = run_sweep(&cfg, out).map_err(|e| e.to_string())?;
    let series = s.series.ok_or("no series")?;
    let full = fit_exponential(&series);
    let largest = (0..series.len()).max_by(|&a, &b| series.h[a].total_cmp(&series.h[b])).unwrap();
    let dropped = fit_exponential(&series.without(largest).map_err(|e| e.to_string())?);
    let cls = classify(&series).map_err(|e| e.to_string())?;
    let shift = (dropped.param / full.param - 1.0).abs();
    let ok = full.param > 0.0 && shift <= 0.3 && cls.selected == Model::Exponential;
    Ok((
        ok,
        format!(
            "h = {{{}}}: nu = {:.4}, nu without h = {} is {:.4} (shift {:.1}%, want <= 30%), selected {}{}",
            h_list(&cfg),
            full.param,
            format_args!("1/{}", (1.0 / series.h[largest]).round()),
            dropped.param,
            100.0 * shift,
            cls.selected.name(),
            if cls.ambiguous { " (ambiguous)" } else { "" }
        ),
    ))
}

fn certificates(cfg: &ExperimentConfig, out: &Path, hs: &[f64]) -> Result<Vec<trapping_lab::ehrenfest::EhrenfestCertificate>, String> {
    hs.iter()
        .map(|&h| run_certificate(cfg, h, out, false).map(|c| c.certificate).map_err(|e| e.to_string()))
        .collect()
}

fn criterion_4(c: &trapping_lab::ehrenfest::EhrenfestCertificate) -> Outcome {
    let limit = 8.0 * c.k_measured * 1.15;
    Ok((
        !c.is_void() && c.kato_integral <= limit,
        format!("h = 1/64: kato integral {:.5} <= 8 K 1.15 = {:.5} (K = {:.5})", c.kato_integral, limit, c.k_measured),
    ))
}

fn criterion_5(c: &trapping_lab::ehrenfest::EhrenfestCertificate) -> Outcome {
    let oracle = 2.0;
    let ok = !c.is_void() && c.min_observable >= 0.7 && (c.gamma - oracle).abs() <= 1e-3;
    Ok((
        ok,
        format!(
            "h = 1/64: min observable {:.6} over |t| <= {:.4} (want >= 0.7), Gamma = {:.6} (oracle 2)",
            c.min_observable, c.t_e, c.gamma
        ),
    ))
}

fn criterion_6(certs: &[trapping_lab::ehrenfest::EhrenfestCertificate]) -> Outcome {
    let parts: Vec<String> = certs
        .iter()
        .map(|c| {
            format!(
                "h = 1/{}: bound {:.5} <= K 1.15 = {:.5} -> {}",
                (1.0 / c.h).round(),
                c.paper_lower_bound,
                c.k_measured * 1.15,
                c.bound_ok
            )
        })
        .collect();
    Ok((certs.iter().all(|c| c.bound_ok), parts.join("; ")))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let eckart = PotentialSpec::eckart(1.0, 1.0).unwrap();

    let opts = NormOptions { tol: 1e-12, max_iter: 5000, ..Default::default() };
    let mut svd = 0.0f64;
    for _ in 0..20 {
        let z = rng.gen_range(0.8..1.2);
        let eta = rng.gen_range(0.25..2.0);
        let radius = rng.gen_range(0.5..3.0);
        let op = small_operator(200, 0.25, &eckart, eta, BumpSpec::symmetric(radius, 1.5).unwrap());
        let got = estimate_norm(&op, z, &opts).map_err(|e| e.to_string())?.norm;
        let exact = dense_truncated(&op, z).singular_values().iter().copied().fold(0.0, f64::max);
        svd = svd.max((got - exact).abs() / exact);
    }

    let grid = GridSpec::new(8.0, 512, 1.0 / 16.0, 1.2, 8.0).unwrap();
    let op = build_operator(&grid, &eckart, CapSpec { r_a: 5.0, eta: 1.0 }, BumpSpec::symmetric(3.0, 2.0).unwrap())
        .map_err(|e| e.to_string())?;
    let bump = BumpSpec::energy_window(1.0, 0.2).unwrap();
    let degree = ChebyshevFilter::auto(&bump, op.spectral_bounds, FILTER_TOL, Damping::None)
        .map_err(|e| e.to_string())?
        .degree();
    let u = random_wave(&mut rng, op.len(), op.dx);
    let cheb = apply_filter(&op, &bump, &u, degree).map_err(|e| e.to_string())?;
    let dense = dense_filter(&op, |e| bump.eval(e), &u).map_err(|e| e.to_string())?;
    let filter = rel_diff(&cheb.values, &dense.values) * dense.norm() / u.norm();

    let h = 1.0 / 8.0;
    let grid = GridSpec::new(8.0, 256, h, 1.2, 8.0).unwrap();
    let op = build_operator(&grid, &PotentialSpec::zero(), CapSpec { r_a: 5.0, eta: 1.0 }, BumpSpec::symmetric(3.0, 2.0).unwrap())
        .map_err(|e| e.to_string())?;
    let u0 = coherent_state(&grid, &PhasePoint::new_1d(-1.0, 0.5)).map_err(|e| e.to_string())?;
    let got = propagate(&op, &u0, 0.25, h / 20.0).map_err(|e| e.to_string())?;
    let prop = rel_diff(&got.values, &dense_crank_nicolson(&op, &u0, 0.25, 40));

    let mut gamma = 0.0f64;
    for v0 in [1.0f64, 4.0] {
        let r = sample_trapped_set(&PotentialSpec::eckart(v0, 1.0).unwrap(), v0, &ClassicalParams::default())
            .map_err(|e| e.to_string())?;
        gamma = gamma.max((r.gamma.ok_or("no gamma")? - 2.0 * v0.sqrt()).abs());
    }

    let ok = svd <= 1e-6 && filter <= 1e-5 && prop <= 1e-4 && gamma <= 1e-3;
    Ok((
        ok,
        format!(
            "norm vs SVD {svd:.2e} (<= 1e-6), filter N=512 {filter:.2e} (<= 1e-5), propagator N=256 {prop:.2e} (<= 1e-4), Gamma {gamma:.2e} (<= 1e-3)"
        ),
    ))
}

fn criterion_8() -> Outcome {
    let cfg = config("eckart.toml");
    let h = 1.0 / 64.0;
    let op = operator_at(&cfg, h, Some((0.0, 0.0))).map_err(|e| e.to_string())?;
    let grid = op.grid.clone().ok_or("no grid")?;
    let mut u = coherent_state(&grid, &PhasePoint::new_1d(0.0, 0.0)).map_err(|e| e.to_string())?;
    let n0 = u.norm();
    let mut p = Propagator::new(&op, h / 20.0).map_err(|e| e.to_string())?;
    for _ in 0..10_000 {
        p.step(&mut u.values);
    }
    let unitarity = (u.norm() - n0).abs();

    let spec = PotentialSpec::eckart(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut drift, mut det) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let x = rng.gen_range(-3.0..3.0);
        let xi = (1.0 - spec.value(x)).max(0.0).sqrt() * if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let rho = PhasePoint::new_1d(x, xi);
        let t = rng.gen_range(1.0..5.0);
        drift = drift.max(flow(&spec, &rho, t, 1e-10).map_err(|e| e.to_string())?.energy_drift);
        let (_, j) = tangent_flow(&spec, &rho, t, 1e-10).map_err(|e| e.to_string())?;
        det = det.max((j.determinant() - 1.0).abs());
    }

    let bump = config("attractive_bump.toml");
    let k_at = |eta: f64| -> Result<f64, String> {
        let mut c = bump.clone();
        c.cap.eta = eta;
        Ok(sweep_at(&c, 1.0 / 32.0, None).map_err(|e| e.to_string())?.0.kofh.k)
    };
    let ks = [k_at(0.5)?, k_at(1.0)?, k_at(2.0)?];
    let eta_dev = ks.iter().map(|k| (k / ks[1] - 1.0).abs()).fold(0.0, f64::max);

    let ok = unitarity <= 1e-8 && drift <= 1e-10 && det <= 1e-6 && eta_dev <= 0.2;
    Ok((
        ok,
        format!(
            "unitarity over 1e4 steps {unitarity:.2e} (<= 1e-8), energy drift {drift:.2e} (<= 1e-10), |det J - 1| {det:.2e} (<= 1e-6), K at eta 0.5/1/2 = {:.6}/{:.6}/{:.6}, deviation {:.3e} (<= 0.2)",
            ks[0],
            ks[1],
            ks[2],
            eta_dev
        ),
    ))
}

fn report(n: usize, name: &str, start: Instant, outcome: Outcome) -> bool {
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok((true, detail)) => {
            println!("PASS [{n}] {name}: {detail} [{secs:.1}s]");
            true
        }
        Ok((false, detail)) => {
            println!("FAIL [{n}] {name}: {detail} [{secs:.1}s]");
            false
        }
        Err(e) => {
            println!("FAIL [{n}] {name}: error: {e} [{secs:.1}s]");
            false
        }
    }
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = |name: &str| -> PathBuf {
        let d = tmp.path().join(name);
        std::fs::create_dir_all(&d).unwrap();
        d
    };
    let mut ok = true;

    let t = Instant::now();
    ok &= report(1, "non-trapping scaling", t, criterion_1(&dir("bump")));

    let t = Instant::now();
    let eckart = config("eckart.toml");
    let eckart_dir = dir("eckart");
    let sweep = run_sweep(&eckart, &eckart_dir).map_err(|e| e.to_string());
    ok &= report(2, "trapping lower bound", t, sweep.as_ref().map_err(Clone::clone).and_then(|s| criterion_2(s, &eckart)));

    let t = Instant::now();
    ok &= report(3, "well in an island", t, criterion_3(&dir("double_barrier")));

    let t = Instant::now();
    let certs = match &sweep {
        Ok(_) => certificates(&eckart, &eckart_dir, &[1.0 / 32.0, 1.0 / 64.0]),
        Err(e) => Err(e.clone()),
    };
    let at_64 = certs.as_ref().map(|c| c[1].clone()).map_err(Clone::clone);
    ok &= report(4, "Kato inequality", t, at_64.clone().and_then(|c| criterion_4(&c)));
    ok &= report(5, "Ehrenfest observable", t, at_64.and_then(|c| criterion_5(&c)));
    ok &= report(6, "final bound", t, certs.and_then(|c| criterion_6(&c)));

    let t = Instant::now();
    ok &= report(7, "oracle equivalences", t, criterion_7());

    let t = Instant::now();
    ok &= report(8, "invariant suites", t, criterion_8());

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
