use trapping_lab::classical::Trapping;
use trapping_lab::lab::{classify_energy, run_certificate_with, sweep_at, ExperimentConfig};

fn config(family: &str, params: &str, e0: f64) -> ExperimentConfig {
    ExperimentConfig::from_toml_str(&format!(
        r#"
[potential]
family = "{family}"
{params}

[experiment]
E0 = {e0}
h_list = ["1/16"]
"#
    ))
    .unwrap()
}

#[test]
fn bump_is_non_trapping() {
    let r = classify_energy(&config("AttractiveBump", "A = 1.0", 1.0)).unwrap();
    assert_eq!(r.classification, Trapping::NonTrapping);
    assert!(r.gamma.is_none());
    assert!(r.spatial_hull.is_none());
}

#[test]
fn eckart_traps_at_the_barrier_top() {
    let r = classify_energy(&config("EckartBarrier", "V0 = 1.0\nw = 1.0", 1.0)).unwrap();
    assert_eq!(r.classification, Trapping::Trapping);
    assert!((r.gamma.unwrap() - 2.0).abs() <= 1e-3, "{:?}", r.gamma);
    let (a, b) = r.spatial_hull.unwrap();
    assert!(a <= 0.0 && b >= 0.0 && b - a < 1.0);
}

#[test]
fn eckart_below_the_top_is_non_trapping() {
    let r = classify_energy(&config("EckartBarrier", "V0 = 1.0\nw = 1.0", 0.5)).unwrap();
    assert_eq!(r.classification, Trapping::NonTrapping);
}

#[test]
fn double_barrier_traps_between_the_walls() {
    let r = classify_energy(&config("DoubleBarrier", "V0 = 2.0\nd = 4.0\nw = 1.0", 1.0)).unwrap();
    assert_eq!(r.classification, Trapping::Trapping);
    let (a, b) = r.spatial_hull.unwrap();
    assert!(a < -2.0 && b > 2.0);
}

#[test]
fn vanishing_cutoff_fails_cleanly() {
    let cfg = config("EckartBarrier", "V0 = 1.0\nw = 1.0", 1.0);
    let dir = tempfile::tempdir().unwrap();
    let out = run_certificate_with(&cfg, 1.0 / 16.0, dir.path(), false, |op| op.chi.iter_mut().for_each(|c| *c = 0.0))
        .unwrap();
    let cert = out.certificate;
    assert_eq!(cert.min_observable, 0.0);
    assert_eq!(cert.k_measured, 0.0);
    assert!(!cert.bound_ok);
    assert!(!cert.passed());
    assert!(!cert.is_void());
}

fn bump_k(cfg: &ExperimentConfig) -> f64 {
    let (s, _) = sweep_at(cfg, 1.0 / 32.0, None).unwrap();
    s.kofh.k
}

#[test]
fn bump_resolvent_is_discretization_stable() {
    let base = config("AttractiveBump", "A = 1.0", 1.0);
    let k0 = bump_k(&base);
    let within = |k: f64, what: &str| assert!((k / k0 - 1.0).abs() <= 0.2, "{what}: {k} vs {k0}");

    let mut fine = base.clone();
    fine.points_per_wavelength *= 2.0;
    within(bump_k(&fine), "grid doubled");

    for eta in [0.5, 2.0] {
        let mut c = base.clone();
        c.cap.eta = eta;
        within(bump_k(&c), &format!("eta = {eta}"));
    }

    let mut dense = base.clone();
    dense.z_count = 2 * dense.z_count - 1;
    within(bump_k(&dense), "z samples doubled");
}
