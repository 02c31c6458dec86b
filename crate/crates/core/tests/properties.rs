//! Structural invariants over randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;

use trapping_lab::classical::{classify_point, flow, tangent_flow, ClassicalParams, PhasePoint, PointClass};
use trapping_lab::ehrenfest::{kato_integral, observable_series, paper_lower_bound, ehrenfest_time};
use trapping_lab::potentials::PotentialSpec;
use trapping_lab::quantum::filter::FILTER_TOL;
use trapping_lab::quantum::{
    build_operator, coherent_state, propagate, BumpSpec, CapSpec, ChebyshevFilter, Damping, DiscreteOperator,
    GridSpec, WaveFunction,
};
use trapping_lab::resolvent::{estimate_norm, estimate_norm_with_vector, NormOptions, KOfH};
use trapping_lab::scaling::{classify, fit, Model, ScalingSeries};

fn family() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|a| PotentialSpec::attractive_bump(a).unwrap()),
        (0.2f64..4.0, 0.5f64..2.0).prop_map(|(v, w)| PotentialSpec::eckart(v, w).unwrap()),
        (0.5f64..3.0, 2.0f64..5.0, 0.5f64..1.5).prop_map(|(v, d, w)| PotentialSpec::double_barrier(v, d, w).unwrap()),
    ]
}

fn even_family() -> impl Strategy<Value = PotentialSpec> {
    prop_oneof![
        (0.2f64..4.0, 0.5f64..2.0).prop_map(|(v, w)| PotentialSpec::eckart(v, w).unwrap()),
        (0.5f64..3.0, 2.0f64..5.0, 0.5f64..1.5).prop_map(|(v, d, w)| PotentialSpec::double_barrier(v, d, w).unwrap()),
    ]
}

fn wave(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b)), n)
}

fn eckart_operator(points: usize, h: f64) -> DiscreteOperator {
    let grid = GridSpec::new(8.0, points, h, 1.2, 8.0).unwrap();
    build_operator(
        &grid,
        &PotentialSpec::eckart(1.0, 1.0).unwrap(),
        CapSpec { r_a: 5.0, eta: 1.0 },
        BumpSpec::symmetric(2.0, 2.0).unwrap(),
    )
    .unwrap()
}

fn l2(u: &[Complex64], dx: f64) -> f64 {
    (dx * u.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gradient_is_second_order(spec in family(), x in -10.0f64..10.0) {
        let fd = |d: f64| (spec.value(x + d) - spec.value(x - d)) / (2.0 * d);
        let e1 = (spec.d1(x) - fd(1e-3)).abs();
        let e2 = (spec.d1(x) - fd(1e-4)).abs();
        prop_assert!(e1 <= 50.0 * 1e-6 + 1e-10, "e1 = {e1:e}");
        // a hundredfold drop, down to the rounding floor
        prop_assert!(e2 <= 0.02 * e1 + 1e-10, "e1 = {e1:e}, e2 = {e2:e}");
    }

    #[test]
    fn even_families_are_even(spec in even_family(), x in -20.0f64..20.0) {
        prop_assert_eq!(spec.value(x), spec.value(-x));
    }

    #[test]
    fn classification_mirrors_under_momentum_flip(spec in even_family(), x in -3.0f64..3.0, sign in prop::bool::ANY) {
        let e0 = spec.value(0.0).max(spec.value(x)) + 0.2;
        let xi = (e0 - spec.value(x)).sqrt() * if sign { 1.0 } else { -1.0 };
        let params = ClassicalParams::default();
        let (a, _) = classify_point(&spec, &PhasePoint::new_1d(x, xi), e0, &params).unwrap();
        let (b, _) = classify_point(&spec, &PhasePoint::new_1d(x, -xi), e0, &params).unwrap();
        let mirrored = match a {
            PointClass::EscapedForward => PointClass::EscapedBackward,
            PointClass::EscapedBackward => PointClass::EscapedForward,
            other => other,
        };
        prop_assert_eq!(b, mirrored);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn flows_conserve_energy_and_reverse(spec in family(), x in -3.0f64..3.0, xi in -1.5f64..1.5, t in 0.1f64..3.0) {
        let tol = 1e-10;
        let rho = PhasePoint::new_1d(x, xi);
        let fwd = flow(&spec, &rho, t, tol).unwrap();
        prop_assert!(fwd.energy_drift <= tol);
        let end = fwd.points.last().unwrap().clone();
        let back = flow(&spec, &end, -t, tol).unwrap();
        prop_assert!(back.energy_drift <= tol);
        let start = &back.points[0];
        let err = ((start.x[0] - x).powi(2) + (start.xi[0] - xi).powi(2)).sqrt();
        prop_assert!(err <= 10.0 * tol * (1.0 + x.abs() + xi.abs()), "return error {err:e}");
    }

    #[test]
    fn tangent_map_is_symplectic(spec in family(), x in -3.0f64..3.0, xi in -1.5f64..1.5, t in 0.1f64..4.0) {
        let (_, j) = tangent_flow(&spec, &PhasePoint::new_1d(x, xi), t, 1e-10).unwrap();
        prop_assert!((j.determinant() - 1.0).abs() <= 1e-6, "det = {}", j.determinant());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn operator_is_self_adjoint(u in wave(120), v in wave(120)) {
        let op = eckart_operator(120, 0.25);
        let pu = op.apply(&u);
        let pv = op.apply(&v);
        let a: Complex64 = pu.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
        let b: Complex64 = u.iter().zip(&pv).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
    }

    #[test]
    fn filter_is_a_contraction_commuting_with_p(u in wave(300)) {
        let op = eckart_operator(300, 1.0 / 8.0);
        let bump = BumpSpec::energy_window(1.0, 0.2).unwrap();
        let filter = ChebyshevFilter::auto(&bump, op.spectral_bounds, FILTER_TOL, Damping::None).unwrap();
        let mut w = WaveFunction::new(u, op.dx);
        w.normalize();
        let fu = filter.apply(&op, &w);
        prop_assert!(fu.norm() <= 1.0 + 1e-5);
        let pfu = op.apply(&fu.values);
        let fpu = filter.apply(&op, &WaveFunction::new(op.apply(&w.values), op.dx));
        let comm: Vec<Complex64> = pfu.iter().zip(&fpu.values).map(|(a, b)| a - b).collect();
        prop_assert!(l2(&comm, op.dx) <= 1e-8, "commutator {:e}", l2(&comm, op.dx));
    }

    #[test]
    fn propagation_composes(k1 in 1usize..40, k2 in 1usize..40, x0 in -2.0f64..2.0, xi0 in -1.0f64..1.0) {
        let op = eckart_operator(300, 1.0 / 8.0);
        let grid = op.grid.clone().unwrap();
        let dt = 1.0 / 8.0 / 20.0;
        let u0 = coherent_state(&grid, &PhasePoint::new_1d(x0, xi0)).unwrap();
        let (t1, t2) = (k1 as f64 * dt, k2 as f64 * dt);
        let two = propagate(&op, &propagate(&op, &u0, t1, dt).unwrap(), t2, dt).unwrap();
        let one = propagate(&op, &u0, t1 + t2, dt).unwrap();
        let diff: Vec<Complex64> = two.values.iter().zip(&one.values).map(|(a, b)| a - b).collect();
        prop_assert!(l2(&diff, op.dx) <= 1e-6);
    }

    #[test]
    fn norm_estimates_are_consistent(z in 0.8f64..1.2, r1 in 0.5f64..2.0, grow in 0.0f64..1.5) {
        let grid = GridSpec::new(8.0, 200, 0.25, 1.2, 8.0).unwrap();
        let spec = PotentialSpec::eckart(1.0, 1.0).unwrap();
        let cap = CapSpec { r_a: 5.0, eta: 1.0 };
        let small = build_operator(&grid, &spec, cap, BumpSpec::symmetric(r1, 1.0).unwrap()).unwrap();
        let large = build_operator(&grid, &spec, cap, BumpSpec::symmetric(r1 + grow, 1.0).unwrap()).unwrap();
        let tol = 1e-9;
        let opts = NormOptions { tol, ..Default::default() };

        // Rayleigh quotient at the returned vector
        let (s, u) = estimate_norm_with_vector(&small, z, &opts).unwrap();
        prop_assert!(s.converged);
        let solver = trapping_lab::resolvent::ShiftedSolver::new(&small, z, 1.0).unwrap();
        let mut au = u.clone();
        solver.truncated(&mut au);
        let rq = l2(&au, 1.0) / l2(&u, 1.0);
        prop_assert!((rq - s.norm).abs() <= tol * s.norm);

        // bigger cutoff, bigger norm
        let bigger = estimate_norm(&large, z, &opts).unwrap();
        prop_assert!(s.norm <= bigger.norm * (1.0 + tol));

        // both signs of the absorbing potential
        let flipped = estimate_norm(&small, z, &NormOptions { cap_sign: -1.0, ..opts.clone() }).unwrap();
        prop_assert!((flipped.norm - s.norm).abs() <= 2.0 * tol * s.norm);
    }

    #[test]
    fn kofh_is_h_times_sup(h in 0.001f64..0.5, norms in prop::collection::vec(0.0f64..1e6, 1..20)) {
        let zs: Vec<f64> = (0..norms.len()).map(|k| k as f64).collect();
        let k = KOfH::from_samples(h, &zs, &norms);
        prop_assert_eq!(k.k, h * k.sup_norm);
        prop_assert_eq!(k.sup_norm, norms.iter().copied().fold(0.0, f64::max));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn observable_bounds_and_symmetry(inv_h in 8u32..14, t_e in 0.1f64..0.6, chi_r in 0.5f64..3.0) {
        let h = 1.0 / inv_h as f64;
        let grid = GridSpec::resolved(10.0, h, 1.2, 8.0).unwrap();
        let op = build_operator(
            &grid,
            &PotentialSpec::eckart(1.0, 1.0).unwrap(),
            CapSpec { r_a: 7.0, eta: 1.0 },
            BumpSpec::symmetric(chi_r, 2.0).unwrap(),
        )
        .unwrap();
        let u0 = coherent_state(&grid, &PhasePoint::new_1d(0.0, 0.0)).unwrap();
        let phi = BumpSpec::energy_window(1.0, 0.2).unwrap();
        let s = observable_series(&op, &phi, &u0, t_e, h / 20.0).unwrap();
        prop_assert!(s.valid);
        prop_assert!(s.values.iter().all(|&v| (0.0..=1.0 + 1e-6).contains(&v)));
        for (a, b) in s.values.iter().zip(s.values.iter().rev()) {
            prop_assert!((a - b).abs() <= 1e-6);
        }
        let kato = kato_integral(&s);
        prop_assert!(kato <= 2.0 * t_e * s.max() * (1.0 + 1e-6));
    }

    #[test]
    fn certificate_algebra(h in 0.001f64..0.2, gamma in 0.25f64..4.0, eps in 0.01f64..0.9, k in 0.01f64..10.0) {
        // min >= 1 - eps over the window and kato <= 8K(1+s) force bound <= K(1+s)
        let t_e = ehrenfest_time(h, gamma, eps);
        let kato_lower = 2.0 * t_e * (1.0 - eps);
        let slack = 0.15;
        if kato_lower <= 8.0 * k * (1.0 + slack) {
            prop_assert!(paper_lower_bound(h, gamma, eps) <= k * (1.0 + slack) * (1.0 + 1e-12));
        }
    }
}

fn synthetic(model: Model, c: f64, param: f64) -> ScalingSeries {
    let h: Vec<f64> = [16.0, 23.0, 32.0, 45.0, 64.0, 91.0, 128.0, 181.0, 256.0].iter().map(|n| 1.0 / n).collect();
    let v = h
        .iter()
        .map(|&h| match model {
            Model::PowerLaw => c * h.powf(param),
            Model::LogEnhanced => c * h.ln().abs() / h,
            Model::Exponential => c * (param / h).exp(),
        })
        .collect();
    ScalingSeries::converged(h, v).unwrap()
}

fn model_and_params() -> impl Strategy<Value = (Model, f64, f64)> {
    prop_oneof![
        (0.1f64..10.0, -3.0f64..-0.5).prop_map(|(c, p)| (Model::PowerLaw, c, p)),
        (0.1f64..10.0).prop_map(|c| (Model::LogEnhanced, c, 0.0)),
        (0.1f64..10.0, 0.05f64..0.4).prop_map(|(c, nu)| (Model::Exponential, c, nu)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fitters_recover_their_model((model, c, param) in model_and_params()) {
        let s = synthetic(model, c, param);
        let f = fit(model, &s);
        prop_assert!(f.residual <= 1e-10, "{f:?}");
        prop_assert!((f.c - c).abs() <= 1e-8 * c);
        prop_assert!((f.param - param).abs() <= 1e-8 * param.abs().max(1.0));
        let cls = classify(&s).unwrap();
        prop_assert_eq!(cls.selected, model);
    }

    #[test]
    fn classification_is_scale_invariant((model, c, param) in model_and_params(), scale in 1e-3f64..1e3) {
        let s = synthetic(model, c, param);
        let scaled = ScalingSeries::converged(s.h.clone(), s.values.iter().map(|v| v * scale).collect()).unwrap();
        prop_assert_eq!(classify(&s).unwrap().selected, classify(&scaled).unwrap().selected);
    }

    #[test]
    fn dropping_an_interior_point_keeps_the_model((model, c, param) in model_and_params(), drop in 1usize..8) {
        let s = synthetic(model, c, param);
        prop_assert_eq!(classify(&s.without(drop).unwrap()).unwrap().selected, classify(&s).unwrap().selected);
    }
}
