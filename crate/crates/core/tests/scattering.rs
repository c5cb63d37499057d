use dnls::scattering::*;
use dnls::{Error, GridFunction, C64};
use proptest::prelude::*;

fn gaussian(n: usize, amp: f64) -> GridFunction {
    GridFunction::from_fn(n, 24.0, |x| C64::from_polar(amp * (-x * x / 2.0).exp(), 0.7 * x)).unwrap()
}

fn lam(re: f64, im: f64) -> SpectralParameter {
    SpectralParameter::from_lambda_sq(C64::new(re, im)).unwrap()
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

// a_u for exp(-x^2/2) e^{0.7ix}, from an independent DOP853 integration
// (rtol 1e-13) of the same system on [-12, 12].
const REFERENCE: [(f64, f64, f64, f64); 6] = [
    (0.0, 1.0, 1.0168078044839899, -0.8134663688608877),
    (0.0, 4.0, 0.7274658280535222, -0.8460109603217348),
    (2.0, 3.0, 0.7473365714933241, -0.7836960450122935),
    (-3.0, 1.0, 0.5294939914890512, -0.9689948328279595),
    (0.0, 30.0, 0.6426351141390854, -0.7865069747712478),
    (0.0, 100.0, 0.6353329477921108, -0.7782876117343375),
];

#[test]
fn spectral_parameter_branches() {
    let p = SpectralParameter::from_rho(9.0).unwrap();
    assert_eq!(p.lambda_sq(), C64::new(0.0, 9.0));
    assert!((p.lambda() - C64::from_polar(3.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
    let q = lam(-2.0, 0.5);
    assert!((q.lambda() * q.lambda() - q.lambda_sq()).norm() < 1e-14);
    assert!(q.lambda().im >= 0.0 && q.lambda().re >= 0.0);
    assert!(SpectralParameter::from_lambda_sq(C64::new(1.0, -0.1)).is_err());
    assert!(SpectralParameter::from_lambda_sq(C64::new(0.0, 0.0)).is_err());
    assert!(SpectralParameter::from_rho(-1.0).is_err());
}

#[test]
fn free_problem() {
    let u = GridFunction::zeros(64, 10.0).unwrap();
    let p = lam(0.3, 2.0);
    assert_eq!(jost_transmission(&u, &p).unwrap(), C64::new(1.0, 0.0));
    assert_eq!(trace_t2(&u, &p), C64::new(0.0, 0.0));
    assert_eq!(trace_t4(&u, &p), C64::new(0.0, 0.0));
    assert_eq!(perturbation_determinant(&u, &p).unwrap(), C64::new(1.0, 0.0));
    assert_eq!(log_a_series(&u, &p, 4).unwrap(), C64::new(0.0, 0.0));
    let dense = build_t_matrix(&u, &p, 8).unwrap().to_dense();
    assert!(dense.iter().all(|z| z.norm() == 0.0));
}

#[test]
fn jost_matches_reference_integration() {
    let u = gaussian(256, 1.0);
    for (re, im, are, aim) in REFERENCE {
        let a = jost_transmission(&u, &lam(re, im)).unwrap();
        assert!((a - C64::new(are, aim)).norm() < 1e-10, "{re}+{im}i: {a}");
    }
}

#[test]
fn jost_rejects_undecayed_profiles() {
    let u = GridFunction::from_fn(64, 8.0, |x| C64::new((-x * x / 8.0).exp(), 0.0)).unwrap();
    match jost_transmission(&u, &lam(0.0, 1.0)) {
        Err(Error::Decay { ratio }) => assert!(ratio > 1e-10),
        other => panic!("expected a decay error, got {other:?}"),
    }
}

#[test]
fn large_lambda_limit_is_monotone() {
    let u = gaussian(256, 1.0);
    let limit = C64::new(0.0, -u.l2_norm_sq() / 2.0).exp();
    let errs: Vec<f64> = [1e2, 1e3, 1e4]
        .iter()
        .map(|&rho| (jost_transmission(&u, &SpectralParameter::from_rho(rho).unwrap()).unwrap() - limit).norm())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn trace_t2_matches_matrix_oracle() {
    let u = gaussian(256, 1.0);
    let p = lam(0.0, 1.0);
    let op = build_t_matrix(&u, &p, 128).unwrap();
    assert!(rel(trace_t2(&u, &p), op.trace_t2_oracle()) < 1e-8);
}

#[test]
fn trace_t4_matches_matrix_oracle() {
    let u = gaussian(256, 1.0);
    let p = lam(0.0, 2.0);
    let op = build_t_matrix(&u, &p, 128).unwrap();
    assert!(rel(trace_t4(&u, &p), op.trace_t4_oracle()) < 1e-7);
}

#[test]
fn trace_t4_leading_asymptotics() {
    let u = gaussian(256, 1.0);
    let l4: f64 = u.values().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>() * u.dx();
    let mu12 = C64::new(0.0, l4 / 8.0);
    let mut errs = Vec::new();
    for rho in [1e2, 1e3, 1e4] {
        let p = SpectralParameter::from_rho(rho).unwrap();
        let lhs = -trace_t4(&u, &p) / 4.0;
        errs.push(rel(lhs * p.lambda_sq(), mu12));
    }
    // relative error O(|lambda|^{-2})
    for w in errs.windows(2) {
        let slope = (w[1] / w[0]).log10();
        assert!((slope + 1.0).abs() < 0.1, "{errs:?}");
    }
}

#[test]
fn spatial_scaling_covariance() {
    let u = gaussian(256, 1.0);
    let p = lam(0.5, 3.0);
    for mu in [0.5, 2.0] {
        let v = u.rescaled(mu);
        let q = p.scaled(1.0 / mu.sqrt()).unwrap();
        // a_{u_mu}(lambda) = a_u(lambda / sqrt(mu))
        let pm = p.scaled(mu.sqrt()).unwrap();
        assert!(rel(trace_t2(&v, &pm), trace_t2(&u, &p)) < 1e-8);
        assert!(rel(trace_t2(&u, &q), trace_t2(&v, &p)) < 1e-8);
        let a1 = jost_transmission(&v, &p).unwrap();
        let a2 = jost_transmission(&u, &q).unwrap();
        assert!(rel(a1, a2) < 1e-6, "mu = {mu}");
    }
}

#[test]
fn hilbert_schmidt_identity() {
    let u = gaussian(2048, 1.0);
    for (re, im) in [(0.0, 1.0), (1.0, 2.0), (-2.0, 3.0)] {
        let p = lam(re, im);
        let op = build_t_matrix(&u, &p, 1024).unwrap();
        let expect = p.lambda().norm_sqr() / p.lambda_sq().im * u.l2_norm_sq();
        let got = op.hs_norm_sq();
        assert!((got - expect).abs() < 0.01 * expect, "{got} vs {expect}");
    }
}

#[test]
fn operator_norm_shrinks_along_the_ray() {
    let u = gaussian(128, 1.0);
    let mut prev = f64::INFINITY;
    for rho in [2.0, 8.0, 32.0, 128.0] {
        let p = SpectralParameter::from_rho(rho).unwrap();
        let t = build_t_matrix(&u, &p, 32).unwrap().to_dense();
        let norm = t.svd(false, false).singular_values[0];
        assert!(norm < prev);
        prev = norm;
    }
}

#[test]
fn determinant_matches_jost_squared() {
    let u = gaussian(256, 1.0);
    let p = lam(0.0, 4.0);
    let a = jost_transmission(&u, &p).unwrap();
    let d = perturbation_determinant(&u, &p).unwrap();
    assert!(rel(d, a * a) < 1e-5);
    let s = log_a_series(&u, &p, 12).unwrap();
    assert!(rel((s * 2.0).exp(), d) < 1e-5);
}

#[test]
fn series_matches_log_of_jost() {
    let u = gaussian(256, 0.8);
    let p = lam(0.0, 4.0);
    let la = log_transmission(&u, &p).unwrap();
    let s = log_a_series(&u, &p, 6).unwrap();
    assert!((s - la).norm() < 1e-6, "{s} vs {la}");
    assert!((la.exp() - jost_transmission(&u, &p).unwrap()).norm() < 1e-12);
}

#[test]
fn series_tail_is_geometric() {
    let u = gaussian(256, 1.0);
    let p = lam(0.0, 4.0);
    let radius = spectral_radius(&u, &p).unwrap();
    let sums = log_a_partial_sums(&u, &p, 10).unwrap();
    let steps: Vec<f64> = sums.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
    for w in steps.windows(2).skip(3) {
        assert!(w[1] < w[0]);
        let ratio = w[1] / w[0];
        assert!((ratio - radius).abs() < 0.25 * radius, "{ratio} vs {radius}");
    }
}

#[test]
fn series_refuses_outside_convergence() {
    let u = gaussian(256, 3.0);
    match log_a_series(&u, &lam(0.0, 0.2), 4) {
        Err(Error::Divergence { radius }) => assert!(radius >= 1.0),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn r0_is_the_first_grid_point_below_a_quarter() {
    let u = gaussian(128, 1.0);
    let r0 = estimate_r0(&u).unwrap();
    assert!(spectral_radius(&u, &SpectralParameter::from_rho(r0).unwrap()).unwrap() < 0.25);
    let below = r0 / 2f64.powf(0.25);
    if below >= 1.0 {
        assert!(spectral_radius(&u, &SpectralParameter::from_rho(below).unwrap()).unwrap() >= 0.25);
    }
}

#[test]
fn log_transmission_tends_to_the_mass_limit() {
    let u = gaussian(256, 1.0);
    let la = log_transmission(&u, &SpectralParameter::from_rho(1e4).unwrap()).unwrap();
    assert!((la - C64::new(0.0, -u.l2_norm_sq() / 2.0)).norm() < 1e-3);
}

#[test]
fn report_rows_roundtrip() {
    let row = TransmissionRow::new(&lam(1.0, 2.0), C64::new(0.5, -0.25), "jost", 1e-12);
    let json = serde_json::to_string(&row).unwrap();
    let back: TransmissionRow = serde_json::from_str(&json).unwrap();
    assert_eq!(row, back);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // the box sees images of u damped by exp(-Im(lambda^2) L); keep them below 1e-10
    #[test]
    fn trace_t2_agrees_with_operator(amp in 0.2f64..1.5, kappa in -1.0f64..1.0, re in -3.0f64..3.0, im in 1.0f64..5.0) {
        let u = GridFunction::from_fn(128, 24.0, |x| C64::from_polar(amp * (-x * x / 2.0).exp(), kappa * x)).unwrap();
        let p = lam(re, im);
        let op = build_t_matrix(&u, &p, 64).unwrap();
        prop_assert!(rel(trace_t2(&u, &p), op.trace_t2_oracle()) < 1e-8);
    }

    #[test]
    fn transmission_is_gauge_invariant(phase in 0.0f64..6.28, im in 0.5f64..6.0) {
        // a constant phase on u conjugates the spectral problem by a diagonal matrix
        let u = gaussian(128, 1.0);
        let v = u.scaled(C64::from_polar(1.0, phase));
        let p = lam(0.0, im);
        let a = jost_transmission(&u, &p).unwrap();
        let b = jost_transmission(&v, &p).unwrap();
        prop_assert!((a - b).norm() < 1e-9);
    }
}
