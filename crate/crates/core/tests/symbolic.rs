use dnls::coeff;
use dnls::diffpoly::{DiffPolynomial, Factor, Var, Weight};
use dnls::hierarchy::{self, Hierarchy};
use dnls::profiles;
use dnls::scattering::{self, SpectralParameter};
use dnls::C64;
use num_rational::BigRational;
use proptest::prelude::*;

fn factor() -> impl Strategy<Value = Factor> {
    (any::<bool>(), 0u32..3).prop_map(|(conjugated, order)| Factor { conjugated, order })
}

fn poly() -> impl Strategy<Value = DiffPolynomial> {
    prop::collection::vec(
        ((-5i64..=5, -5i64..=5), prop::collection::vec(factor(), 1..4)),
        1..4,
    )
    .prop_map(|terms| {
        terms
            .into_iter()
            .fold(DiffPolynomial::zero(), |acc, ((re, im), fs)| {
                acc + DiffPolynomial::monomial(coeff::from_ints(re, im), fs)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn total_derivatives_are_null_functionals(p in poly()) {
        prop_assert!(p.differentiate().functionals_equal(&DiffPolynomial::zero()));
        prop_assert!(p.differentiate().variational_derivative(Var::U).is_zero());
    }

    #[test]
    fn leibniz_rule(p in poly(), q in poly()) {
        let lhs = (&p * &q).differentiate();
        let rhs = &(&p.differentiate() * &q) + &(&p * &q.differentiate());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_is_an_involution_commuting_with_d(p in poly()) {
        prop_assert_eq!(p.conj().conj(), p.clone());
        prop_assert_eq!(p.conj().differentiate(), p.differentiate().conj());
    }

    #[test]
    fn functional_equality_ignores_added_derivatives(p in poly(), q in poly()) {
        let shifted = &p + &q.differentiate();
        prop_assert!(p.functionals_equal(&shifted));
    }

    #[test]
    fn products_evaluate_pointwise(p in poly(), q in poly()) {
        let u = profiles::scattering_gaussian(256).unwrap();
        let fp = p.evaluate_density(&u).unwrap();
        let fq = q.evaluate_density(&u).unwrap();
        let fpq = (&p * &q).evaluate_density(&u).unwrap();
        for ((a, b), c) in fp.iter().zip(&fq).zip(&fpq) {
            prop_assert!((a * b - c).norm() <= 1e-10 * (1.0 + c.norm()));
        }
    }

    #[test]
    fn derivatives_integrate_to_zero_on_the_grid(p in poly()) {
        let u = profiles::scattering_gaussian(256).unwrap();
        let scale = p.evaluate_density(&u).unwrap().iter().map(|z| z.norm()).fold(1.0, f64::max);
        prop_assert!(p.differentiate().evaluate(&u).unwrap().norm() < 1e-10 * scale);
    }
}

#[test]
fn energies_are_homogeneous_with_increasing_weight() {
    let h = hierarchy::shared();
    let w0 = match h.energy(0).unwrap().density.scaling_weight().unwrap() {
        Weight::Homogeneous(w) => w,
        Weight::Inhomogeneous => panic!("E_0 inhomogeneous"),
    };
    for j in 1..=6 {
        match h.energy(j).unwrap().density.scaling_weight().unwrap() {
            Weight::Homogeneous(w) => assert_eq!(w - &w0, BigRational::from_integer((j as i64).into())),
            Weight::Inhomogeneous => panic!("E_{j} inhomogeneous"),
        }
    }
}

#[test]
fn energies_scale_numerically() {
    let u = profiles::random_bumps(512, 40.0, 3).unwrap();
    let mu = 1.3;
    let v = u.rescaled(mu);
    for e in hierarchy::shared().energies(5).unwrap() {
        let a = e.evaluate(&u).unwrap();
        let b = e.evaluate(&v).unwrap();
        let expect = a * mu.powi(e.j as i32);
        assert!((b - expect).norm() <= 1e-9 * expect.norm(), "E_{}: {b} vs {expect}", e.j);
    }
}

/// `ln a_u(lambda)` minus the first `J + 1` energies decays like
/// `|lambda|^{-2(J+1)}` along the imaginary axis of `lambda^2`.
#[test]
fn energies_match_the_expansion_of_log_transmission() {
    let u = profiles::scattering_gaussian(512).unwrap();
    let energies: Vec<C64> = hierarchy::shared()
        .energies(4)
        .unwrap()
        .iter()
        .map(|e| e.evaluate(&u).unwrap())
        .collect();
    let rhos = [10.0, 17.8, 31.6, 56.2, 100.0];
    for big_j in 1..=3usize {
        let rem: Vec<f64> = rhos
            .iter()
            .map(|&rho| {
                let p = SpectralParameter::from_rho(rho).unwrap();
                let ln_a = scattering::log_transmission(&u, &p).unwrap();
                let z = C64::new(0.0, rho).inv();
                let series: C64 = (0..=big_j).map(|j| energies[j] * z.powu(j as u32)).sum();
                (ln_a - series).norm()
            })
            .collect();
        let slope = (rem[4] / rem[0]).ln() / (rhos[4] / rhos[0]).ln();
        let target = -((big_j + 1) as f64);
        assert!((slope - target).abs() < 0.3, "J = {big_j}: slope {slope}, remainders {rem:?}");
    }
}

#[test]
fn energies_roundtrip_through_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let h = Hierarchy::default();
    let first = hierarchy::load_or_generate(&h, Some(dir.path()), 3).unwrap();
    assert!(dir.path().join("energies.json").exists());
    let again = hierarchy::load_or_generate(&h, Some(dir.path()), 2).unwrap();
    assert_eq!(again.len(), 3);
    for (a, b) in first.iter().zip(&again) {
        assert_eq!(a.density, b.density);
    }
    // a request beyond the cached range regenerates
    let more = hierarchy::load_or_generate(&h, Some(dir.path()), 4).unwrap();
    assert_eq!(more.len(), 5);
    assert_eq!(hierarchy::read_energies(&dir.path().join("energies.json")).unwrap().len(), 5);
}

#[test]
fn level_cap_is_an_error() {
    let h = Hierarchy::new(3);
    assert!(h.energy(3).is_ok());
    assert!(h.energy(4).is_err());
}
