use fdiv_core::closed_form::{chi2_pearson, chi_k_vajda, kl_bregman};
use fdiv_core::estimators::{mc_fdiv, oracle_chi_k, oracle_fdiv, oracle_fdiv_with, OracleOptions};
use fdiv_core::family::{make_iso_gaussian, make_poisson};
use fdiv_core::generator::Generator;
use std::f64::consts::E;

#[test]
fn monte_carlo_kl_reference_pair() {
    let family = make_poisson();
    let t1 = family.natural_from_rate(0.6).unwrap();
    let t2 = family.natural_from_rate(0.3).unwrap();
    let est = mc_fdiv(&Generator::Kl, &family, &t1, &t2, 1_000_000, 11).unwrap();
    let se = est.std_error.unwrap();
    assert!((est.value - 0.11589).abs() <= 4.0 * se, "{} ± {se}", est.value);
    assert_eq!(est.n, 2_000_000);
}

#[test]
fn monte_carlo_pearson_reference_pair() {
    let family = make_poisson();
    let t1 = family.natural_from_rate(1.0).unwrap();
    let t2 = family.natural_from_rate(2.0).unwrap();
    let est = mc_fdiv(&Generator::PearsonChi2, &family, &t1, &t2, 1_000_000, 12).unwrap();
    let se = est.std_error.unwrap();
    assert!((est.value - (E - 1.0)).abs() <= 4.0 * se, "{} ± {se}", est.value);
}

#[test]
fn monte_carlo_error_shrinks_with_n() {
    let family = make_poisson();
    let t1 = family.natural_from_rate(0.6).unwrap();
    let t2 = family.natural_from_rate(0.3).unwrap();
    let truth = kl_bregman(&family, &t1, &t2).unwrap().value;
    let mut previous = f64::INFINITY;
    for n in [1_000, 10_000, 100_000, 1_000_000] {
        let mae = (0..10u64)
            .map(|seed| (mc_fdiv(&Generator::Kl, &family, &t1, &t2, n, seed).unwrap().value - truth).abs())
            .sum::<f64>()
            / 10.0;
        assert!(mae < previous, "n={n}: mean error {mae} not below {previous}");
        previous = mae;
    }
}

#[test]
fn monte_carlo_coverage() {
    let family = make_iso_gaussian(2).unwrap();
    let t1 = family.natural_from_mean(&[0.0, 0.0]).unwrap();
    let t2 = family.natural_from_mean(&[0.5, -0.3]).unwrap();
    let truth = kl_bregman(&family, &t1, &t2).unwrap().value;
    let hits = (0..40u64)
        .filter(|&seed| {
            let est = mc_fdiv(&Generator::Kl, &family, &t1, &t2, 10_000, 1000 + seed).unwrap();
            (est.value - truth).abs() <= 4.0 * est.std_error.unwrap()
        })
        .count();
    assert!(hits >= 38, "{hits}/40 within 4 SE");
}

#[test]
fn monte_carlo_seeds() {
    let family = make_poisson();
    let t1 = family.natural_from_rate(2.0).unwrap();
    let t2 = family.natural_from_rate(3.0).unwrap();
    let a = mc_fdiv(&Generator::SquaredHellinger, &family, &t1, &t2, 50_000, 5).unwrap();
    let b = mc_fdiv(&Generator::SquaredHellinger, &family, &t1, &t2, 50_000, 5).unwrap();
    assert_eq!(a, b);
    let c = mc_fdiv(&Generator::SquaredHellinger, &family, &t1, &t2, 50_000, 6).unwrap();
    assert_ne!(a.value, c.value);
    let combined = (a.std_error.unwrap().powi(2) + c.std_error.unwrap().powi(2)).sqrt();
    assert!((a.value - c.value).abs() <= 6.0 * combined);
}

#[test]
fn poisson_oracle_is_saturated() {
    let family = make_poisson();
    let t1 = family.natural_from_rate(0.6).unwrap();
    let t2 = family.natural_from_rate(0.3).unwrap();
    for g in [Generator::Kl, Generator::PearsonChi2, Generator::JensenShannon, Generator::TotalVariation] {
        let base = oracle_fdiv(&g, &family, &t1, &t2).unwrap();
        let x_max = base.n - 1;
        let wide = oracle_fdiv_with(&g, &family, &t1, &t2, &OracleOptions { x_max: Some(2 * x_max), ..Default::default() }).unwrap();
        assert!((base.value - wide.value).abs() < 1e-11, "{g}");
        assert!(base.tail_mass_dropped.unwrap() < 1e-16);
    }
}

#[test]
fn gaussian_oracle_is_saturated() {
    let family = make_iso_gaussian(2).unwrap();
    let t1 = family.natural_from_mean(&[0.0, 0.2]).unwrap();
    let t2 = family.natural_from_mean(&[0.7, -0.4]).unwrap();
    for g in [Generator::Kl, Generator::PearsonChi2, Generator::SquaredHellinger] {
        let base = oracle_fdiv(&g, &family, &t1, &t2).unwrap();
        let fine = oracle_fdiv_with(&g, &family, &t1, &t2, &OracleOptions { quad_tol: 5e-13, ..Default::default() }).unwrap();
        assert!((base.value - fine.value).abs() < 1e-11, "{g}");
    }
}

#[test]
fn oracle_order_two_is_pearson() {
    let family = make_poisson();
    for &(l1, l2) in &[(0.6, 0.3), (1.0, 2.0), (7.0, 4.5)] {
        let t1 = family.natural_from_rate(l1).unwrap();
        let t2 = family.natural_from_rate(l2).unwrap();
        let oracle = oracle_chi_k(&family, &t1, &t2, 2, 1.0).unwrap().value;
        let vajda = chi_k_vajda(&family, &t1, &t2, 2).unwrap().value;
        let pearson = chi2_pearson(&family, &t1, &t2).unwrap().value;
        assert!((oracle - vajda).abs() <= 1e-10);
        assert!((vajda - pearson).abs() <= 1e-12 * pearson);
    }
}
