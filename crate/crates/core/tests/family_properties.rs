use fdiv_core::family::{make_iso_gaussian, make_poisson, Family, NormalSource, Observation};
use fdiv_core::parallel::chunk_rng;
use fdiv_core::{ExponentialFamily, NaturalParam, SourceParam};
use proptest::prelude::*;

fn counts(obs: &[Observation]) -> Vec<f64> {
    obs.iter()
        .map(|o| match o {
            Observation::Count(c) => *c as f64,
            Observation::Point(_) => panic!("expected counts"),
        })
        .collect()
}

fn points(obs: &[Observation]) -> Vec<Vec<f64>> {
    obs.iter()
        .map(|o| match o {
            Observation::Point(p) => p.clone(),
            Observation::Count(_) => panic!("expected points"),
        })
        .collect()
}

#[test]
fn poisson_five_sample_mean() {
    let f = make_poisson();
    let theta = f.natural_from_rate(5.0).unwrap();
    let xs = counts(&f.sample(&theta, 1_000_000, 20).unwrap());
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    // 4.5σ band, σ = √(5/10⁶)
    assert!((4.99..=5.01).contains(&mean), "mean {mean}");
}

#[test]
fn poisson_zero_frequency() {
    let f = make_poisson();
    let theta = f.natural_from_rate(0.6).unwrap();
    let xs = counts(&f.sample(&theta, 1_000_000, 21).unwrap());
    let zeros = xs.iter().filter(|&&x| x == 0.0).count() as f64 / xs.len() as f64;
    assert!((zeros - (-0.6f64).exp()).abs() <= 0.002, "P(X=0) {zeros}");
}

#[test]
fn gaussian_unit_variance() {
    let f = make_iso_gaussian(2).unwrap();
    let theta = f.natural_from_mean(&[1.0, 1.0]).unwrap();
    let pts = points(&f.sample(&theta, 1_000_000, 22).unwrap());
    let n = pts.len() as f64;
    for c in 0..2 {
        let mean = pts.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = pts.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((0.99..=1.01).contains(&var), "coordinate {c}: variance {var}");
    }
}

#[test]
fn gaussian_centered_mean() {
    let f = make_iso_gaussian(1).unwrap();
    let theta = f.natural_from_mean(&[0.0]).unwrap();
    let pts = points(&f.sample(&theta, 1_000_000, 23).unwrap());
    let mean = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    assert!(mean.abs() <= 0.004, "mean {mean}");
}

#[test]
fn gradient_is_mean_statistic() {
    let cases: Vec<(Family, Vec<f64>)> = vec![
        (make_poisson(), vec![0.6f64.ln()]),
        (make_poisson(), vec![3.2]),
        (make_iso_gaussian(3).unwrap(), vec![0.5, -1.0, 2.0]),
    ];
    let n = 200_000;
    for (seed, (family, coords)) in cases.into_iter().enumerate() {
        let theta = NaturalParam::new(coords).unwrap();
        let grad = family.grad_log_normalizer(&theta);
        let d = family.order();
        let mut rng = chunk_rng(seed as u64, 0);
        let mut normals = NormalSource::default();
        let mut stat = vec![0.0; d];
        let mut sum = vec![0.0; d];
        let mut sumsq = vec![0.0; d];
        for _ in 0..n {
            family.sample_statistic(&theta, &mut rng, &mut normals, &mut stat);
            for c in 0..d {
                sum[c] += stat[c];
                sumsq[c] += stat[c] * stat[c];
            }
        }
        for c in 0..d {
            let mean = sum[c] / n as f64;
            let var = sumsq[c] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!((mean - grad[c]).abs() <= 5.0 * se, "{family:?} coord {c}: {mean} vs {}", grad[c]);
        }
    }
}

fn family_strategy() -> impl Strategy<Value = Family> {
    prop_oneof![Just(make_poisson()), (1usize..=3).prop_map(|d| make_iso_gaussian(d).unwrap())]
}

fn pair_strategy() -> impl Strategy<Value = (Family, Vec<f64>, Vec<f64>)> {
    family_strategy().prop_flat_map(|f| {
        let d = f.order();
        (
            Just(f),
            proptest::collection::vec(-3.0..3.0f64, d),
            proptest::collection::vec(-3.0..3.0f64, d),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn log_normalizer_strictly_convex((family, a, b) in pair_strategy()) {
        let gap2: f64 = a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum();
        prop_assume!(gap2 > 1e-2);
        let ta = NaturalParam::new(a).unwrap();
        let tb = NaturalParam::new(b).unwrap();
        let mid = ta.affine(0.5, &tb, 0.5);
        let jensen_gap = 0.5 * (family.log_normalizer(&ta) + family.log_normalizer(&tb))
            - family.log_normalizer(&mid);
        // both F have curvature ≥ min(e^θ, 1) ≥ e^{-3} on this box
        let margin = 0.125 * (-3.0f64).exp() * gap2 * 0.5;
        prop_assert!(jensen_gap > margin, "gap {} margin {}", jensen_gap, margin);
    }

    #[test]
    fn gradient_matches_central_differences((family, a, _b) in pair_strategy()) {
        let theta = NaturalParam::new(a.clone()).unwrap();
        let grad = family.grad_log_normalizer(&theta);
        for c in 0..a.len() {
            let h = 1e-5;
            let mut up = a.clone();
            let mut down = a.clone();
            up[c] += h;
            down[c] -= h;
            let fd = (family.log_normalizer(&NaturalParam::new(up).unwrap())
                - family.log_normalizer(&NaturalParam::new(down).unwrap()))
                / (2.0 * h);
            prop_assert!((fd - grad[c]).abs() <= 1e-6 * grad[c].abs().max(1.0),
                "coord {}: fd {} vs {}", c, fd, grad[c]);
        }
    }

    #[test]
    fn source_natural_round_trip(rate in 1e-6..1e6f64, mean in proptest::collection::vec(-1e3..1e3f64, 1..4)) {
        let p = make_poisson();
        let theta = p.natural_from_rate(rate).unwrap();
        match p.to_source(&theta).unwrap() {
            SourceParam::Poisson { rate: back } => prop_assert!(((back - rate) / rate).abs() <= 1e-12),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
        let g = make_iso_gaussian(mean.len()).unwrap();
        let theta = g.natural_from_mean(&mean).unwrap();
        prop_assert_eq!(g.to_source(&theta).unwrap(), SourceParam::IsoGaussian { mean });
    }

    #[test]
    fn built_in_domains_are_everything((family, a, _b) in pair_strategy()) {
        prop_assert!(family.in_domain(&NaturalParam::new(a).unwrap()));
    }
}
