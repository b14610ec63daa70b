//! Exact chi-type distances and KL between members of one affine family.
//!
//! Everything reduces to the integral
//! `I(p) = ∫ p₁^p p₂^(1-p) dν = exp(F(pθ₁ + (1-p)θ₂) - pF(θ₁) - (1-p)F(θ₂))`,
//! which is finite whenever the mixed parameter stays in the natural space.
//! For an affine space that holds for every real `p`.
//!
//! The alpha-divergence is evaluated as `4/(1-α²)·(1 - I((1-α)/2))`, the
//! value of `∫ p₁ f(p₂/p₁)` for the generator `4/(1-α²)(1 - u^((1+α)/2))`.
//! Some tables print the integrand exponent of `p₂` as `1+α`; the generator
//! form fixes it to `(1+α)/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::{ExponentialFamily, NaturalParam};
use crate::sum::CompensatedSum;

/// Default cancellation guard on the order of the binomial expansions.
pub const DEFAULT_K_MAX: usize = 30;

/// Hard ceiling for overridden guards; binomial coefficients stay exact in
/// `u64` up to here.
pub const K_MAX_CEILING: usize = 60;

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Bregman,
    Taylor,
    MonteCarlo,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::Bregman => "bregman",
            Method::Taylor => "taylor",
            Method::MonteCarlo => "monte_carlo",
            Method::Oracle => "oracle",
        }
    }
}

/// A divergence value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub value: f64,
    /// Exponent `E` with `value = e^E - 1`, when the value has that shape.
    /// Stays finite when `value` overflows.
    pub log1p_form: Option<f64>,
    pub method: Method,
    /// Truncation error bound, for Taylor evaluations given a ratio interval.
    pub bound: Option<f64>,
}

impl DivergenceResult {
    pub fn new(value: f64, method: Method) -> Self {
        Self { value, log1p_form: None, method, bound: None }
    }

    /// `e^E - 1` evaluated with `exp_m1`.
    pub fn from_exponent(exponent: f64, method: Method) -> Self {
        Self { value: exponent.exp_m1(), log1p_form: Some(exponent), method, bound: None }
    }
}

/// Exact binomial coefficient C(k, j).
///
/// # Panics
/// If `k > K_MAX_CEILING`.
pub fn binomial(k: usize, j: usize) -> u64 {
    assert!(k <= K_MAX_CEILING, "binomial({k}, {j}) beyond the exact range");
    if j > k {
        return 0;
    }
    let j = j.min(k - j);
    // each partial product C(k - j + i, i) is an integer
    (1..=j as u64).fold(1u64, |acc, i| acc * (k as u64 - j as u64 + i) / i)
}

fn check_pair<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<()> {
    family.check_param(theta1)?;
    family.check_param(theta2)
}

/// Exponent of `I(p)`, after checking the mixed parameter is admissible.
pub fn log_integral_ipq<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    p: f64,
) -> Result<f64> {
    check_pair(family, theta1, theta2)?;
    if !p.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent p must be finite, got {p}")));
    }
    let mixed = theta1.affine(p, theta2, 1.0 - p);
    if !family.in_domain(&mixed) {
        return Err(Error::DomainViolation(mixed.coords().to_vec()));
    }
    Ok(family.ipq_exponent(theta1, theta2, p))
}

/// `∫ p₁^p p₂^(1-p) dν` in closed form.
pub fn integral_ipq<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    p: f64,
) -> Result<f64> {
    log_integral_ipq(family, theta1, theta2, p).map(f64::exp)
}

/// Pearson χ²: `∫ (p₂ - p₁)² / p₁ = I(-1) - 1`.
pub fn chi2_pearson<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<DivergenceResult> {
    let exponent = log_integral_ipq(family, theta1, theta2, -1.0)?;
    Ok(DivergenceResult::from_exponent(exponent, Method::ClosedForm))
}

/// Neyman χ²: `∫ (p₁ - p₂)² / p₂`, i.e. Pearson with the arguments swapped.
pub fn chi2_neyman<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<DivergenceResult> {
    chi2_pearson(family, theta2, theta1)
}

/// Pearson plus Neyman.
pub fn chi2_symmetric<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<DivergenceResult> {
    let forward = chi2_pearson(family, theta1, theta2)?;
    let backward = chi2_neyman(family, theta1, theta2)?;
    Ok(DivergenceResult::new(forward.value + backward.value, Method::ClosedForm))
}

/// `I(1-j)` for j = 0..=k, i.e. `∫ p₁^(1-j) p₂^j`.
pub(crate) fn ipq_ladder<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: usize,
) -> Result<Vec<f64>> {
    (0..=k)
        .map(|j| integral_ipq(family, theta1, theta2, 1.0 - j as f64))
        .collect()
}

/// `Σ_j C(k,j) (-λ)^(k-j) I(1-j)` from a precomputed ladder.
pub(crate) fn chi_k_from_ladder(ladder: &[f64], k: usize, center: f64) -> f64 {
    let mut acc = CompensatedSum::new();
    for (j, &integral) in ladder.iter().enumerate().take(k + 1) {
        let weight = binomial(k, j) as f64 * (-center).powi((k - j) as i32);
        acc += weight * integral;
    }
    acc.value()
}

pub(crate) fn check_order(k: usize, k_max: usize) -> Result<()> {
    if k_max > K_MAX_CEILING {
        return Err(Error::InvalidParameter(format!(
            "k_max {k_max} exceeds the ceiling {K_MAX_CEILING}"
        )));
    }
    if k > k_max {
        return Err(Error::OrderTooLarge { k, k_max });
    }
    if k_max > DEFAULT_K_MAX && k > DEFAULT_K_MAX {
        log::warn!(
            "order {k} beyond the default guard {DEFAULT_K_MAX}: the alternating sum may lose \
             most of its significant digits"
        );
    }
    Ok(())
}

/// Signed Pearson-Vajda χᵏ: `∫ (p₂ - p₁)^k / p₁^(k-1)`, via binomial expansion.
///
/// `k = 0` gives 1, `k = 1` gives a value within roundoff of 0 and `k = 2`
/// coincides with [`chi2_pearson`]. Odd orders may be negative.
pub fn chi_k_vajda<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: usize,
) -> Result<DivergenceResult> {
    chi_k_vajda_with_limit(family, theta1, theta2, k, DEFAULT_K_MAX)
}

/// [`chi_k_vajda`] with an explicit cancellation guard.
pub fn chi_k_vajda_with_limit<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: usize,
    k_max: usize,
) -> Result<DivergenceResult> {
    let value = chi_k_lambda_with_limit(family, theta1, theta2, k, 1.0, k_max)?;
    Ok(DivergenceResult::new(value, Method::ClosedForm))
}

/// Centered chi-type distance `∫ (p₂ - λp₁)^k / p₁^(k-1)`.
pub fn chi_k_lambda<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: usize,
    center: f64,
) -> Result<f64> {
    chi_k_lambda_with_limit(family, theta1, theta2, k, center, DEFAULT_K_MAX)
}

pub fn chi_k_lambda_with_limit<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: usize,
    center: f64,
    k_max: usize,
) -> Result<f64> {
    check_order(k, k_max)?;
    if !center.is_finite() {
        return Err(Error::InvalidParameter(format!("center must be finite, got {center}")));
    }
    let ladder = ipq_ladder(family, theta1, theta2, k)?;
    Ok(chi_k_from_ladder(&ladder, k, center))
}

/// KL(p₁ : p₂) as the Bregman divergence of F on swapped parameters,
/// `F(θ₂) - F(θ₁) - <θ₂ - θ₁, ∇F(θ₁)>`.
pub fn kl_bregman<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<DivergenceResult> {
    check_pair(family, theta1, theta2)?;
    Ok(DivergenceResult::new(family.bregman(theta2, theta1), Method::Bregman))
}

/// Amari alpha-divergence, `4/(1-α²)·(1 - ∫ p₁^((1-α)/2) p₂^((1+α)/2))`.
pub fn alpha_divergence<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    alpha: f64,
) -> Result<DivergenceResult> {
    if !alpha.is_finite() || (alpha.abs() - 1.0).abs() < f64::EPSILON {
        return Err(Error::SingularAlpha(alpha));
    }
    let exponent = log_integral_ipq(family, theta1, theta2, 0.5 * (1.0 - alpha))?;
    let scale = 4.0 / (1.0 - alpha * alpha);
    Ok(DivergenceResult::new(-scale * exponent.exp_m1(), Method::ClosedForm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_iso_gaussian, make_poisson};
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn poisson(rate: f64) -> NaturalParam {
        make_poisson().natural_from_rate(rate).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(30, 15), 155_117_520);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(60, 30), 118_264_581_564_861_424);
    }

    #[test]
    fn ipq_identities() {
        let f = make_poisson();
        let a = poisson(3.0);
        assert_eq!(integral_ipq(&f, &a, &a, -3.0).unwrap(), 1.0);
        let b = poisson(0.4);
        assert_eq!(integral_ipq(&f, &a, &b, 0.0).unwrap(), 1.0);
        assert_eq!(integral_ipq(&f, &a, &b, 1.0).unwrap(), 1.0);
        assert_relative_eq!(
            integral_ipq(&f, &poisson(1.0), &poisson(2.0), -1.0).unwrap(),
            E,
            max_relative = 1e-15
        );
    }

    #[test]
    fn pearson_poisson_one_two() {
        let f = make_poisson();
        let r = chi2_pearson(&f, &poisson(1.0), &poisson(2.0)).unwrap();
        assert_relative_eq!(r.value, E - 1.0, max_relative = 1e-14);
        assert_eq!(r.log1p_form, Some(1.0));
        assert_eq!(r.method, Method::ClosedForm);
    }

    #[test]
    fn neyman_is_swapped_pearson() {
        let f = make_poisson();
        let r = chi2_neyman(&f, &poisson(2.0), &poisson(1.0)).unwrap();
        assert_relative_eq!(r.value, E - 1.0, max_relative = 1e-14);
        let a = chi2_neyman(&f, &poisson(0.3), &poisson(4.0)).unwrap();
        let b = chi2_pearson(&f, &poisson(4.0), &poisson(0.3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identical_members_vanish() {
        let fams = [make_poisson(), make_iso_gaussian(3).unwrap()];
        let params = [poisson(2.5), NaturalParam::new(vec![0.1, -2.0, 3.0]).unwrap()];
        for (f, t) in fams.iter().zip(&params) {
            assert_eq!(chi2_pearson(f, t, t).unwrap().value, 0.0);
            assert_eq!(chi2_neyman(f, t, t).unwrap().value, 0.0);
            assert_eq!(chi2_symmetric(f, t, t).unwrap().value, 0.0);
            assert_eq!(kl_bregman(f, t, t).unwrap().value, 0.0);
            for k in 1..=12 {
                assert!(chi_k_vajda(f, t, t, k).unwrap().value.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_sum_and_swap() {
        let f = make_poisson();
        let (a, b) = (poisson(1.0), poisson(2.0));
        let s = chi2_symmetric(&f, &a, &b).unwrap().value;
        // χ²_N(1:2) = exp(1/2 - 2 + 2) - 1
        assert_relative_eq!(s, (E - 1.0) + (0.5f64.exp() - 1.0), max_relative = 1e-14);
        assert_eq!(s, chi2_symmetric(&f, &b, &a).unwrap().value);
    }

    #[test]
    fn gaussian_pearson_two_dims() {
        let f = make_iso_gaussian(2).unwrap();
        let a = NaturalParam::new(vec![0.0, 0.0]).unwrap();
        let b = NaturalParam::new(vec![1.0, 1.0]).unwrap();
        assert_relative_eq!(
            chi2_pearson(&f, &a, &b).unwrap().value,
            6.38905609893065,
            max_relative = 1e-14
        );
    }

    #[test]
    fn vajda_low_orders() {
        let f = make_poisson();
        let (a, b) = (poisson(1.0), poisson(2.0));
        assert_eq!(chi_k_vajda(&f, &a, &b, 0).unwrap().value, 1.0);
        assert!(chi_k_vajda(&f, &a, &b, 1).unwrap().value.abs() <= 1e-12);
        let two = chi_k_vajda(&f, &a, &b, 2).unwrap().value;
        assert_relative_eq!(two, chi2_pearson(&f, &a, &b).unwrap().value, max_relative = 1e-12);
    }

    #[test]
    fn vajda_guard() {
        let f = make_poisson();
        let (a, b) = (poisson(0.6), poisson(0.3));
        assert!(matches!(
            chi_k_vajda(&f, &a, &b, 31),
            Err(Error::OrderTooLarge { k: 31, k_max: 30 })
        ));
        assert!(chi_k_vajda_with_limit(&f, &a, &b, 31, 40).is_ok());
        assert!(chi_k_vajda_with_limit(&f, &a, &b, 31, 61).is_err());
    }

    #[test]
    fn centered_reductions() {
        let f = make_poisson();
        let (a, b) = (poisson(0.6), poisson(0.3));
        for k in 0..8 {
            let at_one = chi_k_lambda(&f, &a, &b, k, 1.0).unwrap();
            assert_eq!(at_one, chi_k_vajda(&f, &a, &b, k).unwrap().value);
            let at_zero = chi_k_lambda(&f, &a, &b, k, 0.0).unwrap();
            let direct = integral_ipq(&f, &a, &b, 1.0 - k as f64).unwrap();
            assert_relative_eq!(at_zero, direct, max_relative = 1e-15);
        }
        assert_eq!(chi_k_lambda(&f, &a, &b, 0, 0.37).unwrap(), 1.0);
    }

    #[test]
    fn kl_values() {
        let f = make_poisson();
        let kl = kl_bregman(&f, &poisson(0.6), &poisson(0.3)).unwrap();
        // 0.3 - 0.6 + 0.6 ln 2
        assert_relative_eq!(kl.value, -0.3 + 0.6 * 2f64.ln(), max_relative = 1e-14);
        assert_eq!(kl.method, Method::Bregman);
        let g = make_iso_gaussian(1).unwrap();
        let kl = kl_bregman(&g, &NaturalParam::scalar(0.0).unwrap(), &NaturalParam::scalar(2.0).unwrap())
            .unwrap();
        assert_eq!(kl.value, 2.0);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = make_iso_gaussian(2).unwrap();
        let a = NaturalParam::new(vec![0.0, 0.0]).unwrap();
        let b = NaturalParam::scalar(1.0).unwrap();
        assert!(matches!(chi2_pearson(&g, &a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn alpha_zero_is_four_times_hellinger_gap() {
        let f = make_poisson();
        let (a, b) = (poisson(2.0), poisson(3.0));
        let bc = integral_ipq(&f, &a, &b, 0.5).unwrap();
        let alpha = alpha_divergence(&f, &a, &b, 0.0).unwrap().value;
        assert_relative_eq!(alpha, 4.0 * (1.0 - bc), max_relative = 1e-14);
        assert!(matches!(alpha_divergence(&f, &a, &b, 1.0), Err(Error::SingularAlpha(_))));
        assert!(matches!(alpha_divergence(&f, &a, &b, -1.0), Err(Error::SingularAlpha(_))));
    }

    #[test]
    fn non_affine_extension_fails_loudly() {
        // a family whose natural space is the negative half-line
        struct HalfLine;
        impl ExponentialFamily for HalfLine {
            fn order(&self) -> usize {
                1
            }
            fn log_normalizer(&self, t: &NaturalParam) -> f64 {
                -(-t.coords()[0]).ln()
            }
            fn grad_log_normalizer(&self, t: &NaturalParam) -> Vec<f64> {
                vec![-1.0 / t.coords()[0]]
            }
            fn in_domain(&self, t: &NaturalParam) -> bool {
                t.coords()[0] < 0.0
            }
            fn sample_statistic<R: rand::Rng + ?Sized>(
                &self,
                _: &NaturalParam,
                _: &mut R,
                _: &mut crate::family::NormalSource,
                _: &mut [f64],
            ) {
                unimplemented!()
            }
        }
        let a = NaturalParam::scalar(-3.0).unwrap();
        let b = NaturalParam::scalar(-1.0).unwrap();
        // 2θ₂ - θ₁ = 1 lies outside
        assert!(matches!(chi2_pearson(&HalfLine, &a, &b), Err(Error::DomainViolation(_))));
        assert!(chi2_neyman(&HalfLine, &a, &b).is_ok());
    }
}
