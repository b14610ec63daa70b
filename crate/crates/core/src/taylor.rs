//! f-divergences as power series in centered chi-type distances.
//!
//! Expanding the generator around a center λ and integrating term by term
//! gives
//!
//! ```text
//! I_f(p₁ : p₂) = Σ_i f⁽ⁱ⁾(λ)/i! · χⁱ_λ(p₁ : p₂),   χⁱ_λ = ∫ (p₂ - λp₁)ⁱ / p₁^(i-1)
//! ```
//!
//! whenever the divergence is finite and the series converges. For affine
//! families every χⁱ_λ is a finite binomial combination of closed-form
//! integrals, so truncating the series at order `s` yields an analytic
//! approximation. Center 1 is the default; center 0 collapses each χⁱ_0 to a
//! single integral but needs a generator that is smooth at 0.
//!
//! Convergence is not automatic. For Poisson pairs with λ₂ > λ₁ the density
//! ratio is unbounded and the KL series eventually diverges;
//! [`taylor_fdiv_auto`] reports that instead of returning a number.
//!
//! The KL series is indexed `Σ_{i≥2} (-1)^i / i · χⁱ` (signed Vajda χⁱ);
//! that indexing reproduces the partial sums 0.0809, 0.0910, 0.1017, ...
//! for Poisson(0.6) against Poisson(0.3).

use serde::{Deserialize, Serialize};

use crate::closed_form::{
    self, check_order, chi_k_from_ladder, ipq_ladder, DivergenceResult, Method, DEFAULT_K_MAX,
};
use crate::error::{Error, Result};
use crate::family::{ExponentialFamily, NaturalParam};
use crate::generator::Generator;
use crate::sum::CompensatedSum;

/// Terms and partial sums of a truncated series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesTrace {
    pub center: f64,
    /// `terms[i] = f⁽ⁱ⁾(λ)/i! · χⁱ_λ`
    pub terms: Vec<f64>,
    /// `partial_sums[i] = Σ_{j≤i} terms[j]`, accumulated with compensation.
    pub partial_sums: Vec<f64>,
    pub truncation_order: usize,
    pub remainder_bound: Option<f64>,
}

impl SeriesTrace {
    fn from_terms(center: f64, terms: Vec<f64>) -> Self {
        let mut acc = CompensatedSum::new();
        let partial_sums = terms
            .iter()
            .map(|&t| {
                acc += t;
                acc.value()
            })
            .collect();
        let truncation_order = terms.len() - 1;
        Self { center, terms, partial_sums, truncation_order, remainder_bound: None }
    }

    /// Value at the truncation order.
    pub fn value(&self) -> f64 {
        self.partial_sums[self.truncation_order]
    }

    /// Drops everything past order `s`.
    fn truncate(mut self, s: usize) -> Self {
        self.terms.truncate(s + 1);
        self.partial_sums.truncate(s + 1);
        self.truncation_order = s;
        self
    }

    fn result(&self) -> DivergenceResult {
        DivergenceResult {
            value: self.value(),
            log1p_form: None,
            method: Method::Taylor,
            bound: self.remainder_bound,
        }
    }
}

/// Outcome of an automatically truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesStatus {
    Converged,
    /// Hit `s_max` before two consecutive negligible terms.
    MaxOrderReached,
    /// Term magnitudes grew for three consecutive orders, or overflowed.
    Diverging,
}

/// Result of [`taylor_fdiv_auto`].
#[derive(Debug, Clone, PartialEq)]
pub struct AutoSeries {
    pub result: DivergenceResult,
    pub trace: SeriesTrace,
    pub status: SeriesStatus,
    pub diagnostic: Option<String>,
}

impl AutoSeries {
    pub fn converged(&self) -> bool {
        self.status == SeriesStatus::Converged
    }
}

fn check_center(generator: &Generator, center: f64) -> Result<()> {
    if !generator.is_analytic() {
        return Err(Error::NotAnalytic(generator.to_string()));
    }
    if !generator.in_derivative_domain(center) {
        return Err(Error::OutsideDerivativeDomain { generator: generator.to_string(), point: center });
    }
    Ok(())
}

fn series_terms<F: ExponentialFamily + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    center: f64,
    order: usize,
) -> Result<Vec<f64>> {
    check_center(generator, center)?;
    check_order(order, DEFAULT_K_MAX)?;
    let ladder = ipq_ladder(family, theta1, theta2, order)?;
    (0..=order)
        .map(|i| {
            let coefficient = generator.taylor_coefficient(i as u32, center)?;
            if coefficient == 0.0 {
                // polynomial generators: keep the tail exactly zero even if χⁱ overflowed
                return Ok(0.0);
            }
            Ok(coefficient * chi_k_from_ladder(&ladder, i, center))
        })
        .collect()
}

/// Series truncated at order `s` around `center`.
pub fn taylor_fdiv<F: ExponentialFamily + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    center: f64,
    s: usize,
) -> Result<(DivergenceResult, SeriesTrace)> {
    let terms = series_terms(generator, family, theta1, theta2, center, s)?;
    let trace = SeriesTrace::from_terms(center, terms);
    Ok((trace.result(), trace))
}

/// [`taylor_fdiv`] with the truncation error bound for a density-ratio
/// interval `[m, M]` attached to both the result and the trace.
#[allow(clippy::too_many_arguments)]
pub fn taylor_fdiv_bounded<F: ExponentialFamily + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    center: f64,
    s: usize,
    m: f64,
    big_m: f64,
) -> Result<(DivergenceResult, SeriesTrace)> {
    let bound = remainder_bound(generator, s, m, big_m)?;
    let (_, mut trace) = taylor_fdiv(generator, family, theta1, theta2, center, s)?;
    trace.remainder_bound = Some(bound);
    Ok((trace.result(), trace))
}

/// Sums terms until two consecutive ones fall below
/// `tol · max(1, |partial sum|)`, reporting the order before them.
///
/// The scan starts at order 2 because the order-0 and order-1 terms vanish
/// identically at center 1. Gives up with [`SeriesStatus::Diverging`] once
/// term magnitudes grow for three consecutive orders.
pub fn taylor_fdiv_auto<F: ExponentialFamily + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    center: f64,
    tol: f64,
    s_max: usize,
) -> Result<AutoSeries> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let terms = series_terms(generator, family, theta1, theta2, center, s_max)?;
    let full = SeriesTrace::from_terms(center, terms);
    let negligible =
        |i: usize| full.terms[i].abs() < tol * full.partial_sums[i].abs().max(1.0);

    for i in 2..=s_max {
        let t = &full.terms;
        if !t[i].is_finite() {
            return Ok(finish(full, i.saturating_sub(1), SeriesStatus::Diverging,
                Some(format!("term of order {i} is not finite"))));
        }
        if i >= 5 && (0..3).all(|d| t[i - d].abs() > t[i - d - 1].abs()) {
            return Ok(finish(full, i, SeriesStatus::Diverging, Some(format!(
                "term magnitudes grew over orders {}..={i}; center {center} is likely outside the radius of convergence",
                i - 3
            ))));
        }
        if i < s_max && negligible(i) && negligible(i + 1) {
            return Ok(finish(full, i - 1, SeriesStatus::Converged, None));
        }
    }
    Ok(finish(full, s_max, SeriesStatus::MaxOrderReached, Some(format!(
        "no two consecutive terms below tolerance {tol} up to order {s_max}"
    ))))
}

fn finish(full: SeriesTrace, s: usize, status: SeriesStatus, diagnostic: Option<String>) -> AutoSeries {
    let trace = full.truncate(s);
    AutoSeries { result: trace.result(), trace, status, diagnostic }
}

/// Truncation error bound `sup_[m,M] |f⁽ˢ⁺¹⁾| / (s+1)! · (M - m)^s` for the
/// center-1 series when the density ratio stays within `[m, M]`.
pub fn remainder_bound(generator: &Generator, s: usize, m: f64, big_m: f64) -> Result<f64> {
    let order = u32::try_from(s + 1)
        .map_err(|_| Error::InvalidParameter(format!("order {s} too large")))?;
    let sup = generator.sup_abs_deriv(order, m, big_m)?;
    let factorial: f64 = (1..=order).map(f64::from).product();
    Ok(sup / factorial * (big_m - m).powi(s as i32))
}

/// Second-order approximation `f''(1)/2 · χ²_P(p₁ : p₂)`.
///
/// This is the center-1 series truncated after its first non-vanishing term;
/// for the KL generator it reads `χ²_P ≈ 2 KL`.
pub fn second_order_approx<F: ExponentialFamily + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<DivergenceResult> {
    check_center(generator, 1.0)?;
    let curvature = generator.deriv(2, 1.0)?;
    let chi2 = closed_form::chi2_pearson(family, theta1, theta2)?;
    Ok(DivergenceResult::new(0.5 * curvature * chi2.value, Method::Taylor))
}

/// KL(p₁ : p₂) as `Σ_{i=2}^{s} (-1)^i / i · χⁱ_P(p₁ : p₂)`.
pub fn kl_series<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    s: usize,
) -> Result<(DivergenceResult, SeriesTrace)> {
    if s < 2 {
        return Err(Error::InvalidParameter(format!("KL series needs s >= 2, got {s}")));
    }
    let mut terms = vec![0.0; 2];
    for i in 2..=s {
        let chi = closed_form::chi_k_vajda(family, theta1, theta2, i)?.value;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign / i as f64 * chi);
    }
    let trace = SeriesTrace::from_terms(1.0, terms);
    Ok((trace.result(), trace))
}
