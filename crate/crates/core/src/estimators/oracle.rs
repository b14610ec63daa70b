use std::cell::Cell;

use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::estimators::quadrature;
use crate::estimators::EstimateResult;
use crate::family::{ExponentialFamily, Family, NaturalParam};
use crate::generator::{power_perspective, Generator};
use crate::sum::CompensatedSum;

/// Upper-tail mass of both pmfs left out of a Poisson summation.
pub const POISSON_TAIL_MASS: f64 = 1e-16;

/// Tensor quadrature cost is exponential in the dimension.
pub const GAUSSIAN_ORACLE_MAX_DIM: usize = 3;

/// Half-width added around the relevant means on each axis.
const GAUSSIAN_BOX_MARGIN: f64 = 12.0;

/// Consecutive negligible terms required before a Poisson sum past the tail
/// rule stops.
const QUIET_RUN: usize = 8;

const MAX_POISSON_TERMS: u64 = 50_000_000;

/// Knobs for the brute-force oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Poisson: sum at least up to this count instead of the tail rule.
    pub x_max: Option<u64>,
    /// Gaussian: absolute quadrature tolerance.
    pub quad_tol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { x_max: None, quad_tol: 1e-12 }
    }
}

/// Log density of the member at θ, straight from the ordinary
/// parameterization (log pmf for Poisson, log pdf for the Gaussian).
/// Poisson counts are passed as `x[0]`.
pub fn log_density(family: &Family, theta: &NaturalParam, x: &[f64]) -> f64 {
    match family {
        Family::Poisson => {
            let rate = theta.coords()[0].exp();
            let count = x[0];
            count * rate.ln() - rate - ln_factorial(count as u64)
        }
        Family::IsoGaussian { dim } => {
            let sq: f64 = x
                .iter()
                .zip(theta.coords())
                .map(|(xi, mi)| (xi - mi) * (xi - mi))
                .sum();
            -0.5 * sq - 0.5 * (*dim as f64) * (2.0 * std::f64::consts::PI).ln()
        }
    }
}

fn log_poisson_pmf(rate: f64, x: u64) -> f64 {
    x as f64 * rate.ln() - rate - ln_factorial(x)
}

/// Bound on P(X > x) for X ~ Poisson(rate), valid for x + 2 > rate:
/// the terms past x+1 shrink at least geometrically with ratio rate/(x+2).
fn poisson_tail_bound(rate: f64, x: u64) -> f64 {
    let ratio = rate / (x as f64 + 2.0);
    if ratio >= 1.0 {
        return 1.0;
    }
    log_poisson_pmf(rate, x + 1).exp() / (1.0 - ratio)
}

/// Smallest count (at or above every rate) whose combined upper-tail bound
/// over all `rates` falls below [`POISSON_TAIL_MASS`], with that bound.
pub fn poisson_x_max(rates: &[f64]) -> (u64, f64) {
    let top = rates.iter().cloned().fold(0.0, f64::max);
    let mut x = top.ceil() as u64;
    loop {
        let bound: f64 = rates.iter().map(|&r| poisson_tail_bound(r, x)).sum();
        if bound < POISSON_TAIL_MASS {
            return (x, bound);
        }
        x += 1;
    }
}

/// Brute-force `∫ p₁ f(p₂/p₁) dν`.
pub fn oracle_fdiv(
    generator: &Generator,
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
) -> Result<EstimateResult> {
    oracle_fdiv_with(generator, family, theta1, theta2, &OracleOptions::default())
}

pub fn oracle_fdiv_with(
    generator: &Generator,
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    options: &OracleOptions,
) -> Result<EstimateResult> {
    let anchors = vec![
        theta1.clone(),
        theta2.clone(),
        theta2.affine(2.0, theta1, -1.0),
        theta1.affine(2.0, theta2, -1.0),
    ];
    integrate_pair(family, theta1, theta2, &anchors, options, |lp1, lp2| {
        generator.perspective(lp1, lp2)
    })
}

/// Brute-force `∫ (p₂ - λp₁)^k / p₁^(k-1) dν`; order 0 is 1 by convention.
pub fn oracle_chi_k(
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: u32,
    center: f64,
) -> Result<EstimateResult> {
    oracle_chi_k_with(family, theta1, theta2, k, center, &OracleOptions::default())
}

pub fn oracle_chi_k_with(
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    k: u32,
    center: f64,
    options: &OracleOptions,
) -> Result<EstimateResult> {
    family.check_param(theta1)?;
    family.check_param(theta2)?;
    if k == 0 {
        return Ok(EstimateResult {
            value: 1.0,
            n: 0,
            std_error: None,
            tail_mass_dropped: None,
            skipped: 0,
        });
    }
    // mass of p₁^(1-j) p₂^j sits around (1-j)θ₁ + jθ₂
    let anchors: Vec<NaturalParam> =
        (0..=k).map(|j| theta1.affine(1.0 - f64::from(j), theta2, f64::from(j))).collect();
    integrate_pair(family, theta1, theta2, &anchors, options, |lp1, lp2| {
        power_perspective(lp1, lp2 - lp1, k, center)
    })
}

fn integrate_pair<G: Fn(f64, f64) -> f64>(
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    anchors: &[NaturalParam],
    options: &OracleOptions,
    integrand: G,
) -> Result<EstimateResult> {
    family.check_param(theta1)?;
    family.check_param(theta2)?;
    match family {
        Family::Poisson => poisson_sum(family, theta1, theta2, anchors, options, integrand),
        Family::IsoGaussian { dim } => {
            if *dim > GAUSSIAN_ORACLE_MAX_DIM {
                return Err(Error::UnsupportedDimension { got: *dim, max: GAUSSIAN_ORACLE_MAX_DIM });
            }
            gaussian_quadrature(family, theta1, theta2, anchors, options, integrand)
        }
    }
}

fn poisson_sum<G: Fn(f64, f64) -> f64>(
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    anchors: &[NaturalParam],
    options: &OracleOptions,
    integrand: G,
) -> Result<EstimateResult> {
    let rates = [theta1.coords()[0].exp(), theta2.coords()[0].exp()];
    // the integrand's mass can sit near an anchor rate well above both rates
    let anchor_rates: Vec<f64> = anchors.iter().map(|a| a.coords()[0].exp()).collect();
    if anchor_rates.iter().any(|&r| r.is_nan() || r >= MAX_POISSON_TERMS as f64 / 2.0) {
        return Err(Error::InvalidParameter(format!(
            "Poisson oracle needs integrand mass below count {}, anchors at rates {anchor_rates:?}",
            MAX_POISSON_TERMS / 2
        )));
    }
    let floor = options.x_max.unwrap_or_else(|| poisson_x_max(&anchor_rates).0);
    let mut acc = CompensatedSum::new();
    let mut abs_acc = 0.0f64;
    let mut skipped = 0u64;
    let mut quiet = 0usize;
    let mut x = 0u64;
    loop {
        let point = [x as f64];
        let lp1 = log_density(family, theta1, &point);
        let lp2 = log_density(family, theta2, &point);
        let term = integrand(lp1, lp2);
        if term.is_finite() {
            acc += term;
            abs_acc += term.abs();
        } else if lp1.exp() == 0.0 && lp2.exp() == 0.0 {
            skipped += 1;
        } else {
            return Err(Error::NonFiniteSummand(format!("Poisson count {x}")));
        }
        if x >= floor {
            let negligible = !term.is_finite() || term.abs() <= 1e-18 * abs_acc.max(f64::MIN_POSITIVE);
            quiet = if negligible { quiet + 1 } else { 0 };
            if quiet >= QUIET_RUN {
                break;
            }
        }
        x += 1;
        if x > MAX_POISSON_TERMS {
            return Err(Error::NonFiniteSummand(format!(
                "Poisson sum did not settle within {MAX_POISSON_TERMS} terms"
            )));
        }
    }
    if skipped > 0 {
        log::warn!("Poisson oracle skipped {skipped} counts where both pmfs underflow");
    }
    let tail: f64 = rates.iter().map(|&r| poisson_tail_bound(r, x)).sum();
    Ok(EstimateResult {
        value: acc.value(),
        n: x + 1,
        std_error: None,
        tail_mass_dropped: Some(tail),
        skipped,
    })
}

fn gaussian_quadrature<G: Fn(f64, f64) -> f64>(
    family: &Family,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    anchors: &[NaturalParam],
    options: &OracleOptions,
    integrand: G,
) -> Result<EstimateResult> {
    let dim = family.order();
    let bounds: Vec<(f64, f64)> = (0..dim)
        .map(|c| {
            let (lo, hi) = anchors.iter().map(|a| a.coords()[c]).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), v| (lo.min(v), hi.max(v)),
            );
            (lo - GAUSSIAN_BOX_MARGIN, hi + GAUSSIAN_BOX_MARGIN)
        })
        .collect();
    let skipped = Cell::new(0u64);
    let failure = Cell::new(None::<f64>);
    let q = quadrature::integrate_box(
        |x| {
            let lp1 = log_density(family, theta1, x);
            let lp2 = log_density(family, theta2, x);
            let v = integrand(lp1, lp2);
            if v.is_finite() {
                v
            } else {
                if lp1.exp() == 0.0 && lp2.exp() == 0.0 {
                    skipped.set(skipped.get() + 1);
                } else if failure.get().is_none() {
                    failure.set(Some(x[0]));
                }
                0.0
            }
        },
        &bounds,
        options.quad_tol,
    );
    if let Some(at) = failure.get() {
        return Err(Error::NonFiniteSummand(format!("Gaussian quadrature node near x₀ = {at}")));
    }
    if q.error_estimate > options.quad_tol.max(1e-12 * q.value.abs()) {
        log::warn!(
            "Gaussian quadrature error estimate {} above tolerance {}",
            q.error_estimate,
            options.quad_tol
        );
    }
    Ok(EstimateResult {
        value: q.value,
        n: q.evaluations,
        std_error: None,
        tail_mass_dropped: None,
        skipped: skipped.get(),
    })
}
