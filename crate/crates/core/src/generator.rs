//! f-divergence generators.
//!
//! A generator is a convex `f` on (0, ∞) with `f(1) = 0`; the divergence is
//! `I_f(p₁ : p₂) = ∫ p₁ f(p₂ / p₁) dν`. Every built-in generator carries its
//! derivatives of all orders in closed form, since the series expansions need
//! orders far beyond what finite differences can deliver.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Built-in generators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Generator {
    /// `-log u`, giving KL(p₁ : p₂).
    Kl,
    /// `u log u`, giving KL(p₂ : p₁).
    ReverseKl,
    /// `(u - 1)²`
    PearsonChi2,
    /// `(1 - u)² / u`
    NeymanChi2,
    /// `(√u - 1)²`
    SquaredHellinger,
    /// `-(u + 1) log((1 + u)/2) + u log u`. Note this integrates to twice the
    /// usual ½-weighted Jensen-Shannon divergence.
    JensenShannon,
    /// `4/(1 - α²) (1 - u^((1+α)/2))`, α ∉ {-1, 1}.
    Alpha(f64),
    /// `(u - 1)^k`, k ≥ 1. Convex only for even k.
    PearsonVajda(u32),
    /// `½ |u - 1|`. Not analytic at 1; usable by the estimators only.
    TotalVariation,
}

/// Where a generator's derivatives of every order exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeDomain {
    AllReals,
    PositiveReals,
    /// Non-analytic generator.
    None,
}

/// Builds a generator from its name.
///
/// Accepted names: `kl`, `reverse-kl`, `pearson`, `neyman`, `hellinger`,
/// `js`, `alpha` (needs `param` = α), `vajda` (needs `param` = k), `tv`.
pub fn make_generator(name: &str, param: Option<f64>) -> Result<Generator> {
    let need = |what: &str| {
        param.ok_or_else(|| {
            Error::InvalidParameter(format!("generator {name} needs a {what} parameter"))
        })
    };
    let generator = match name.to_ascii_lowercase().as_str() {
        "kl" | "kullback-leibler" => Generator::Kl,
        "reverse-kl" | "rkl" => Generator::ReverseKl,
        "pearson" | "pearson-chi2" | "chi2" => Generator::PearsonChi2,
        "neyman" | "neyman-chi2" => Generator::NeymanChi2,
        "hellinger" | "squared-hellinger" => Generator::SquaredHellinger,
        "js" | "jensen-shannon" => Generator::JensenShannon,
        "alpha" => {
            let alpha = need("alpha")?;
            if !alpha.is_finite() || alpha.abs() == 1.0 {
                return Err(Error::SingularAlpha(alpha));
            }
            Generator::Alpha(alpha)
        }
        "vajda" | "pearson-vajda" => {
            let k = need("order")?;
            if !(k >= 1.0 && k.fract() == 0.0 && k <= u32::MAX as f64) {
                return Err(Error::InvalidParameter(format!(
                    "Pearson-Vajda order must be a positive integer, got {k}"
                )));
            }
            Generator::PearsonVajda(k as u32)
        }
        "tv" | "total-variation" => Generator::TotalVariation,
        _ => return Err(Error::UnknownGenerator(name.to_string())),
    };
    Ok(generator)
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// a (a-1) ... (a-i+1)
fn falling_factorial(a: f64, i: u32) -> f64 {
    (0..i).map(|j| a - f64::from(j)).product()
}

fn sign(i: u32) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn xlogx(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.ln()
    }
}

impl Generator {
    /// Canonical CLI name.
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Kl => "kl",
            Generator::ReverseKl => "reverse-kl",
            Generator::PearsonChi2 => "pearson",
            Generator::NeymanChi2 => "neyman",
            Generator::SquaredHellinger => "hellinger",
            Generator::JensenShannon => "js",
            Generator::Alpha(_) => "alpha",
            Generator::PearsonVajda(_) => "vajda",
            Generator::TotalVariation => "tv",
        }
    }

    /// Numeric parameter (α or k), if any.
    pub fn param(&self) -> Option<f64> {
        match self {
            Generator::Alpha(a) => Some(*a),
            Generator::PearsonVajda(k) => Some(f64::from(*k)),
            _ => None,
        }
    }

    /// f(u).
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Generator::Kl => -u.ln(),
            Generator::ReverseKl => xlogx(u),
            Generator::PearsonChi2 => (u - 1.0) * (u - 1.0),
            Generator::NeymanChi2 => (1.0 - u) * (1.0 - u) / u,
            Generator::SquaredHellinger => {
                let r = u.sqrt() - 1.0;
                r * r
            }
            Generator::JensenShannon => -(u + 1.0) * ((1.0 + u) / 2.0).ln() + xlogx(u),
            Generator::Alpha(alpha) => {
                4.0 / (1.0 - alpha * alpha) * (1.0 - u.powf(0.5 * (1.0 + alpha)))
            }
            Generator::PearsonVajda(k) => (u - 1.0).powi(k as i32),
            Generator::TotalVariation => 0.5 * (u - 1.0).abs(),
        }
    }

    pub fn derivative_domain(&self) -> DerivativeDomain {
        match self {
            Generator::PearsonChi2 | Generator::PearsonVajda(_) => DerivativeDomain::AllReals,
            Generator::TotalVariation => DerivativeDomain::None,
            _ => DerivativeDomain::PositiveReals,
        }
    }

    pub fn is_analytic(&self) -> bool {
        self.derivative_domain() != DerivativeDomain::None
    }

    /// Whether every derivative exists at `point`.
    pub fn in_derivative_domain(&self, point: f64) -> bool {
        point.is_finite()
            && match self.derivative_domain() {
                DerivativeDomain::AllReals => true,
                DerivativeDomain::PositiveReals => point > 0.0,
                DerivativeDomain::None => false,
            }
    }

    /// f⁽ⁱ⁾(point), in closed form.
    pub fn deriv(&self, i: u32, point: f64) -> Result<f64> {
        if i == 0 && point.is_finite() && !matches!(self.derivative_domain(), DerivativeDomain::PositiveReals) {
            return Ok(self.eval(point));
        }
        if !self.in_derivative_domain(point) {
            return Err(Error::OutsideDerivativeDomain {
                generator: self.to_string(),
                point,
            });
        }
        let t = point;
        let value = match (*self, i) {
            (_, 0) => self.eval(t),
            (Generator::Kl, _) => sign(i) * factorial(i - 1) * t.powi(-(i as i32)),
            (Generator::ReverseKl, 1) => t.ln() + 1.0,
            (Generator::ReverseKl, _) => sign(i) * factorial(i - 2) * t.powi(1 - i as i32),
            (Generator::PearsonChi2, 1) => 2.0 * (t - 1.0),
            (Generator::PearsonChi2, 2) => 2.0,
            (Generator::PearsonChi2, _) => 0.0,
            (Generator::NeymanChi2, 1) => 1.0 - t.powi(-2),
            (Generator::NeymanChi2, _) => sign(i) * factorial(i) * t.powi(-(i as i32) - 1),
            (Generator::SquaredHellinger, 1) => 1.0 - t.powf(-0.5),
            (Generator::SquaredHellinger, _) => {
                -2.0 * falling_factorial(0.5, i) * t.powf(0.5 - f64::from(i))
            }
            (Generator::JensenShannon, 1) => t.ln() - ((1.0 + t) / 2.0).ln(),
            (Generator::JensenShannon, _) => {
                let n = 1 - i as i32;
                sign(i) * factorial(i - 2) * (t.powi(n) - (1.0 + t).powi(n))
            }
            (Generator::Alpha(alpha), _) => {
                let a = 0.5 * (1.0 + alpha);
                -4.0 / (1.0 - alpha * alpha) * falling_factorial(a, i) * t.powf(a - f64::from(i))
            }
            (Generator::PearsonVajda(k), _) => {
                if i > k {
                    0.0
                } else {
                    falling_factorial(f64::from(k), i) * (t - 1.0).powi((k - i) as i32)
                }
            }
            (Generator::TotalVariation, _) => unreachable!("rejected by the domain check"),
        };
        Ok(value)
    }

    /// Taylor coefficient f⁽ⁱ⁾(point) / i!.
    pub fn taylor_coefficient(&self, i: u32, point: f64) -> Result<f64> {
        Ok(self.deriv(i, point)? / factorial(i))
    }

    /// sup over [m, M] of |f⁽ⁱ⁾|, for i ≥ 1.
    ///
    /// For every built-in generator |f⁽ⁱ⁾| is quasi-convex on (0, ∞) when
    /// i ≥ 1 (a power of t or of |t - 1|, a logarithm, or a difference of
    /// decreasing powers), so the supremum sits at an endpoint.
    pub fn sup_abs_deriv(&self, i: u32, m: f64, big_m: f64) -> Result<f64> {
        if !self.is_analytic() {
            return Err(Error::NotAnalytic(self.to_string()));
        }
        if i == 0 {
            return Err(Error::InvalidParameter("supremum needs derivative order >= 1".into()));
        }
        if !(m.is_finite() && big_m.is_finite() && m > 0.0 && m <= big_m) {
            return Err(Error::InvalidInterval { m, big_m });
        }
        let lo = self.deriv(i, m)?.abs();
        let hi = self.deriv(i, big_m)?.abs();
        Ok(lo.max(hi))
    }

    /// `p₁ f(p₂/p₁)` from the log densities `lp1`, `lp2`, without forming
    /// the density ratio. Stays finite where one density underflows or the
    /// ratio overflows but the product itself is representable.
    pub fn perspective(&self, lp1: f64, lp2: f64) -> f64 {
        let d = lp2 - lp1;
        match *self {
            Generator::Kl => -d * lp1.exp(),
            Generator::ReverseKl => d * lp2.exp(),
            Generator::PearsonChi2 => power_perspective(lp1, d, 2, 1.0),
            Generator::PearsonVajda(k) => power_perspective(lp1, d, k, 1.0),
            Generator::NeymanChi2 => power_perspective(lp2, -d, 2, 1.0),
            Generator::Alpha(alpha) => {
                let a = 0.5 * (1.0 + alpha);
                4.0 / (1.0 - alpha * alpha) * (lp1.exp() - (lp1 + a * d).exp())
            }
            Generator::TotalVariation => 0.5 * (lp2.exp() - lp1.exp()).abs(),
            Generator::SquaredHellinger => {
                if d <= 0.0 {
                    lp1.exp() * (0.5 * d).exp_m1().powi(2)
                } else {
                    lp2.exp() * (-0.5 * d).exp_m1().powi(2)
                }
            }
            Generator::JensenShannon => {
                if d <= 0.0 {
                    lp1.exp() * self.eval(d.exp())
                } else {
                    // f(r)/r written in e^{-d}
                    let e = (-d).exp();
                    let g = -e * d - (1.0 + e) * (e.ln_1p() - std::f64::consts::LN_2);
                    lp2.exp() * g
                }
            }
        }
    }
}

/// `p (e^d - c)^k` with `p = e^lp`, evaluated in log space.
pub(crate) fn power_perspective(lp: f64, d: f64, k: u32, c: f64) -> f64 {
    if k == 0 {
        return lp.exp();
    }
    let r = d.exp();
    let (log_abs, negative) = if r.is_finite() {
        let gap = r - c;
        (gap.abs().ln(), gap < 0.0)
    } else {
        // e^d overflowed; c is negligible next to it
        (d, false)
    };
    let magnitude = (lp + f64::from(k) * log_abs).exp();
    if negative && k % 2 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Alpha(a) => write!(f, "alpha({a})"),
            Generator::PearsonVajda(k) => write!(f, "vajda({k})"),
            other => f.write_str(other.name()),
        }
    }
}
