//! Exponential families with an affine natural parameter space.
//!
//! A member of the family has density
//! `p(x; θ) = exp(<t(x), θ> - F(θ) + k(x))` with respect to a base measure.
//! Everything in this crate is driven by the log-normalizer `F`, its
//! gradient, and an exact sampler for the sufficient statistic `t(x)`.
//!
//! | family            | θ       | Θ    | F(θ)      | t(x) | base measure |
//! |-------------------|---------|------|-----------|------|--------------|
//! | Poisson           | log λ   | ℝ    | e^θ       | x    | counting     |
//! | isotropic Gaussian| μ       | ℝ^d  | ½ θᵀθ     | x    | Lebesgue     |

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel::{self, Execution};

/// Largest Poisson rate handed to a single sequential-search inversion.
/// Larger rates are split into independent pieces of at most this size.
pub const POISSON_INVERSION_MAX_RATE: f64 = 30.0;

/// Largest Poisson rate the sampler accepts; the cost per draw is linear in
/// the rate.
pub const POISSON_SAMPLER_MAX_RATE: f64 = 1e8;

/// A point θ in the natural parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaturalParam {
    coords: Vec<f64>,
}

impl NaturalParam {
    /// Rejects empty or non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidParameter("natural parameter has no coordinates".into()));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite natural coordinate {c}")));
        }
        Ok(Self { coords })
    }

    pub fn scalar(theta: f64) -> Result<Self> {
        Self::new(vec![theta])
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `a·self + b·other`, computed coordinate-wise.
    ///
    /// The result is not validated: far-out combinations may overflow and are
    /// caught by [`ExponentialFamily::in_domain`].
    pub fn affine(&self, a: f64, other: &NaturalParam, b: f64) -> NaturalParam {
        let coords = self
            .coords
            .iter()
            .zip(&other.coords)
            .map(|(x, y)| a * x + b * y)
            .collect();
        NaturalParam { coords }
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.coords.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Ordinary (source) parameterization of a family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceParam {
    Poisson { rate: f64 },
    IsoGaussian { mean: Vec<f64> },
}

/// One draw from a family member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observation {
    Count(u64),
    Point(Vec<f64>),
}

/// Interface shared by every exponential family the divergence routines
/// accept.
///
/// `in_domain` is consulted before every closed-form evaluation so that a
/// family whose natural space is not affine fails loudly instead of
/// returning a formula value for a non-normalizable parameter.
pub trait ExponentialFamily {
    /// Dimension D of the natural parameter space.
    fn order(&self) -> usize;

    /// F(θ).
    fn log_normalizer(&self, theta: &NaturalParam) -> f64;

    /// ∇F(θ), which is also the mean of the sufficient statistic.
    fn grad_log_normalizer(&self, theta: &NaturalParam) -> Vec<f64>;

    /// Membership of θ in the natural parameter space.
    fn in_domain(&self, theta: &NaturalParam) -> bool;

    /// Exponent of the integral ∫ p₁^p p₂^(1-p):
    /// `F(pθ₁ + (1-p)θ₂) - pF(θ₁) - (1-p)F(θ₂)`.
    ///
    /// Families may override this with an algebraically equal but better
    /// conditioned expression.
    fn ipq_exponent(&self, theta1: &NaturalParam, theta2: &NaturalParam, p: f64) -> f64 {
        let q = 1.0 - p;
        let mixed = theta1.affine(p, theta2, q);
        self.log_normalizer(&mixed)
            - (p * self.log_normalizer(theta1) + q * self.log_normalizer(theta2))
    }

    /// Bregman divergence `F(a) - F(b) - <a - b, ∇F(b)>`.
    fn bregman(&self, a: &NaturalParam, b: &NaturalParam) -> f64 {
        let grad = self.grad_log_normalizer(b);
        let diff: f64 = a
            .coords()
            .iter()
            .zip(b.coords())
            .zip(&grad)
            .map(|((x, y), g)| (x - y) * g)
            .sum();
        self.log_normalizer(a) - self.log_normalizer(b) - diff
    }

    /// Draws one observation and writes its sufficient statistic into `out`
    /// (length [`order`](Self::order)).
    fn sample_statistic<R: Rng + ?Sized>(
        &self,
        theta: &NaturalParam,
        rng: &mut R,
        normals: &mut NormalSource,
        out: &mut [f64],
    );

    /// Checks run before sampling; defaults to [`check_param`](Self::check_param).
    fn check_sampleable(&self, theta: &NaturalParam) -> Result<()> {
        self.check_param(theta)
    }

    /// Dimension and domain check shared by every public operation.
    fn check_param(&self, theta: &NaturalParam) -> Result<()> {
        if theta.dim() != self.order() {
            return Err(Error::DimensionMismatch { expected: self.order(), got: theta.dim() });
        }
        if !self.in_domain(theta) {
            return Err(Error::DomainViolation(theta.coords().to_vec()));
        }
        Ok(())
    }
}

/// The built-in affine families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Poisson,
    IsoGaussian { dim: usize },
}

/// Poisson family, θ = log λ.
pub fn make_poisson() -> Family {
    Family::Poisson
}

/// Unit-covariance Gaussian family on ℝ^d, θ = μ.
pub fn make_iso_gaussian(dim: usize) -> Result<Family> {
    if dim == 0 {
        return Err(Error::InvalidParameter("isotropic Gaussian needs dimension >= 1".into()));
    }
    Ok(Family::IsoGaussian { dim })
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Poisson => "poisson",
            Family::IsoGaussian { .. } => "gaussian",
        }
    }

    /// Maps ordinary parameters to natural coordinates.
    pub fn to_natural(&self, src: &SourceParam) -> Result<NaturalParam> {
        match (self, src) {
            (Family::Poisson, SourceParam::Poisson { rate }) => {
                if !(rate.is_finite() && *rate > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Poisson rate must be positive and finite, got {rate}"
                    )));
                }
                NaturalParam::scalar(rate.ln())
            }
            (Family::IsoGaussian { dim }, SourceParam::IsoGaussian { mean }) => {
                if mean.len() != *dim {
                    return Err(Error::DimensionMismatch { expected: *dim, got: mean.len() });
                }
                NaturalParam::new(mean.clone())
            }
            _ => Err(Error::InvalidParameter(format!(
                "source parameter {src:?} does not belong to family {}",
                self.name()
            ))),
        }
    }

    /// Inverse of [`to_natural`](Self::to_natural).
    pub fn to_source(&self, theta: &NaturalParam) -> Result<SourceParam> {
        self.check_param(theta)?;
        Ok(match self {
            Family::Poisson => SourceParam::Poisson { rate: theta.coords()[0].exp() },
            Family::IsoGaussian { .. } => SourceParam::IsoGaussian { mean: theta.coords().to_vec() },
        })
    }

    pub fn natural_from_rate(&self, rate: f64) -> Result<NaturalParam> {
        self.to_natural(&SourceParam::Poisson { rate })
    }

    pub fn natural_from_mean(&self, mean: &[f64]) -> Result<NaturalParam> {
        self.to_natural(&SourceParam::IsoGaussian { mean: mean.to_vec() })
    }

    /// `n` independent draws from the member at θ.
    ///
    /// The sequence depends only on `(seed, θ, n)`; chunking fixes which
    /// random stream each draw consumes.
    pub fn sample(&self, theta: &NaturalParam, n: usize, seed: u64) -> Result<Vec<Observation>> {
        self.sample_with(theta, n, seed, Execution::default())
    }

    pub fn sample_with(
        &self,
        theta: &NaturalParam,
        n: usize,
        seed: u64,
        exec: Execution,
    ) -> Result<Vec<Observation>> {
        self.check_sampleable(theta)?;
        let d = self.order();
        let chunks = parallel::map_chunks(parallel::chunk_count(n), exec, |c| {
            let mut rng = parallel::chunk_rng(seed, c as u64);
            let mut normals = NormalSource::default();
            let mut stat = vec![0.0; d];
            parallel::chunk_range(c, n)
                .map(|_| {
                    self.sample_statistic(theta, &mut rng, &mut normals, &mut stat);
                    match self {
                        Family::Poisson => Observation::Count(stat[0] as u64),
                        Family::IsoGaussian { .. } => Observation::Point(stat.clone()),
                    }
                })
                .collect::<Vec<_>>()
        });
        Ok(chunks.into_iter().flatten().collect())
    }
}

impl ExponentialFamily for Family {
    fn order(&self) -> usize {
        match self {
            Family::Poisson => 1,
            Family::IsoGaussian { dim } => *dim,
        }
    }

    fn log_normalizer(&self, theta: &NaturalParam) -> f64 {
        match self {
            Family::Poisson => theta.coords()[0].exp(),
            Family::IsoGaussian { .. } => 0.5 * theta.dot(theta.coords()),
        }
    }

    fn grad_log_normalizer(&self, theta: &NaturalParam) -> Vec<f64> {
        match self {
            Family::Poisson => vec![theta.coords()[0].exp()],
            Family::IsoGaussian { .. } => theta.coords().to_vec(),
        }
    }

    fn in_domain(&self, theta: &NaturalParam) -> bool {
        theta.dim() == self.order() && theta.coords().iter().all(|c| c.is_finite())
    }

    fn ipq_exponent(&self, theta1: &NaturalParam, theta2: &NaturalParam, p: f64) -> f64 {
        let q = 1.0 - p;
        match self {
            // λ₁ (exp(q·log r) - 1 - q(r - 1)), r = λ₂/λ₁
            Family::Poisson => {
                let (t1, t2) = (theta1.coords()[0], theta2.coords()[0]);
                let delta = t2 - t1;
                let lambda1 = t1.exp();
                lambda1 * ((q * delta).exp_m1() - q * delta.exp_m1())
            }
            // quadratic F: -½ p q ‖θ₁ - θ₂‖²
            Family::IsoGaussian { .. } => -0.5 * p * q * squared_distance(theta1, theta2),
        }
    }

    fn bregman(&self, a: &NaturalParam, b: &NaturalParam) -> f64 {
        match self {
            // e^b (expm1(a - b) - (a - b))
            Family::Poisson => {
                let delta = a.coords()[0] - b.coords()[0];
                b.coords()[0].exp() * (delta.exp_m1() - delta)
            }
            Family::IsoGaussian { .. } => 0.5 * squared_distance(a, b),
        }
    }

    fn check_sampleable(&self, theta: &NaturalParam) -> Result<()> {
        self.check_param(theta)?;
        if let Family::Poisson = self {
            let rate = theta.coords()[0].exp();
            if rate > POISSON_SAMPLER_MAX_RATE {
                return Err(Error::InvalidParameter(format!(
                    "Poisson rate {rate} exceeds the sampler limit {POISSON_SAMPLER_MAX_RATE}"
                )));
            }
        }
        Ok(())
    }

    fn sample_statistic<R: Rng + ?Sized>(
        &self,
        theta: &NaturalParam,
        rng: &mut R,
        normals: &mut NormalSource,
        out: &mut [f64],
    ) {
        match self {
            Family::Poisson => out[0] = poisson_draw(theta.coords()[0].exp(), rng) as f64,
            Family::IsoGaussian { .. } => {
                for (o, mu) in out.iter_mut().zip(theta.coords()) {
                    *o = mu + normals.next(rng);
                }
            }
        }
    }
}

fn squared_distance(a: &NaturalParam, b: &NaturalParam) -> f64 {
    a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Poisson draw by sequential search on the CDF.
///
/// Cost is O(rate). Rates above [`POISSON_INVERSION_MAX_RATE`] are split into
/// equal pieces and the independent draws summed, which keeps e^{-rate}
/// far from underflow.
pub fn poisson_draw<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    if rate <= POISSON_INVERSION_MAX_RATE {
        return poisson_inversion(rate, rng);
    }
    let pieces = (rate / POISSON_INVERSION_MAX_RATE).ceil();
    let piece_rate = rate / pieces;
    (0..pieces as u64).map(|_| poisson_inversion(piece_rate, rng)).sum()
}

fn poisson_inversion<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut x = 0u64;
    let mut pmf = (-rate).exp();
    let mut cdf = pmf;
    while u > cdf {
        x += 1;
        pmf *= rate / x as f64;
        if pmf == 0.0 {
            // cdf stalled below u through rounding
            break;
        }
        cdf += pmf;
    }
    x
}

/// Box-Muller standard normals, caching the second variate of each pair.
#[derive(Debug, Clone, Default)]
pub struct NormalSource {
    spare: Option<f64>,
}

impl NormalSource {
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - U lies in (0, 1], keeping the log finite
        let u1 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = std::f64::consts::TAU * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}
