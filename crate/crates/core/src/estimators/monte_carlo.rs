use crate::error::{Error, Result};
use crate::estimators::EstimateResult;
use crate::family::{ExponentialFamily, NaturalParam, NormalSource};
use crate::generator::Generator;
use crate::parallel::{self, Execution};

/// Skipped-summand fraction above which a warning is logged.
pub const SKIP_WARN_FRACTION: f64 = 1e-6;

/// Streaming mean and sum of squared deviations (Welford).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
    skipped: u64,
}

impl Moments {
    fn push(&mut self, y: f64) {
        if !y.is_finite() {
            self.skipped += 1;
            return;
        }
        self.count += 1;
        let delta = y - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (y - self.mean);
    }

    // Chan et al. pairwise combination
    fn merge(self, other: Moments) -> Moments {
        if other.count == 0 {
            return Moments { skipped: self.skipped + other.skipped, ..self };
        }
        if self.count == 0 {
            return Moments { skipped: self.skipped + other.skipped, ..other };
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2, skipped: self.skipped + other.skipped }
    }
}

/// Symmetrized Monte Carlo estimate of `I_f(p₁ : p₂)`:
///
/// ```text
/// 1/(2n) Σ_i [ f(r(sᵢ)) + f(r(tᵢ)) / r(tᵢ) ],   r = p₂/p₁,  s ~ p₁,  t ~ p₂
/// ```
///
/// Both halves are unbiased for the divergence. The density ratio is formed
/// in log space from the sufficient statistic,
/// `log r(x) = <t(x), θ₂ - θ₁> - F(θ₂) + F(θ₁)`, so the carrier cancels.
/// The standard error comes from the sample variance of all 2n summands.
///
/// Deterministic for a fixed seed; see [`crate::parallel`].
pub fn mc_fdiv<F: ExponentialFamily + Sync + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    n: usize,
    seed: u64,
) -> Result<EstimateResult> {
    mc_fdiv_with(generator, family, theta1, theta2, n, seed, Execution::default())
}

pub fn mc_fdiv_with<F: ExponentialFamily + Sync + ?Sized>(
    generator: &Generator,
    family: &F,
    theta1: &NaturalParam,
    theta2: &NaturalParam,
    n: usize,
    seed: u64,
    exec: Execution,
) -> Result<EstimateResult> {
    family.check_sampleable(theta1)?;
    family.check_sampleable(theta2)?;
    if n == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs n >= 1".into()));
    }
    let direction: Vec<f64> =
        theta2.coords().iter().zip(theta1.coords()).map(|(b, a)| b - a).collect();
    let offset = family.log_normalizer(theta2) - family.log_normalizer(theta1);
    if !offset.is_finite() {
        return Err(Error::DomainViolation(theta2.coords().to_vec()));
    }
    let log_ratio = |stat: &[f64]| -> f64 {
        stat.iter().zip(&direction).map(|(t, d)| t * d).sum::<f64>() - offset
    };
    let d = family.order();

    let chunks = parallel::map_chunks(parallel::chunk_count(n), exec, |c| {
        let range = parallel::chunk_range(c, n);
        let mut moments = Moments::default();
        let mut stat = vec![0.0; d];

        let mut rng = parallel::chunk_rng(seed, 2 * c as u64);
        let mut normals = NormalSource::default();
        for _ in range.clone() {
            family.sample_statistic(theta1, &mut rng, &mut normals, &mut stat);
            let r = log_ratio(&stat).exp();
            moments.push(generator.eval(r));
        }

        let mut rng = parallel::chunk_rng(seed, 2 * c as u64 + 1);
        let mut normals = NormalSource::default();
        for _ in range {
            family.sample_statistic(theta2, &mut rng, &mut normals, &mut stat);
            let lr = log_ratio(&stat);
            moments.push((-lr).exp() * generator.eval(lr.exp()));
        }
        moments
    });

    let total = chunks.into_iter().fold(Moments::default(), Moments::merge);
    let attempted = 2 * n as u64;
    if total.skipped as f64 > SKIP_WARN_FRACTION * attempted as f64 {
        log::warn!(
            "Monte Carlo skipped {} of {attempted} summands with non-finite density ratios",
            total.skipped
        );
    }
    if total.count == 0 {
        return Err(Error::NonFiniteSummand("every Monte Carlo summand".into()));
    }
    let variance = if total.count > 1 { total.m2 / (total.count - 1) as f64 } else { 0.0 };
    Ok(EstimateResult {
        value: total.mean,
        n: total.count,
        std_error: Some((variance / total.count as f64).sqrt()),
        tail_mass_dropped: None,
        skipped: total.skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_iso_gaussian, make_poisson};

    #[test]
    fn welford_merge_matches_direct() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, whole.count);
        assert!((merged.mean - whole.mean).abs() < 1e-12);
        assert!((merged.m2 - whole.m2).abs() < 1e-9 * whole.m2);
        let mut bad = Moments::default();
        bad.push(f64::NAN);
        assert_eq!(bad.merge(merged).skipped, 1);
    }

    #[test]
    fn identical_members_are_exactly_zero() {
        let f = make_iso_gaussian(2).unwrap();
        let t = NaturalParam::new(vec![0.3, -1.0]).unwrap();
        for g in [Generator::Kl, Generator::JensenShannon, Generator::TotalVariation] {
            let est = mc_fdiv(&g, &f, &t, &t, 5000, 1).unwrap();
            assert_eq!(est.value, 0.0);
            assert_eq!(est.std_error, Some(0.0));
        }
    }

    #[test]
    fn schedule_does_not_change_bits() {
        let f = make_poisson();
        let a = f.natural_from_rate(0.6).unwrap();
        let b = f.natural_from_rate(0.3).unwrap();
        let n = 5 * crate::parallel::CHUNK_SIZE + 11;
        let seq = mc_fdiv_with(&Generator::Kl, &f, &a, &b, n, 5, Execution::Sequential).unwrap();
        let par = mc_fdiv_with(&Generator::Kl, &f, &a, &b, n, 5, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.n, 2 * n as u64);
    }

    #[test]
    fn zero_draws_rejected() {
        let f = make_poisson();
        let a = f.natural_from_rate(1.0).unwrap();
        assert!(mc_fdiv(&Generator::Kl, &f, &a, &a, 0, 1).is_err());
    }
}
