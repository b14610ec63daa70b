//! Reference estimators that need no closed form.
//!
//! [`mc_fdiv`] is the symmetrized two-sample Monte Carlo estimator;
//! [`oracle_fdiv`] and [`oracle_chi_k`] evaluate the defining integrals
//! directly (exhaustive summation for Poisson, nested adaptive quadrature for
//! the Gaussian family) and serve as ground truth in tests.

mod monte_carlo;
mod oracle;
pub mod quadrature;

use serde::{Deserialize, Serialize};

pub use monte_carlo::{mc_fdiv, mc_fdiv_with, SKIP_WARN_FRACTION};
pub use oracle::{
    log_density, oracle_chi_k, oracle_chi_k_with, oracle_fdiv, oracle_fdiv_with, poisson_x_max,
    OracleOptions, GAUSSIAN_ORACLE_MAX_DIM, POISSON_TAIL_MASS,
};

/// Value of a sampled or brute-force estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    /// Summands used (Monte Carlo) or integrand evaluations (oracle).
    pub n: u64,
    /// Monte Carlo only.
    pub std_error: Option<f64>,
    /// Oracle only: bound on the probability mass outside the summation range.
    pub tail_mass_dropped: Option<f64>,
    /// Summands discarded because both densities underflowed.
    pub skipped: u64,
}
