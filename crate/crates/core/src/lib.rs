//! Chi-type distances, f-divergences and KL between members of one
//! exponential family with an affine natural parameter space.
//!
//! - [`closed_form`]: exact Pearson/Neyman χ², signed Vajda χᵏ, centered
//!   χᵏ_λ, KL as a Bregman divergence, alpha-divergence.
//! - [`taylor`]: f-divergences as power series in centered chi-type
//!   distances, with truncation traces and remainder bounds.
//! - [`estimators`]: seeded Monte Carlo and brute-force oracles that need no
//!   closed form.
//!
//! ```
//! use fdiv_core::{closed_form, family};
//!
//! let poisson = family::make_poisson();
//! let a = poisson.natural_from_rate(1.0).unwrap();
//! let b = poisson.natural_from_rate(2.0).unwrap();
//! let chi2 = closed_form::chi2_pearson(&poisson, &a, &b).unwrap();
//! assert!((chi2.value - (std::f64::consts::E - 1.0)).abs() < 1e-12);
//! ```

pub mod closed_form;
pub mod error;
pub mod estimators;
pub mod family;
pub mod generator;
pub mod parallel;
pub mod sum;
pub mod taylor;

pub use closed_form::{DivergenceResult, Method};
pub use error::{Error, Result};
pub use family::{ExponentialFamily, Family, NaturalParam, SourceParam};
pub use generator::Generator;
pub use parallel::Execution;
