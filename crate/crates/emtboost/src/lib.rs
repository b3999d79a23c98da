//! Zero-inflated Tweedie regression fitted by an EM algorithm whose mean
//! model is a gradient-boosted ensemble of regression trees.
//!
//! The crate provides:
//!
//! - [`tweedie`]: the compound Poisson-Gamma density kernel (series
//!   normalizer, log-density, zero mass, parameter conversions);
//! - [`zif`]: the zero-inflated mixture density, posterior weights of the
//!   latent mixture indicator, and the EM Q-function;
//! - [`boost`]: L-terminal-node regression trees and the posterior-weighted
//!   Tweedie boosting loop, with cross-validation over ensemble size and
//!   tree size;
//! - [`em`]: the EM fitter (blockwise mean/dispersion/mixture updates),
//!   penalized mixture-weight updates, and profile likelihood over the
//!   index parameter;
//! - [`metrics`]: Gini indices, ordered Lorentz curves, mean absolute
//!   deviation splits, and minimax model selection;
//! - [`simgen`]: seeded data generators for the simulation scenarios and
//!   the under-/over-sampling resampler;
//! - [`model_io`]: JSON persistence for fitted models.
//!
//! The scalar kernels ([`tweedie`], [`optimize`]) are generic over the
//! floating-point type through [`num::Real`]; the data pipeline is `f64`.
//! Concrete aliases for the generic types live at the crate root.

pub mod boost;
pub mod em;
pub mod error;
pub mod metrics;
pub mod model_io;
pub mod num;
pub mod optimize;
pub mod portfolio;
pub mod simgen;
pub mod tweedie;
pub mod zif;

pub use error::{Error, Result};
pub use portfolio::{Matrix, Portfolio};

/// Tweedie parameters over the default `f64` scalar.
pub type TweedieParams = tweedie::TweedieParams<f64>;
/// Compound Poisson parameters over the default `f64` scalar.
pub type CompoundPoissonParams = tweedie::CompoundPoissonParams<f64>;
/// Zero-inflated Tweedie parameters over the default `f64` scalar.
pub type ZifParams = zif::ZifParams<f64>;
