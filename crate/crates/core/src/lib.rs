//! cutofflab: a laboratory for log-concave sampling dynamics.
//!
//! The crate studies two samplers for targets pi ∝ exp(-V) — unadjusted
//! Langevin and the proximal (forward heat / backward restricted-Gaussian)
//! scheme — together with the functional-inequality toolkit that controls
//! their mixing: Poincare constants, transport bounds between Wasserstein
//! and TV/chi-squared, parabolic regularization of KL along the flows, and
//! the mixing-time and mixing-window estimates those bounds imply.
//!
//! The design rule throughout: every quantity carries its provenance. A
//! number is either a closed form, a quadrature with a pinned tolerance, or
//! a Monte Carlo estimate with a standard error, and the type system keeps
//! the three from being confused (see [`metrics::DivergenceEstimate`]).
//! Randomness flows through counter-based streams ([`samplers::RngStream`])
//! addressed by (seed, stream, position), so every result in the crate is
//! reproducible bit-for-bit at any thread count.

pub mod error;
pub mod experiments;
pub mod inequalities;
pub mod measures;
pub mod metrics;
pub mod numeric;
pub mod samplers;
pub mod tol;

pub use error::{Error, Result};
pub use experiments::MixingProfile;
pub use inequalities::InequalityReport;
pub use measures::{DivergenceValue, GridMeasure1D, IsotropicGaussian, Potential};
pub use metrics::{DivergenceEstimate, EstimateMethod};
pub use samplers::{ParticleEnsemble, RngStream};
