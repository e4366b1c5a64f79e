//! Reference laws and their exact divergences.
//!
//! Two families carry the whole laboratory: isotropic Gaussians (closed
//! forms for every divergence and for the Poincare constant) and
//! piecewise-constant measures on a 1-D grid (cellwise divergences, exact
//! quantile-coupling Wasserstein distance, and a Poincare eigensolve).

mod gaussian;
mod grid;
mod poincare;
mod potential;

pub use gaussian::{
    gaussian_chi2, gaussian_kl, gaussian_tv, gaussian_w2, tv_isotropic, IsotropicGaussian,
    TV_MC_SAMPLES,
};
pub use grid::{grid_divergences, grid_w2, GridDivergences, GridMeasure1D};
pub use poincare::{poincare_grid_1d, poincare_of_gaussian, PoincareEstimate, PoincareMethod};
pub use potential::{GradFn, Potential, ValueFn};

/// A divergence that is either a finite number or genuinely infinite
/// (absolute continuity fails, or a closed-form finiteness condition is
/// violated). Infinity is a first-class outcome, never a float overflow
/// smuggled through computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DivergenceValue {
    Finite(f64),
    Infinite,
}

impl DivergenceValue {
    pub fn is_finite(&self) -> bool {
        matches!(self, DivergenceValue::Finite(_))
    }

    /// The finite value, or None.
    pub fn finite(&self) -> Option<f64> {
        match self {
            DivergenceValue::Finite(v) => Some(*v),
            DivergenceValue::Infinite => None,
        }
    }

    /// The value as f64, mapping the infinite marker to f64::INFINITY.
    /// For display and for right-hand sides of vacuously true bounds.
    pub fn as_f64(&self) -> f64 {
        match self {
            DivergenceValue::Finite(v) => *v,
            DivergenceValue::Infinite => f64::INFINITY,
        }
    }

    /// Unwrap a value that the caller has proven finite.
    ///
    /// # Panics
    ///
    /// Panics on the infinite marker.
    pub fn expect_finite(&self, what: &str) -> f64 {
        match self {
            DivergenceValue::Finite(v) => *v,
            DivergenceValue::Infinite => panic!("{what} is infinite"),
        }
    }
}

impl std::fmt::Display for DivergenceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DivergenceValue::Finite(v) => write!(f, "{v}"),
            DivergenceValue::Infinite => write!(f, "inf"),
        }
    }
}
