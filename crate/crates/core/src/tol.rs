//! Numerical tolerances used throughout the crate, pinned in one place.
//!
//! Every comparison in an inequality report or a test traces back to one of
//! these constants, so loosening a tolerance is a visible, reviewable event.

/// Slack allowed when both sides of an inequality are closed-form or
/// quadrature-grade. An inequality "holds" when lhs <= rhs + REPORT_CLOSED.
pub const REPORT_CLOSED: f64 = 1e-9;

/// Number of standard errors added to a Monte Carlo side before an
/// inequality is declared violated. Conservative: a true violation must
/// exceed the bound by more than this many stderr to be reported.
pub const MC_STDERR_FACTOR: f64 = 3.0;

/// Absolute tolerance for adaptive Simpson quadrature of densities.
pub const QUAD_ABS: f64 = 1e-10;

/// Accuracy floor demanded of the normal CDF / quantile pair
/// (verified against a 40-digit reference table).
pub const PHI_ABS: f64 = 1e-12;

/// Gradient-norm tolerance for the proximal point solve.
pub const PROX_GRAD: f64 = 1e-10;

/// Absolute bracket width at which mixing-time bisection stops.
pub const TMIX_BISECT: f64 = 1e-9;

/// Relative agreement demanded between grid-discretized divergences and
/// their Gaussian closed forms (0.5% at the default grid resolution).
pub const GRID_VS_CLOSED_REL: f64 = 5e-3;

/// Relative accuracy demanded of the grid Poincare eigensolve against
/// analytic constants (1% at the default resolution).
pub const EIGEN_REL: f64 = 1e-2;

/// Tolerance for spot checks against 5-decimal reference values.
pub const SPOT_5DP: f64 = 1e-5;

/// Tight tolerance for identities that are exact up to rounding.
pub const EXACT: f64 = 1e-12;
