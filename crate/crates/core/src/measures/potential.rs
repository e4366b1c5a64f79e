//! Potentials V for targets pi ∝ exp(-V), carrying their convexity window
//! [alpha, beta] (0 <= alpha <= V'' <= beta in the eigenvalue sense). The
//! samplers only ever touch values and gradients, so a potential is a pair
//! of callbacks plus the two constants; the quadratic case is kept as a
//! first-class variant because much of the test surface relies on knowing
//! sigma^2 exactly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

#[derive(Clone)]
enum Kind {
    Quadratic { sigma2: f64, center: Vec<f64> },
    Custom {
        value: Arc<ValueFn>,
        grad: Arc<GradFn>,
        label: String,
    },
}

/// A convex potential on R^d with curvature bounds alpha <= beta.
#[derive(Clone)]
pub struct Potential {
    dim: usize,
    alpha: f64,
    beta: f64,
    kind: Kind,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match &self.kind {
            Kind::Quadratic { sigma2, .. } => format!("quadratic(sigma2={sigma2})"),
            Kind::Custom { label, .. } => label.clone(),
        };
        f.debug_struct("Potential")
            .field("dim", &self.dim)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("kind", &label)
            .finish()
    }
}

impl Potential {
    /// V(x) = |x|^2 / (2 sigma^2), the potential of N(0, sigma^2 I).
    pub fn quadratic(dim: usize, sigma2: f64) -> Result<Self> {
        Self::quadratic_centered(vec![0.0; dim.max(1)], sigma2)
    }

    /// V(x) = |x - center|^2 / (2 variance), the potential of
    /// N(center, variance I).
    pub fn quadratic_centered(center: Vec<f64>, variance: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::InvalidParameter("center must have dimension >= 1".into()));
        }
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidParameter("center must be finite".into()));
        }
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "quadratic potential needs variance > 0, got {variance}"
            )));
        }
        let curv = 1.0 / variance;
        Ok(Self {
            dim: center.len(),
            alpha: curv,
            beta: curv,
            kind: Kind::Quadratic { sigma2: variance, center },
        })
    }

    /// V(x) = sum_i ln cosh(x_i): convex but not strongly convex
    /// (alpha = 0, beta = 1), with linear growth and sub-Gaussian-free
    /// tails. The workhorse non-quadratic test target.
    pub fn logcosh_well(dim: usize) -> Self {
        let value = Arc::new(|x: &[f64]| x.iter().map(|&xi| ln_cosh(xi)).sum());
        let grad = Arc::new(|x: &[f64], out: &mut [f64]| {
            for (g, &xi) in out.iter_mut().zip(x) {
                *g = xi.tanh();
            }
        });
        Self {
            dim: dim.max(1),
            alpha: 0.0,
            beta: 1.0,
            kind: Kind::Custom {
                value,
                grad,
                label: "logcosh-well".into(),
            },
        }
    }

    /// User-supplied potential. `alpha` and `beta` are trusted curvature
    /// bounds; the rejection oracle is only correct when they hold.
    pub fn custom(
        dim: usize,
        alpha: f64,
        beta: f64,
        value: Arc<ValueFn>,
        grad: Arc<GradFn>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if !(0.0 <= alpha && alpha <= beta) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= alpha <= beta < inf, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self {
            dim,
            alpha,
            beta,
            kind: Kind::Custom {
                value,
                grad,
                label: label.into(),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Strong convexity constant (0 when merely convex).
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Smoothness constant.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// sigma^2 if this is exactly the quadratic |x - m|^2 / (2 sigma^2).
    pub fn quadratic_sigma2(&self) -> Option<f64> {
        match &self.kind {
            Kind::Quadratic { sigma2, .. } => Some(*sigma2),
            Kind::Custom { .. } => None,
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { sigma2, center } => {
                let mut s2 = 0.0;
                for (xi, ci) in x.iter().zip(center) {
                    s2 += (xi - ci) * (xi - ci);
                }
                0.5 * s2 / sigma2
            }
            Kind::Custom { value, .. } => value(x),
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(out.len(), self.dim);
        match &self.kind {
            Kind::Quadratic { sigma2, center } => {
                for ((g, xi), ci) in out.iter_mut().zip(x).zip(center) {
                    *g = (xi - ci) / sigma2;
                }
            }
            Kind::Custom { grad, .. } => grad(x, out),
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.gradient_into(x, &mut out);
        out
    }

    /// Max abs deviation between the analytic gradient and a central finite
    /// difference of `value` at x. Diagnostic for custom potentials.
    pub fn check_gradient(&self, x: &[f64], eps: f64) -> f64 {
        let g = self.gradient(x);
        let mut xp = x.to_vec();
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            let xi = x[i];
            xp[i] = xi + eps;
            let up = self.value(&xp);
            xp[i] = xi - eps;
            let dn = self.value(&xp);
            xp[i] = xi;
            worst = worst.max((g[i] - (up - dn) / (2.0 * eps)).abs());
        }
        worst
    }
}

/// ln cosh(x) without overflow: |x| + ln(1 + e^{-2|x|}) - ln 2.
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}
