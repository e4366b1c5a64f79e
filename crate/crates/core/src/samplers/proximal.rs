//! The Proximal Sampler.
//!
//! One iteration with step size h targets pi \propto exp(-V) via two exact
//! conditional draws:
//!
//!   forward:   y = x + sqrt(h) xi                    (heat step)
//!   backward:  x' ~ density  \propto exp(-V(x') - |x' - y|^2 / (2h))
//!
//! The backward draw is the "restricted Gaussian oracle" (RGO). For a
//! Gaussian target the RGO is again Gaussian and can be sampled exactly;
//! for a general smooth convex V it is implemented by rejection from a
//! Gaussian envelope centered at the proximal point of V at y, which is
//! exact because f(x) = V(x) + |x-y|^2/(2h) dominates its quadratic model
//! at the minimizer.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{IsotropicGaussian, Potential};
use crate::samplers::{OracleStats, ParticleEnsemble, RngStream};
use crate::tol;

/// Default gradient-step cap for the proximal point solve.
const PROX_MAX_ITERS: u32 = 10_000;

/// What the sampler is targeting.
#[derive(Debug, Clone)]
pub enum ProxTarget {
    Gaussian(IsotropicGaussian),
    General(Potential),
}

impl ProxTarget {
    pub fn dim(&self) -> usize {
        match self {
            ProxTarget::Gaussian(g) => g.dim(),
            ProxTarget::General(p) => p.dim(),
        }
    }

    /// The target's potential. For a Gaussian N(m, s^2 I) this is the
    /// quadratic |x - m|^2 / (2 s^2).
    pub fn potential(&self) -> Result<Potential> {
        match self {
            ProxTarget::Gaussian(g) => {
                Potential::quadratic_centered(g.mean().to_vec(), g.variance())
            }
            ProxTarget::General(p) => Ok(p.clone()),
        }
    }
}

/// Which backward-step oracle to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RgoOracle {
    /// Exact conditional Gaussian; requires a Gaussian target.
    ExactGaussian,
    /// Rejection from the proximal Gaussian envelope; requires a convex
    /// potential with finite smoothness.
    Rejection,
}

#[derive(Debug, Clone)]
pub struct ProxSamplerConfig {
    pub h: f64,
    pub target: ProxTarget,
    pub oracle: RgoOracle,
    /// Rejection rounds before giving up (an accept probability this low
    /// signals a badly mismatched h, not bad luck).
    pub max_rejection_rounds: u32,
    pub prox_tol: f64,
    pub prox_max_iters: u32,
}

impl ProxSamplerConfig {
    pub fn exact_gaussian(target: IsotropicGaussian, h: f64) -> Result<Self> {
        let cfg = Self {
            h,
            target: ProxTarget::Gaussian(target),
            oracle: RgoOracle::ExactGaussian,
            max_rejection_rounds: 100_000,
            prox_tol: tol::PROX_GRAD,
            prox_max_iters: PROX_MAX_ITERS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn rejection(target: ProxTarget, h: f64) -> Result<Self> {
        let cfg = Self {
            h,
            target,
            oracle: RgoOracle::Rejection,
            max_rejection_rounds: 100_000,
            prox_tol: tol::PROX_GRAD,
            prox_max_iters: PROX_MAX_ITERS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size h must be positive and finite, got {}",
                self.h
            )));
        }
        match (&self.oracle, &self.target) {
            (RgoOracle::ExactGaussian, ProxTarget::General(_)) => Err(Error::Unsupported(
                "exact-gaussian oracle needs a Gaussian target".into(),
            )),
            (_, ProxTarget::Gaussian(g)) if g.is_dirac() => Err(Error::InvalidParameter(
                "cannot sample towards a Dirac target (variance 0)".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Result of a proximal point solve.
#[derive(Debug, Clone)]
pub struct ProxPoint {
    pub xstar: Vec<f64>,
    pub grad_norm: f64,
    pub iters: u32,
}

/// Minimize f(x) = V(x) + |x - y|^2 / (2h) by gradient descent with the
/// fixed step 1/(beta + 1/h).
///
/// f is (alpha + 1/h)-strongly convex and (beta + 1/h)-smooth, so the
/// gradient norm contracts geometrically; for a quadratic V the step is the
/// exact inverse Hessian and one iteration lands on the minimizer.
pub fn prox_point(y: &[f64], pot: &Potential, h: f64, tol: f64) -> Result<ProxPoint> {
    prox_point_capped(y, pot, h, tol, PROX_MAX_ITERS)
}

fn prox_point_capped(
    y: &[f64],
    pot: &Potential,
    h: f64,
    tol: f64,
    max_iters: u32,
) -> Result<ProxPoint> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if y.len() != pot.dim() {
        return Err(Error::DimensionMismatch {
            left: y.len(),
            right: pot.dim(),
        });
    }
    let step = 1.0 / (pot.beta() + 1.0 / h);
    let mut x = y.to_vec();
    let mut grad = vec![0.0; y.len()];
    let mut iters = 0;
    loop {
        pot.gradient_into(&x, &mut grad);
        let mut norm2 = 0.0;
        for ((g, &xi), &yi) in grad.iter_mut().zip(&x).zip(y) {
            *g += (xi - yi) / h;
            norm2 += *g * *g;
        }
        let grad_norm = norm2.sqrt();
        if grad_norm <= tol {
            return Ok(ProxPoint {
                xstar: x,
                grad_norm,
                iters,
            });
        }
        if iters >= max_iters {
            return Err(Error::ProxNoConvergence {
                tol,
                iters,
                grad_norm,
            });
        }
        for (xi, g) in x.iter_mut().zip(&grad) {
            *xi -= step * g;
        }
        iters += 1;
    }
}

/// One backward (RGO) draw given the forward point `y`.
///
/// Exact-Gaussian path: with target N(m, s^2 I) and c = s^2/(s^2 + h), the
/// conditional law is N(c y + (1-c) m, c h I); each draw counts as one
/// accepted proposal. Rejection path: propose x ~ N(x*, h I) at the
/// proximal point x* and accept with probability
/// exp(f(x*) + |x - x*|^2/(2h) - f(x)) <= 1.
pub fn rgo_sample(
    y: &[f64],
    cfg: &ProxSamplerConfig,
    rng: &mut RngStream,
    stats: &mut OracleStats,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let kernel = RgoKernel::build(cfg)?;
    let mut out = vec![0.0; y.len()];
    kernel.sample_into(y, &mut out, rng, stats)?;
    Ok(out)
}

/// Precomputed backward-step sampler, built once per run.
enum RgoKernel {
    Exact {
        mean: Vec<f64>,
        c: f64,
        cond_sd: f64,
    },
    Reject {
        pot: Potential,
        h: f64,
        prox_tol: f64,
        prox_max_iters: u32,
        max_rounds: u32,
    },
}

impl RgoKernel {
    fn build(cfg: &ProxSamplerConfig) -> Result<Self> {
        match cfg.oracle {
            RgoOracle::ExactGaussian => {
                let g = match &cfg.target {
                    ProxTarget::Gaussian(g) => g,
                    ProxTarget::General(_) => {
                        return Err(Error::Unsupported(
                            "exact-gaussian oracle needs a Gaussian target".into(),
                        ))
                    }
                };
                let c = g.variance() / (g.variance() + cfg.h);
                Ok(RgoKernel::Exact {
                    mean: g.mean().to_vec(),
                    c,
                    cond_sd: (c * cfg.h).sqrt(),
                })
            }
            RgoOracle::Rejection => Ok(RgoKernel::Reject {
                pot: cfg.target.potential()?,
                h: cfg.h,
                prox_tol: cfg.prox_tol,
                prox_max_iters: cfg.prox_max_iters,
                max_rounds: cfg.max_rejection_rounds,
            }),
        }
    }

    fn sample_into(
        &self,
        y: &[f64],
        out: &mut [f64],
        rng: &mut RngStream,
        stats: &mut OracleStats,
    ) -> Result<()> {
        match self {
            RgoKernel::Exact { mean, c, cond_sd } => {
                stats.proposals += 1;
                stats.acceptances += 1;
                for ((o, &yi), &mi) in out.iter_mut().zip(y).zip(mean) {
                    *o = c * yi + (1.0 - c) * mi + cond_sd * rng.next_normal();
                }
                Ok(())
            }
            RgoKernel::Reject {
                pot,
                h,
                prox_tol,
                prox_max_iters,
                max_rounds,
            } => {
                let prox = prox_point_capped(y, pot, *h, *prox_tol, *prox_max_iters)?;
                stats.inner_solver_iterations += prox.iters as u64;
                let fstar = pot.value(&prox.xstar) + 0.5 * dist2(&prox.xstar, y) / h;
                let sh = h.sqrt();
                for _ in 0..*max_rounds {
                    stats.proposals += 1;
                    for (o, &xs) in out.iter_mut().zip(&prox.xstar) {
                        *o = xs + sh * rng.next_normal();
                    }
                    let fx = pot.value(out) + 0.5 * dist2(out, y) / h;
                    // <= 0 in exact arithmetic; inexact x* can push it
                    // epsilon-positive, so clamp
                    let log_acc = (fstar + 0.5 * dist2(out, &prox.xstar) / h - fx).min(0.0);
                    if rng.next_uniform().ln() <= log_acc {
                        stats.acceptances += 1;
                        return Ok(());
                    }
                }
                Err(Error::RejectionRoundsExceeded {
                    rounds: *max_rounds,
                })
            }
        }
    }
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Run `k_steps` full proximal iterations on every chain of `ens`.
///
/// Chain i draws only from its own stream, so the trajectory is independent
/// of the thread count. Oracle failures abort the owning chain and surface
/// as [`Error::ChainFailed`] with the chain index and step; stats from all
/// chains (including the failed prefix) are merged in chain order.
pub fn prox_sampler_run(
    mut ens: ParticleEnsemble,
    cfg: &ProxSamplerConfig,
    k_steps: u32,
) -> Result<(ParticleEnsemble, OracleStats)> {
    cfg.validate()?;
    if ens.dim() != cfg.target.dim() {
        return Err(Error::DimensionMismatch {
            left: ens.dim(),
            right: cfg.target.dim(),
        });
    }
    let kernel = RgoKernel::build(cfg)?;
    let sh = cfg.h.sqrt();
    let (dim, data, streams) = ens.parts_mut();
    let per_chain: Vec<(OracleStats, Option<Error>)> = data
        .par_chunks_mut(dim)
        .zip(streams.par_iter_mut())
        .enumerate()
        .map(|(chain, (x, rng))| {
            let mut st = OracleStats::default();
            let mut y = vec![0.0; dim];
            let mut next = vec![0.0; dim];
            for k in 0..k_steps {
                for (yi, &xi) in y.iter_mut().zip(x.iter()) {
                    *yi = xi + sh * rng.next_normal();
                }
                match kernel.sample_into(&y, &mut next, rng, &mut st) {
                    Ok(()) => x.copy_from_slice(&next),
                    Err(e) => {
                        return (
                            st,
                            Some(Error::ChainFailed {
                                chain,
                                step: k,
                                source: Box::new(e),
                            }),
                        )
                    }
                }
            }
            (st, None)
        })
        .collect();

    let mut stats = OracleStats::default();
    let mut first_err = None;
    for (st, err) in per_chain {
        stats.merge(&st);
        if first_err.is_none() {
            first_err = err;
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    ens.note_steps("prox", k_steps as u64);
    Ok((ens, stats))
}

/// Exact law of the Proximal Sampler after k steps when both target
/// N(m, s^2 I) and initialization are isotropic Gaussians: with
/// c = s^2/(s^2 + h),
///
///   mean <- m + c (mean - m),   var <- c^2 (var + h) + s^2 h / (s^2 + h),
///
/// whose fixed point is exactly the target. This recursion is the
/// closed-form oracle against which the simulating sampler is tested.
pub fn prox_gaussian_recursion(
    init: &IsotropicGaussian,
    target: &IsotropicGaussian,
    h: f64,
    k: u32,
) -> Result<IsotropicGaussian> {
    if !(target.variance() > 0.0) {
        return Err(Error::InvalidParameter(
            "recursion target must have positive variance".into(),
        ));
    }
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h must be positive, got {h}")));
    }
    if init.dim() != target.dim() {
        return Err(Error::DimensionMismatch {
            left: init.dim(),
            right: target.dim(),
        });
    }
    let s2 = target.variance();
    let c = s2 / (s2 + h);
    let gauss_part = s2 * h / (s2 + h);
    let mut mean = init.mean().to_vec();
    let mut v = init.variance();
    for _ in 0..k {
        for (m, &t) in mean.iter_mut().zip(target.mean()) {
            *m = t + c * (*m - t);
        }
        v = c * c * (v + h) + gauss_part;
    }
    IsotropicGaussian::new(mean, v)
}
