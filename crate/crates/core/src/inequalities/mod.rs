//! Numerical checks of the transport, regularization, contraction, and
//! mixing bounds, one function per inequality.
//!
//! Every check produces an [`InequalityReport`]: both sides as numbers,
//! the provenance of each side, the tolerance the verdict used, and the
//! named quantities that went into the bound. A report with an infinite
//! right-hand side holds vacuously and says so; a violation is a report,
//! not a panic, so sweeps can collect and rank failures.
//!
//! Tolerance policy: closed-form and quadrature sides compare at
//! [`tol::REPORT_CLOSED`]; Monte Carlo quantities enter through a
//! conservative upper confidence value (`upper(MC_STDERR_FACTOR)`) rather
//! than through a widened tolerance, so `holds` keeps one meaning.

pub mod suites;

use crate::error::{Error, Result};
use crate::experiments::{measure_tmix, mixing_window, MixingProfile};
use crate::measures::{
    gaussian_chi2, gaussian_kl, gaussian_tv, gaussian_w2, grid_divergences, grid_w2,
    poincare_grid_1d, poincare_of_gaussian, GridMeasure1D, IsotropicGaussian, PoincareMethod,
};
use crate::metrics::{DivergenceEstimate, EstimateMethod};
use crate::samplers::{ou_flow, prox_gaussian_recursion};
use crate::tol;

/// How a number was obtained, ordered from most to least exact. The join
/// of two provenances (the provenance of any combination) is the max.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    ClosedForm,
    Quadrature,
    Grid,
    Eigensolve,
    Recursion,
    Profile,
    MonteCarlo,
}

impl Provenance {
    pub fn join(self, other: Provenance) -> Provenance {
        self.max(other)
    }

    pub fn label(self) -> &'static str {
        match self {
            Provenance::ClosedForm => "closed-form",
            Provenance::Quadrature => "quadrature",
            Provenance::Grid => "grid",
            Provenance::Eigensolve => "eigensolve",
            Provenance::Recursion => "recursion",
            Provenance::Profile => "profile",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

pub fn estimate_provenance(est: &DivergenceEstimate) -> Provenance {
    match est.method {
        EstimateMethod::ClosedForm => Provenance::ClosedForm,
        EstimateMethod::Quadrature => Provenance::Quadrature,
        EstimateMethod::Grid => Provenance::Grid,
        EstimateMethod::McExactDensity | EstimateMethod::Histogram => Provenance::MonteCarlo,
    }
}

fn poincare_provenance(method: PoincareMethod) -> Provenance {
    match method {
        PoincareMethod::AnalyticGaussian | PoincareMethod::DiracPoint => Provenance::ClosedForm,
        PoincareMethod::GridEigensolve => Provenance::Eigensolve,
    }
}

/// One checked instance of one inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs - lhs; infinite for vacuous instances.
    pub slack: f64,
    /// lhs <= rhs + tol. A NaN on either side counts as a violation.
    pub holds: bool,
    /// The bound said nothing (rhs = +inf); holds, but trivially.
    pub vacuous: bool,
    pub tol: f64,
    pub lhs_method: Provenance,
    pub rhs_method: Provenance,
    /// Named scalars that entered the bound, for logs and CSV rows.
    pub context: Vec<(&'static str, f64)>,
}

impl InequalityReport {
    fn build(
        name: &'static str,
        lhs: f64,
        rhs: f64,
        tol: f64,
        lhs_method: Provenance,
        rhs_method: Provenance,
        context: Vec<(&'static str, f64)>,
    ) -> Self {
        Self {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            holds: lhs <= rhs + tol,
            vacuous: rhs == f64::INFINITY,
            tol,
            lhs_method,
            rhs_method,
            context,
        }
    }

    /// Rescale the right-hand side and recompute the verdict. The identity
    /// scale is a no-op; anything else exists to let pipeline tests force
    /// a violation and watch it propagate.
    pub fn with_rhs_scale(mut self, scale: f64) -> Self {
        if scale != 1.0 {
            self.rhs *= scale;
            self.slack = self.rhs - self.lhs;
            self.holds = self.lhs <= self.rhs + self.tol;
            self.vacuous = self.rhs == f64::INFINITY;
        }
        self
    }
}

/// 1 + C_P / h: the step-normalized Poincare constant that plays the role
/// of C_P in all discrete-time bounds. Constructed, never passed raw, so
/// a plain C_P cannot slip into a step-count formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HatCp {
    value: f64,
}

impl HatCp {
    pub fn new(cp: f64, h: f64) -> Result<Self> {
        if !(cp > 0.0) || !cp.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "C_P must be positive and finite, got {cp}"
            )));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step size h must be positive and finite, got {h}"
            )));
        }
        Ok(Self { value: 1.0 + cp / h })
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// W_2^2(mu, nu) <= 4 (C_P(mu) + C_P(nu)) TV / (1 - TV) on isotropic
/// Gaussians. When TV is itself Monte Carlo the bound is evaluated at the
/// upper confidence value of TV (the rhs is increasing in TV), clamped to
/// 1; at TV >= 1 the rhs is +inf and the instance is vacuous.
pub fn check_wtv_gaussian(
    mu: &IsotropicGaussian,
    nu: &IsotropicGaussian,
) -> Result<InequalityReport> {
    let lhs = gaussian_w2(mu, nu)?;
    let tv = gaussian_tv(mu, nu)?;
    let cp_mu = poincare_of_gaussian(mu).value;
    let cp_nu = poincare_of_gaussian(nu).value;
    let tv_up = tv.upper(tol::MC_STDERR_FACTOR).min(1.0);
    let rhs = if tv_up >= 1.0 {
        f64::INFINITY
    } else {
        4.0 * (cp_mu + cp_nu) * tv_up / (1.0 - tv_up)
    };
    Ok(InequalityReport::build(
        "wtv-gaussian",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::ClosedForm,
        Provenance::ClosedForm.join(estimate_provenance(&tv)),
        vec![
            ("tv", tv.value),
            ("tv_upper", tv_up),
            ("cp_mu", cp_mu),
            ("cp_nu", cp_nu),
            ("dim", mu.dim() as f64),
        ],
    ))
}

/// The same W-TV transport bound on 1-D grid measures. All four
/// quantities (W_2, TV, both Poincare constants) refer to the same
/// piecewise-constant laws, so the check is self-consistent; the only
/// inexact ingredient is the Poincare eigensolve, whose value error is
/// quadratically small in its reported residual.
pub fn check_wtv_grid(p: &GridMeasure1D, q: &GridMeasure1D) -> Result<InequalityReport> {
    let div = grid_divergences(p, q)?;
    let lhs = grid_w2(p, q);
    let cp_p = poincare_grid_1d(p)?;
    let cp_q = poincare_grid_1d(q)?;
    let rhs = if div.tv >= 1.0 {
        f64::INFINITY
    } else {
        4.0 * (cp_p.value + cp_q.value) * div.tv / (1.0 - div.tv)
    };
    let rhs_method = poincare_provenance(cp_p.method).join(poincare_provenance(cp_q.method));
    Ok(InequalityReport::build(
        "wtv-grid",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Grid,
        Provenance::Grid.join(rhs_method),
        vec![
            ("tv", div.tv),
            ("cp_p", cp_p.value),
            ("cp_q", cp_q.value),
            ("residual_p", cp_p.residual),
            ("residual_q", cp_q.residual),
        ],
    ))
}

/// W_2^2(mu, nu) <= 2 C_P(mu) chi^2(nu || mu) on isotropic Gaussians.
/// Infinite chi^2 (variance ratio >= 2, or a Dirac) makes the instance
/// vacuous.
pub fn check_transport_variance(
    mu: &IsotropicGaussian,
    nu: &IsotropicGaussian,
) -> Result<InequalityReport> {
    let lhs = gaussian_w2(mu, nu)?;
    let cp_mu = poincare_of_gaussian(mu).value;
    let chi2 = gaussian_chi2(nu, mu)?;
    let rhs = 2.0 * cp_mu * chi2.as_f64();
    Ok(InequalityReport::build(
        "transport-variance",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::ClosedForm,
        Provenance::ClosedForm,
        vec![
            ("chi2", chi2.as_f64()),
            ("cp_mu", cp_mu),
            ("dim", mu.dim() as f64),
        ],
    ))
}

/// The midpoint measure lambda ∝ p ∧ q with both density ratios, from the
/// proof of the W-TV bound: d(lambda)/d(p) and d(lambda)/d(q) are each
/// bounded by 1/(1 - TV).
#[derive(Debug, Clone)]
pub struct Interpolation {
    pub lambda: GridMeasure1D,
    /// max over cells of lambda_i / p_i (cells where lambda lives).
    pub ratio_p: f64,
    pub ratio_q: f64,
    /// 1 / (1 - TV(p, q)).
    pub bound: f64,
}

pub fn build_interpolation(p: &GridMeasure1D, q: &GridMeasure1D) -> Result<Interpolation> {
    let div = grid_divergences(p, q)?;
    if div.tv >= 1.0 {
        return Err(Error::DisjointSupports);
    }
    let weights: Vec<f64> = p
        .mass()
        .iter()
        .zip(q.mass())
        .map(|(a, b)| a.min(*b))
        .collect();
    let lambda = GridMeasure1D::from_unnormalized(p.edges().to_vec(), weights)?;
    let ratio_against = |m: &GridMeasure1D| {
        lambda
            .mass()
            .iter()
            .zip(m.mass())
            .filter(|(l, _)| **l > 0.0)
            .map(|(l, mm)| l / mm)
            .fold(0.0_f64, f64::max)
    };
    Ok(Interpolation {
        ratio_p: ratio_against(p),
        ratio_q: ratio_against(q),
        bound: 1.0 / (1.0 - div.tv),
        lambda,
    })
}

/// Reports max(ratio_p, ratio_q) <= 1/(1 - TV) for one grid pair. The
/// ratio bound is an algebraic identity of the min construction, so the
/// tolerance is float-exactness, not a report tolerance.
pub fn check_interpolation_ratio(
    p: &GridMeasure1D,
    q: &GridMeasure1D,
) -> Result<InequalityReport> {
    let interp = build_interpolation(p, q)?;
    Ok(InequalityReport::build(
        "interpolation-ratio",
        interp.ratio_p.max(interp.ratio_q),
        interp.bound,
        tol::EXACT,
        Provenance::Grid,
        Provenance::Grid,
        vec![
            ("ratio_p", interp.ratio_p),
            ("ratio_q", interp.ratio_q),
            ("lambda_mean", interp.lambda.mean()),
        ],
    ))
}

/// KL(mu_t || pi) <= W_2^2(mu_0, pi) / (4t) along the exact OU flow
/// towards pi = N(0, sigma2 I), one report per positive time.
pub fn check_parabolic_reg_ld(
    init: &IsotropicGaussian,
    sigma2: f64,
    t_grid: &[f64],
) -> Result<Vec<InequalityReport>> {
    let pi = IsotropicGaussian::centered(init.dim(), sigma2)?;
    let w2_0 = gaussian_w2(init, &pi)?;
    t_grid
        .iter()
        .map(|&t| {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "regularization needs t > 0, got {t}"
                )));
            }
            let mu_t = ou_flow(init, sigma2, t)?;
            let lhs = gaussian_kl(&mu_t, &pi)?.as_f64();
            let rhs = w2_0 / (4.0 * t);
            Ok(InequalityReport::build(
                "parabolic-reg-ld",
                lhs,
                rhs,
                tol::REPORT_CLOSED,
                Provenance::ClosedForm,
                Provenance::ClosedForm,
                vec![("t", t), ("w2_0", w2_0), ("dim", init.dim() as f64)],
            ))
        })
        .collect()
}

/// Discrete analogue along the exact prox recursion:
/// KL(mu_k || pi) <= W_2^2(mu_0, pi) / (k h), one report per k >= 1.
pub fn check_parabolic_reg_prox(
    init: &IsotropicGaussian,
    sigma2: f64,
    h: f64,
    k_grid: &[u32],
) -> Result<Vec<InequalityReport>> {
    let pi = IsotropicGaussian::centered(init.dim(), sigma2)?;
    let w2_0 = gaussian_w2(init, &pi)?;
    k_grid
        .iter()
        .map(|&k| {
            if k == 0 {
                return Err(Error::InvalidParameter(
                    "regularization needs k >= 1".into(),
                ));
            }
            let mu_k = prox_gaussian_recursion(init, &pi, h, k)?;
            let lhs = gaussian_kl(&mu_k, &pi)?.as_f64();
            let rhs = w2_0 / (k as f64 * h);
            Ok(InequalityReport::build(
                "parabolic-reg-prox",
                lhs,
                rhs,
                tol::REPORT_CLOSED,
                Provenance::Recursion,
                Provenance::ClosedForm,
                vec![
                    ("k", k as f64),
                    ("h", h),
                    ("w2_0", w2_0),
                    ("dim", init.dim() as f64),
                ],
            ))
        })
        .collect()
}

/// Both forms of the chi-squared decay bound at one step count.
#[derive(Debug, Clone)]
pub struct Chi2Contraction {
    /// chi^2(mu_k) <= (1 + h/C_P)^{-2k} chi^2(mu_0).
    pub power: InequalityReport,
    /// The weaker closed form chi^2(mu_k) <= exp(-2k / hat-C_P) chi^2(mu_0).
    pub exp: InequalityReport,
}

/// Chi-squared contraction of the prox chain towards pi = N(0, sigma2 I).
/// Infinite initial chi^2 makes both instances vacuous.
pub fn check_chi2_contraction_prox(
    init: &IsotropicGaussian,
    sigma2: f64,
    h: f64,
    k: u32,
) -> Result<Chi2Contraction> {
    let pi = IsotropicGaussian::centered(init.dim(), sigma2)?;
    let mu_k = prox_gaussian_recursion(init, &pi, h, k)?;
    let lhs = gaussian_chi2(&mu_k, &pi)?.as_f64();
    let chi0 = gaussian_chi2(init, &pi)?.as_f64();
    let hat = HatCp::new(sigma2, h)?;
    let kf = k as f64;
    let rhs_power = (1.0 + h / sigma2).powf(-2.0 * kf) * chi0;
    let rhs_exp = (-2.0 * kf / hat.value()).exp() * chi0;
    let context = vec![
        ("k", kf),
        ("h", h),
        ("chi2_0", chi0),
        ("hat_cp", hat.value()),
        ("dim", init.dim() as f64),
    ];
    Ok(Chi2Contraction {
        power: InequalityReport::build(
            "chi2-contraction-power",
            lhs,
            rhs_power,
            tol::REPORT_CLOSED,
            Provenance::Recursion,
            Provenance::ClosedForm,
            context.clone(),
        ),
        exp: InequalityReport::build(
            "chi2-contraction-exp",
            lhs,
            rhs_exp,
            tol::REPORT_CLOSED,
            Provenance::Recursion,
            Provenance::ClosedForm,
            context,
        ),
    })
}

/// The power-form rhs never exceeds the exp-form rhs (the elementary
/// bound e^{1/u} <= u/(u-1) at u = hat-C_P). Checked as its own report so
/// the ordering of the two published forms is itself under test.
pub fn check_chi2_form_order(
    init: &IsotropicGaussian,
    sigma2: f64,
    h: f64,
    k: u32,
) -> Result<InequalityReport> {
    let c = check_chi2_contraction_prox(init, sigma2, h, k)?;
    Ok(InequalityReport::build(
        "chi2-form-order",
        c.power.rhs,
        c.exp.rhs,
        tol::EXACT,
        Provenance::ClosedForm,
        Provenance::ClosedForm,
        vec![("k", k as f64), ("h", h)],
    ))
}

/// Local Poincare propagation along the OU flow:
/// C_P(mu_t) <= C_P(mu_0) + 2t, exact at t = 0.
pub fn check_lpi_langevin(
    init: &IsotropicGaussian,
    sigma2: f64,
    t: f64,
) -> Result<InequalityReport> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be >= 0, got {t}"
        )));
    }
    let mu_t = ou_flow(init, sigma2, t)?;
    let lhs = poincare_of_gaussian(&mu_t).value;
    let cp_0 = poincare_of_gaussian(init).value;
    Ok(InequalityReport::build(
        "lpi-ld",
        lhs,
        cp_0 + 2.0 * t,
        tol::REPORT_CLOSED,
        Provenance::ClosedForm,
        Provenance::ClosedForm,
        vec![("t", t), ("cp_0", cp_0), ("dim", init.dim() as f64)],
    ))
}

/// Discrete local Poincare propagation: C_P(mu_k) <= C_P(mu_0) + 2kh.
pub fn check_lpi_prox(
    init: &IsotropicGaussian,
    sigma2: f64,
    h: f64,
    k: u32,
) -> Result<InequalityReport> {
    let pi = IsotropicGaussian::centered(init.dim(), sigma2)?;
    let mu_k = prox_gaussian_recursion(init, &pi, h, k)?;
    let lhs = poincare_of_gaussian(&mu_k).value;
    let cp_0 = poincare_of_gaussian(init).value;
    Ok(InequalityReport::build(
        "lpi-prox",
        lhs,
        cp_0 + 2.0 * k as f64 * h,
        tol::REPORT_CLOSED,
        Provenance::Recursion,
        Provenance::ClosedForm,
        vec![
            ("k", k as f64),
            ("h", h),
            ("cp_0", cp_0),
            ("dim", init.dim() as f64),
        ],
    ))
}

/// t_mix(eps) <= C_P(pi) (1 + KL(mu_0 || pi)) / eps, with the left side
/// measured off a profile. An infinite KL makes the bound vacuous.
pub fn check_mixing_bound_ld(
    profile: &MixingProfile,
    cp_pi: f64,
    kl0: f64,
    eps: f64,
) -> Result<InequalityReport> {
    if !(cp_pi > 0.0) || !cp_pi.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "C_P(pi) must be positive and finite, got {cp_pi}"
        )));
    }
    if !(kl0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "KL(mu_0 || pi) must be >= 0, got {kl0}"
        )));
    }
    let lhs = measure_tmix(profile, eps)?;
    let rhs = cp_pi * (1.0 + kl0) / eps;
    Ok(InequalityReport::build(
        "mixing-ld",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::ClosedForm,
        vec![("eps", eps), ("cp_pi", cp_pi), ("kl0", kl0)],
    ))
}

/// t_mix(eps) <= W_2^2(mu_0, pi) / (8 eps^2), the Wasserstein form.
pub fn check_mixing_bound_ld_w2(
    profile: &MixingProfile,
    w2_0: f64,
    eps: f64,
) -> Result<InequalityReport> {
    if !(w2_0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "W_2^2 must be >= 0, got {w2_0}"
        )));
    }
    let lhs = measure_tmix(profile, eps)?;
    let rhs = w2_0 / (8.0 * eps * eps);
    Ok(InequalityReport::build(
        "mixing-ld-w2",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::ClosedForm,
        vec![("eps", eps), ("w2_0", w2_0)],
    ))
}

/// k_mix(eps) <= ceil(hat-C_P (1 + KL(mu_0 || pi)) / eps) for the prox
/// chain; the profile must be step-indexed.
pub fn check_mixing_bound_prox(
    profile: &MixingProfile,
    hat_cp: &HatCp,
    kl0: f64,
    eps: f64,
) -> Result<InequalityReport> {
    if !profile.is_discrete() {
        return Err(Error::InvalidParameter(
            "prox mixing bound needs a step-indexed profile".into(),
        ));
    }
    if !(kl0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "KL(mu_0 || pi) must be >= 0, got {kl0}"
        )));
    }
    let lhs = measure_tmix(profile, eps)?;
    let rhs = (hat_cp.value() * (1.0 + kl0) / eps).ceil();
    Ok(InequalityReport::build(
        "mixing-prox",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::ClosedForm,
        vec![("eps", eps), ("hat_cp", hat_cp.value()), ("kl0", kl0)],
    ))
}

/// k_mix(eps) <= ceil(W_2^2(mu_0, pi) / (2 h eps^2)) for the prox chain.
pub fn check_mixing_bound_prox_w2(
    profile: &MixingProfile,
    w2_0: f64,
    h: f64,
    eps: f64,
) -> Result<InequalityReport> {
    if !profile.is_discrete() {
        return Err(Error::InvalidParameter(
            "prox mixing bound needs a step-indexed profile".into(),
        ));
    }
    if !(w2_0 >= 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need W_2^2 >= 0 and h > 0, got {w2_0}, {h}"
        )));
    }
    let lhs = measure_tmix(profile, eps)?;
    let rhs = (w2_0 / (2.0 * h * eps * eps)).ceil();
    Ok(InequalityReport::build(
        "mixing-prox-w2",
        lhs,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::ClosedForm,
        vec![("eps", eps), ("w2_0", w2_0), ("h", h)],
    ))
}

/// Mixing-window bound for the continuous flow:
/// t_mix(eps) - t_mix(1-eps)
///   <= (3/eps) (C_P + sqrt(C_P C_P(mu_0)) + sqrt(C_P t_mix(1-eps))).
pub fn check_window_bound_ld(
    profile: &MixingProfile,
    cp_pi: f64,
    cp_mu0: f64,
    eps: f64,
) -> Result<InequalityReport> {
    if !(cp_pi > 0.0) || !cp_pi.is_finite() || !(cp_mu0 >= 0.0) || !cp_mu0.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need C_P(pi) > 0 and C_P(mu_0) >= 0, got {cp_pi}, {cp_mu0}"
        )));
    }
    let w = mixing_window(profile, eps)?;
    let rhs = (3.0 / eps)
        * (cp_pi + (cp_pi * cp_mu0).sqrt() + (cp_pi * w.t_mix_comp).sqrt());
    Ok(InequalityReport::build(
        "window-ld",
        w.width,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::Profile,
        vec![
            ("eps", eps),
            ("t_mix_eps", w.t_mix_eps),
            ("t_mix_comp", w.t_mix_comp),
            ("cp_pi", cp_pi),
            ("cp_mu0", cp_mu0),
            ("tied", w.tied as u8 as f64),
        ],
    ))
}

/// Discrete mixing-window bound through the hat constants:
/// k_mix(eps) - k_mix(1-eps)
///   <= (6/eps) (hat-C_P + sqrt(hat-C_P hat-C_P(mu_0))
///               + sqrt(hat-C_P k_mix(1-eps))).
pub fn check_window_bound_prox(
    profile: &MixingProfile,
    hat_pi: &HatCp,
    hat_mu0: &HatCp,
    eps: f64,
) -> Result<InequalityReport> {
    if !profile.is_discrete() {
        return Err(Error::InvalidParameter(
            "prox window bound needs a step-indexed profile".into(),
        ));
    }
    let w = mixing_window(profile, eps)?;
    let (a, b) = (hat_pi.value(), hat_mu0.value());
    let rhs = (6.0 / eps) * (a + (a * b).sqrt() + (a * w.t_mix_comp).sqrt());
    Ok(InequalityReport::build(
        "window-prox",
        w.width,
        rhs,
        tol::REPORT_CLOSED,
        Provenance::Profile,
        Provenance::Profile,
        vec![
            ("eps", eps),
            ("t_mix_eps", w.t_mix_eps),
            ("t_mix_comp", w.t_mix_comp),
            ("hat_cp_pi", a),
            ("hat_cp_mu0", b),
            ("tied", w.tied as u8 as f64),
        ],
    ))
}

/// t_mix(1-eps) / t_mix(eps) in [0, 1]: the cutoff diagnostic. A family
/// exhibits cutoff along a parameter when the ratio tends to 1.
pub fn cutoff_ratio(profile: &MixingProfile, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "cutoff ratio needs eps in (0, 1/2), got {eps}"
        )));
    }
    let t_hi = measure_tmix(profile, eps)?;
    let t_lo = measure_tmix(profile, 1.0 - eps)?;
    if !(t_hi > 0.0) {
        return Err(Error::InvalidParameter(
            "cutoff ratio undefined: t_mix(eps) = 0".into(),
        ));
    }
    Ok(t_lo / t_hi)
}

/// The product criterion t_mix / (a + sqrt(a b)) with a = C_P(pi) and
/// b = C_P(mu_0), hat-normalized (a = 1 + C_P/h) when `discrete`. The
/// window bound says the window is o(t_mix) precisely when this diverges
/// along the family.
pub fn product_condition(
    t_mix_eps: f64,
    cp_pi: f64,
    cp_mu0: f64,
    discrete: bool,
    h: f64,
) -> Result<f64> {
    if !(t_mix_eps >= 0.0) || !t_mix_eps.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_mix must be finite and >= 0, got {t_mix_eps}"
        )));
    }
    if !(cp_pi > 0.0) || !(cp_mu0 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need C_P(pi) > 0 and C_P(mu_0) >= 0, got {cp_pi}, {cp_mu0}"
        )));
    }
    let (a, b) = if discrete {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "discrete product condition needs h > 0, got {h}"
            )));
        }
        (1.0 + cp_pi / h, 1.0 + cp_mu0 / h)
    } else {
        (cp_pi, cp_mu0)
    };
    let denom = a + (a * b).sqrt();
    Ok(t_mix_eps / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{
        geometric_time_grid, profile_closed_form_meanshift, profile_prox_recursion,
    };

    // TV(N(0,1), N(1,1)) = 2 Phi(1/2) - 1 and the W-TV rhs 8 TV/(1 - TV),
    // both frozen at 40 digits
    const TV_UNIT_SHIFT: f64 = 0.38292492254802620728;
    const WTV_RHS_UNIT: f64 = 4.96438681826787977599;
    // 2 (e - 1)
    const TWO_EM1: f64 = 3.43656365691809047072;
    // KL(N(2/e, 1), N(0,1)) = 2 e^{-2}
    const KL_LD_T1: f64 = 0.27067056647322538379;
    // KL of the OU flow of a Dirac at 2 towards N(0,1), t = 0.1
    const KL_LD_DIRAC_T01: f64 = 2.08198203010223274505;
    // chi2 fixtures at sigma2 = h = 1, init N(1,1), k = 1
    const EXP_QUARTER_M1: f64 = 0.28402541668774148407; // e^{1/4} - 1
    const QUARTER_EM1: f64 = 0.42957045711476130884; // (e - 1)/4
    const ONE_MINUS_EINV: f64 = 0.63212055882855767840; // 1 - 1/e
    // OU variance of N(2, 4) towards N(0, 1) at t = 1/2
    const VAR_OU_T05: f64 = 2.1036383235143269648;
    // cutoff ratio of the mean-shift family at a = 1, sigma2 = 1, d = 1e6
    const RATIO_D1E6: f64 = 0.82553572941537865046;
    const TMIX_D1E6_E025: f64 = 7.35830343462766242711;

    #[test]
    fn wtv_gaussian_unit_shift_matches_frozen_rhs() {
        let mu = IsotropicGaussian::standard(1);
        let nu = IsotropicGaussian::new(vec![1.0], 1.0).unwrap();
        let r = check_wtv_gaussian(&mu, &nu).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - WTV_RHS_UNIT).abs() < 1e-12, "rhs {}", r.rhs);
        assert!(r.holds && !r.vacuous);
        assert_eq!(r.lhs_method, Provenance::ClosedForm);
        let tv = r.context.iter().find(|(k, _)| *k == "tv").unwrap().1;
        assert!((tv - TV_UNIT_SHIFT).abs() < 1e-15);
    }

    #[test]
    fn wtv_gaussian_vacuous_on_disjoint_diracs() {
        let mu = IsotropicGaussian::dirac(vec![0.0]).unwrap();
        let nu = IsotropicGaussian::dirac(vec![1.0]).unwrap();
        let r = check_wtv_gaussian(&mu, &nu).unwrap();
        assert!(r.vacuous && r.holds);
        assert_eq!(r.rhs, f64::INFINITY);
        assert_eq!(r.lhs, 1.0);
    }

    #[test]
    fn rhs_scale_hook_forces_violation() {
        let mu = IsotropicGaussian::standard(1);
        let nu = IsotropicGaussian::new(vec![1.0], 1.0).unwrap();
        let r = check_wtv_gaussian(&mu, &nu).unwrap().with_rhs_scale(0.01);
        assert!(!r.holds && !r.vacuous);
        assert!(r.slack < 0.0);
    }

    #[test]
    fn transport_variance_unit_shift() {
        let mu = IsotropicGaussian::standard(1);
        let nu = IsotropicGaussian::new(vec![1.0], 1.0).unwrap();
        let r = check_transport_variance(&mu, &nu).unwrap();
        assert_eq!(r.lhs, 1.0);
        assert!((r.rhs - TWO_EM1).abs() < 1e-12, "rhs {}", r.rhs);
        assert!(r.holds && !r.vacuous);
    }

    #[test]
    fn transport_variance_vacuous_at_double_variance() {
        let mu = IsotropicGaussian::standard(2);
        let nu = IsotropicGaussian::centered(2, 2.0).unwrap();
        let r = check_transport_variance(&mu, &nu).unwrap();
        assert!(r.vacuous && r.holds);
    }

    #[test]
    fn wtv_grid_tracks_the_closed_form() {
        // densities evaluated at midpoints stay positive across the whole
        // window, so the eigensolve sees a connected support
        let edges = GridMeasure1D::equispaced_edges(-8.5, 9.5, 720).unwrap();
        let p = GridMeasure1D::from_density(edges.clone(), |x| (-0.5 * x * x).exp()).unwrap();
        let q = GridMeasure1D::from_density(edges, |x| {
            (-0.5 * (x - 1.0) * (x - 1.0)).exp()
        })
        .unwrap();
        let r = check_wtv_grid(&p, &q).unwrap();
        assert!(r.holds, "slack {}", r.slack);
        assert!((r.lhs - 1.0).abs() < 5e-2, "grid W2^2 {}", r.lhs);
        assert!((r.rhs - WTV_RHS_UNIT).abs() < 0.3, "grid rhs {}", r.rhs);
        assert_eq!(r.rhs_method, Provenance::Eigensolve);
    }

    #[test]
    fn interpolation_uniform_overlap_is_exact() {
        let edges = GridMeasure1D::equispaced_edges(0.0, 3.0, 300).unwrap();
        let p = GridMeasure1D::uniform_on(edges.clone(), 0.0, 2.0).unwrap();
        let q = GridMeasure1D::uniform_on(edges, 1.0, 3.0).unwrap();
        let interp = build_interpolation(&p, &q).unwrap();
        assert!((interp.ratio_p - 2.0).abs() < 1e-12, "{}", interp.ratio_p);
        assert!((interp.ratio_q - 2.0).abs() < 1e-12);
        assert!((interp.bound - 2.0).abs() < 1e-12);
        assert!((interp.lambda.mean() - 1.5).abs() < 1e-12);
        let r = check_interpolation_ratio(&p, &q).unwrap();
        assert!(r.holds);
    }

    #[test]
    fn interpolation_rejects_disjoint_supports() {
        let edges = GridMeasure1D::equispaced_edges(0.0, 4.0, 400).unwrap();
        let p = GridMeasure1D::uniform_on(edges.clone(), 0.0, 1.0).unwrap();
        let q = GridMeasure1D::uniform_on(edges, 3.0, 4.0).unwrap();
        assert!(matches!(
            build_interpolation(&p, &q),
            Err(Error::DisjointSupports)
        ));
    }

    #[test]
    fn parabolic_ld_matches_frozen_values() {
        let init = IsotropicGaussian::new(vec![2.0], 1.0).unwrap();
        let r = &check_parabolic_reg_ld(&init, 1.0, &[1.0]).unwrap()[0];
        assert!((r.lhs - KL_LD_T1).abs() < 1e-15, "lhs {}", r.lhs);
        assert_eq!(r.rhs, 1.0);
        assert!(r.holds);

        let dirac = IsotropicGaussian::dirac(vec![2.0]).unwrap();
        let r = &check_parabolic_reg_ld(&dirac, 1.0, &[0.1]).unwrap()[0];
        assert!((r.lhs - KL_LD_DIRAC_T01).abs() < 1e-12, "lhs {}", r.lhs);
        assert_eq!(r.rhs, 12.5);
        assert!(r.holds);

        assert!(check_parabolic_reg_ld(&init, 1.0, &[0.0]).is_err());
    }

    #[test]
    fn parabolic_prox_matches_frozen_values() {
        let init = IsotropicGaussian::new(vec![4.0], 1.0).unwrap();
        let r = &check_parabolic_reg_prox(&init, 1.0, 1.0, &[1]).unwrap()[0];
        assert!((r.lhs - 2.0).abs() < 1e-12, "lhs {}", r.lhs);
        assert_eq!(r.rhs, 16.0);
        assert!(r.holds);
        assert_eq!(r.lhs_method, Provenance::Recursion);
        assert!(check_parabolic_reg_prox(&init, 1.0, 1.0, &[0]).is_err());
    }

    #[test]
    fn chi2_contraction_fixture_and_form_order() {
        let init = IsotropicGaussian::new(vec![1.0], 1.0).unwrap();
        let c = check_chi2_contraction_prox(&init, 1.0, 1.0, 1).unwrap();
        assert!((c.power.lhs - EXP_QUARTER_M1).abs() < 1e-15, "{}", c.power.lhs);
        assert!((c.power.rhs - QUARTER_EM1).abs() < 1e-15, "{}", c.power.rhs);
        assert!((c.exp.rhs - ONE_MINUS_EINV).abs() < 1e-15, "{}", c.exp.rhs);
        assert!(c.power.holds && c.exp.holds);
        let order = check_chi2_form_order(&init, 1.0, 1.0, 1).unwrap();
        assert!(order.holds);
        // k = 0 is lhs = rhs = chi2_0 on the power form
        let c0 = check_chi2_contraction_prox(&init, 1.0, 1.0, 0).unwrap();
        assert_eq!(c0.power.lhs, c0.power.rhs);
        assert!(c0.power.holds);
    }

    #[test]
    fn chi2_contraction_vacuous_when_initial_divergence_infinite() {
        let init = IsotropicGaussian::centered(3, 2.5).unwrap();
        let c = check_chi2_contraction_prox(&init, 1.0, 1.0, 2).unwrap();
        assert!(c.power.vacuous && c.exp.vacuous);
        assert!(c.power.holds && c.exp.holds);
    }

    #[test]
    fn lpi_fixtures() {
        let init = IsotropicGaussian::new(vec![2.0], 4.0).unwrap();
        let r = check_lpi_langevin(&init, 1.0, 0.5).unwrap();
        assert!((r.lhs - VAR_OU_T05).abs() < 1e-15, "lhs {}", r.lhs);
        assert_eq!(r.rhs, 5.0);
        assert!(r.holds);
        // t = 0 is exact equality
        let r0 = check_lpi_langevin(&init, 1.0, 0.0).unwrap();
        assert_eq!(r0.lhs, r0.rhs);
        assert!(r0.holds);
        let rp = check_lpi_prox(&init, 1.0, 0.5, 0).unwrap();
        assert_eq!(rp.lhs, rp.rhs);
        // small-variance init grows towards sigma2 but never beats 2kh
        let small = IsotropicGaussian::new(vec![0.0], 0.1).unwrap();
        let rp = check_lpi_prox(&small, 100.0, 0.01, 1).unwrap();
        assert!(rp.holds, "slack {}", rp.slack);
    }

    #[test]
    fn mixing_and_window_prox_fixture() {
        let init = IsotropicGaussian::new(vec![4.0], 1.0).unwrap();
        let profile = profile_prox_recursion(&init, 1.0, 1.0, 12).unwrap();
        let hat = HatCp::new(1.0, 1.0).unwrap();
        assert_eq!(hat.value(), 2.0);

        // KL(N(4,1) || N(0,1)) = 8, so the bound is ceil(2 * 9 / 0.25) = 72
        let r = check_mixing_bound_prox(&profile, &hat, 8.0, 0.25).unwrap();
        assert_eq!(r.lhs, 3.0);
        assert_eq!(r.rhs, 72.0);
        assert!(r.holds);

        let r = check_mixing_bound_prox_w2(&profile, 16.0, 1.0, 0.25).unwrap();
        assert_eq!(r.lhs, 3.0);
        assert_eq!(r.rhs, 128.0);
        assert!(r.holds);

        let r = check_window_bound_prox(&profile, &hat, &hat, 0.25).unwrap();
        assert_eq!(r.lhs, 2.0); // k_mix(1/4) = 3, k_mix(3/4) = 1
        assert!(r.holds);
    }

    #[test]
    fn mixing_and_window_ld_fixture() {
        let grid = geometric_time_grid(1e-3, 40.0, 96).unwrap();
        let profile = profile_closed_form_meanshift(2.0, 1.0, 1, &grid).unwrap();
        // KL(mu_0 || pi) = a^2 d / 2 = 2, C_P = 1
        let r = check_mixing_bound_ld(&profile, 1.0, 2.0, 0.25).unwrap();
        assert!((r.lhs - 1.14369533620547068447).abs() < 1e-6);
        assert_eq!(r.rhs, 12.0);
        assert!(r.holds);
        let r = check_mixing_bound_ld_w2(&profile, 4.0, 0.25).unwrap();
        assert_eq!(r.rhs, 8.0);
        assert!(r.holds);
        let r = check_window_bound_ld(&profile, 1.0, 1.0, 0.25).unwrap();
        assert!(r.holds, "window {} vs {}", r.lhs, r.rhs);
    }

    #[test]
    fn cutoff_ratio_meanshift_megadim() {
        let grid = geometric_time_grid(1e-2, 30.0, 160).unwrap();
        let profile = profile_closed_form_meanshift(1.0, 1.0, 1_000_000, &grid).unwrap();
        let t_hi = measure_tmix(&profile, 0.25).unwrap();
        assert!((t_hi - TMIX_D1E6_E025).abs() < 1e-6, "t_hi {t_hi}");
        let ratio = cutoff_ratio(&profile, 0.25).unwrap();
        assert!((ratio - RATIO_D1E6).abs() < 1e-8, "ratio {ratio}");
        assert!(cutoff_ratio(&profile, 0.6).is_err());
    }

    #[test]
    fn product_condition_forms() {
        // continuous: denom = 1 + 1
        assert_eq!(product_condition(6.0, 1.0, 1.0, false, f64::NAN).unwrap(), 3.0);
        // discrete with h = 1: hats are 2, denom = 2 + 2
        assert_eq!(product_condition(8.0, 1.0, 1.0, true, 1.0).unwrap(), 2.0);
        assert!(product_condition(8.0, 1.0, 1.0, true, 0.0).is_err());
        assert!(product_condition(f64::INFINITY, 1.0, 1.0, false, 1.0).is_err());
    }

    #[test]
    fn provenance_join_is_the_max() {
        assert_eq!(
            Provenance::ClosedForm.join(Provenance::MonteCarlo),
            Provenance::MonteCarlo
        );
        assert_eq!(
            Provenance::Eigensolve.join(Provenance::Grid),
            Provenance::Eigensolve
        );
        assert_eq!(Provenance::Profile.label(), "profile");
    }
}
