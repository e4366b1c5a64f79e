//! TV mixing profiles: the sampled map t -> TV(mu_t, pi).
//!
//! Profiles come from three places with very different guarantees. A
//! closed-form family is exact and re-evaluable at any t, so threshold
//! crossings get refined by bisection. The Gaussian prox recursion gives
//! the exact law at every step; the TV on top of it is closed-form or
//! quadrature (zero stderr) except for multivariate unequal-variance
//! pairs, where it is Monte Carlo and the profile carries the stderr.
//! Simulation profiles are histogram plug-ins with stderr and bias bounds
//! and are never used as the authoritative side of an inequality.

use crate::error::{Error, Result};
use crate::measures::{gaussian_tv, tv_isotropic, IsotropicGaussian};
use crate::numeric::normal_cdf;
use crate::samplers::prox_gaussian_recursion;
use crate::tol;

/// Families whose TV profile is an explicit function of t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedFormFamily {
    /// init N(a 1_d, sigma2 I) relaxing to N(0, sigma2 I): the variances
    /// already match, so TV(t) = 2 Phi(|a| sqrt(d) e^{-t/sigma2}/(2 sigma)) - 1
    /// in every dimension (d enters through the mean norm only).
    MeanShift { a: f64, sigma2: f64, d: u64 },
    /// General isotropic Gaussian init under the OU flow towards
    /// N(0, sigma2 I). Restricted to d = 1 unless the variances match:
    /// multivariate unequal-variance TV has no deterministic evaluator.
    OuGaussian { m0: f64, s02: f64, sigma2: f64, d: u64 },
}

impl ClosedFormFamily {
    /// TV(mu_t, pi); deterministic for every valid family instance.
    pub fn tv_at(&self, t: f64) -> Result<f64> {
        match *self {
            ClosedFormFamily::MeanShift { a, sigma2, d } => {
                let delta = a.abs() * (d as f64).sqrt() * (-t / sigma2).exp();
                Ok(2.0 * normal_cdf(delta / (2.0 * sigma2.sqrt())) - 1.0)
            }
            ClosedFormFamily::OuGaussian { m0, s02, sigma2, d } => {
                let decay = (-t / sigma2).exp();
                let mt = (m0 * decay).abs();
                let vt = sigma2 + (s02 - sigma2) * (decay * decay);
                Ok(tv_isotropic(mt, vt, sigma2, d as usize)?.value)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    ClosedForm(ClosedFormFamily),
    Recursion,
    Simulation { estimator: &'static str },
}

impl ProfileSource {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileSource::ClosedForm(_) => "closed-form",
            ProfileSource::Recursion => "recursion",
            ProfileSource::Simulation { .. } => "simulation",
        }
    }
}

/// A TV-vs-time curve. `discrete` marks step-indexed chains, whose times
/// are integers and whose mixing times are step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingProfile {
    times: Vec<f64>,
    tv: Vec<f64>,
    stderr: Vec<f64>,
    source: ProfileSource,
    discrete: bool,
}

impl MixingProfile {
    pub fn new(
        times: Vec<f64>,
        tv: Vec<f64>,
        stderr: Vec<f64>,
        source: ProfileSource,
        discrete: bool,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != tv.len() || times.len() != stderr.len() {
            return Err(Error::InvalidParameter(format!(
                "profile arrays must be nonempty and equal length: {}/{}/{}",
                times.len(),
                tv.len(),
                stderr.len()
            )));
        }
        if !times.iter().all(|t| t.is_finite() && *t >= 0.0)
            || times.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter(
                "profile times must be finite, nonnegative, strictly increasing".into(),
            ));
        }
        if discrete && times.iter().any(|t| t.fract() != 0.0) {
            return Err(Error::InvalidParameter(
                "discrete profile times must be integer step counts".into(),
            ));
        }
        if !tv.iter().all(|v| (0.0..=1.0).contains(v)) {
            return Err(Error::InvalidParameter("tv values must lie in [0, 1]".into()));
        }
        if !stderr.iter().all(|s| s.is_finite() && *s >= 0.0) {
            return Err(Error::InvalidParameter(
                "stderr values must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            times,
            tv,
            stderr,
            source,
            discrete,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn tv(&self) -> &[f64] {
        &self.tv
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }

    pub fn source(&self) -> &ProfileSource {
        &self.source
    }

    pub fn is_discrete(&self) -> bool {
        self.discrete
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false // new() rejects empty arrays
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }
}

pub fn profile_closed_form_meanshift(
    a: f64,
    sigma2: f64,
    d: u64,
    t_grid: &[f64],
) -> Result<MixingProfile> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "mean shift a must be nonzero and finite, got {a}"
        )));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive and finite, got {sigma2}"
        )));
    }
    closed_form_profile(ClosedFormFamily::MeanShift { a, sigma2, d }, t_grid)
}

pub fn profile_closed_form_ou(
    init: &IsotropicGaussian,
    sigma2: f64,
    t_grid: &[f64],
) -> Result<MixingProfile> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma2 must be positive and finite, got {sigma2}"
        )));
    }
    if init.dim() > 1 && init.variance() != sigma2 {
        return Err(Error::Unsupported(
            "closed-form OU profile needs d = 1 or init variance = sigma2; simulate instead".into(),
        ));
    }
    let family = ClosedFormFamily::OuGaussian {
        m0: init.mean_norm(),
        s02: init.variance(),
        sigma2,
        d: init.dim() as u64,
    };
    closed_form_profile(family, t_grid)
}

fn closed_form_profile(family: ClosedFormFamily, t_grid: &[f64]) -> Result<MixingProfile> {
    let tv = t_grid
        .iter()
        .map(|&t| family.tv_at(t))
        .collect::<Result<Vec<_>>>()?;
    let stderr = vec![0.0; t_grid.len()];
    MixingProfile::new(
        t_grid.to_vec(),
        tv,
        stderr,
        ProfileSource::ClosedForm(family),
        false,
    )
}

/// Exact-law profile of the Proximal Sampler towards N(0, sigma2 I),
/// steps 0..=k_max. The law at each step is the Gaussian recursion; TV is
/// whatever `gaussian_tv` can do for the pair (stderr recorded when the
/// multivariate Monte Carlo path is the only option).
pub fn profile_prox_recursion(
    init: &IsotropicGaussian,
    sigma2: f64,
    h: f64,
    k_max: u32,
) -> Result<MixingProfile> {
    if k_max == 0 {
        return Err(Error::InvalidParameter("k_max must be >= 1".into()));
    }
    let target = IsotropicGaussian::centered(init.dim(), sigma2)?;
    let n = k_max as usize + 1;
    let mut times = Vec::with_capacity(n);
    let mut tv = Vec::with_capacity(n);
    let mut stderr = Vec::with_capacity(n);
    let mut law = init.clone();
    for k in 0..=k_max {
        if k > 0 {
            law = prox_gaussian_recursion(&law, &target, h, 1)?;
        }
        let est = gaussian_tv(&law, &target)?;
        times.push(k as f64);
        tv.push(est.value);
        stderr.push(est.stderr);
    }
    MixingProfile::new(times, tv, stderr, ProfileSource::Recursion, true)
}

/// First time the profile is at or below eps: min{t >= 0 : TV <= eps}
/// restricted to the grid, then refined by bisection when the source is a
/// closed form. Profiles are scanned, not assumed monotone; a re-crossing
/// after the first hit is logged as an anomaly and does not move the
/// answer.
///
/// # Errors
///
/// eps outside (0, 1), or the profile never reaches eps within its
/// horizon.
pub fn measure_tmix(profile: &MixingProfile, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "eps must lie in (0, 1), got {eps}"
        )));
    }
    let tv = profile.tv();
    let times = profile.times();
    let Some(i) = tv.iter().position(|&v| v <= eps) else {
        return Err(Error::ThresholdNotReached {
            eps,
            horizon: profile.horizon(),
        });
    };
    if tv[i + 1..].iter().any(|&v| v > eps) {
        log::warn!(
            "tv profile re-crosses eps = {eps} after its first hit at t = {}; reporting the first crossing",
            times[i]
        );
    }
    if i == 0 {
        return Ok(times[0]);
    }
    if let ProfileSource::ClosedForm(family) = profile.source() {
        // bracket tv(lo) > eps >= tv(hi); bisection needs no monotonicity,
        // only the sign change. The iteration cap guards against float
        // stall when the bracket width reaches the local ulp.
        let (mut lo, mut hi) = (times[i - 1], times[i]);
        for _ in 0..200 {
            if hi - lo <= tol::TMIX_BISECT {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if family.tv_at(mid)? <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        return Ok(0.5 * (lo + hi));
    }
    Ok(times[i])
}

/// t_mix(eps) and t_mix(1 - eps) of one profile, with their gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMeasurement {
    pub eps: f64,
    /// t_mix(eps): the slow threshold.
    pub t_mix_eps: f64,
    /// t_mix(1 - eps): the complementary, earlier threshold.
    pub t_mix_comp: f64,
    /// t_mix(eps) - t_mix(1 - eps), floored at 0.
    pub width: f64,
    /// Discrete profiles only: both thresholds crossed at the same step
    /// (> 0), so the window is an artifact of integer time.
    pub tied: bool,
}

pub fn mixing_window(profile: &MixingProfile, eps: f64) -> Result<WindowMeasurement> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "window eps must lie in (0, 1/2), got {eps}"
        )));
    }
    let t_mix_eps = measure_tmix(profile, eps)?;
    let t_mix_comp = measure_tmix(profile, 1.0 - eps)?;
    let width = (t_mix_eps - t_mix_comp).max(0.0);
    let tied = profile.is_discrete() && t_mix_eps == t_mix_comp && t_mix_eps > 0.0;
    Ok(WindowMeasurement {
        eps,
        t_mix_eps,
        t_mix_comp,
        width,
        tied,
    })
}

/// {0} followed by n geometrically spaced points from t_min to t_max:
/// resolves the early plateau and the exponential tail with one grid.
pub fn geometric_time_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0) || !(t_max > t_min) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need 0 < t_min < t_max finite, got [{t_min}, {t_max}]"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least 2 grid points".into()));
    }
    let ratio = (t_max / t_min).powf(1.0 / (n - 1) as f64);
    let mut grid = Vec::with_capacity(n + 1);
    grid.push(0.0);
    for k in 0..n {
        let t = if k + 1 == n {
            t_max
        } else {
            t_min * ratio.powi(k as i32)
        };
        grid.push(t);
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "geometric grid collapsed at float resolution; widen [t_min, t_max] or lower n".into(),
        ));
    }
    Ok(grid)
}

/// Default continuous horizon: 3x the basic mixing-time bound
/// C_P(pi)(1 + KL(mu_0 || pi))/eps, so every threshold the bound covers is
/// crossed strictly inside the grid.
pub fn default_horizon_ld(cp_pi: f64, kl0: f64, eps: f64) -> f64 {
    3.0 * cp_pi * (1.0 + kl0) / eps
}

/// Discrete analogue through hat-C_P, ceiled into a step count.
pub fn default_horizon_prox(hat_cp: f64, kl0: f64, eps: f64) -> u32 {
    (3.0 * hat_cp * (1.0 + kl0) / eps)
        .ceil()
        .min(u32::MAX as f64) as u32
}
