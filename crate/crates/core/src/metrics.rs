//! Sample-based divergence estimators and ensemble summaries.
//!
//! The workhorse is [`tv_mc_exact_density`]: when both densities are known
//! pointwise, TV(p, q) = E_{X~q}[(1 - p(X)/q(X))_+] is an unbiased, [0,1]-
//! valued estimator with a proper standard error. Histogram TV against a
//! reference law is also provided for simulated ensembles; its plug-in bias
//! is positive and is reported, not hidden.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{normal_cdf, pairwise_sum};
use crate::samplers::{ParticleEnsemble, RngStream};

/// How a divergence number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMethod {
    ClosedForm,
    Quadrature,
    McExactDensity,
    Grid,
    /// Binned plug-in estimate; biased upward, see `bias_bound`.
    Histogram,
}

impl EstimateMethod {
    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            EstimateMethod::ClosedForm | EstimateMethod::Quadrature | EstimateMethod::Grid
        )
    }

    pub fn label(&self) -> &'static str {
        match self {
            EstimateMethod::ClosedForm => "closed-form",
            EstimateMethod::Quadrature => "quadrature",
            EstimateMethod::McExactDensity => "mc-exact-density",
            EstimateMethod::Grid => "grid",
            EstimateMethod::Histogram => "histogram",
        }
    }
}

/// A divergence estimate with its provenance.
///
/// Exact methods (closed-form, quadrature, grid) always carry stderr = 0
/// and n_samples = 0. Sampling methods carry their standard error;
/// `raw_value` preserves the estimate before clamping to the valid range,
/// and `bias_bound` is a nonzero upper bound on the systematic error for
/// the histogram method only.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub stderr: f64,
    pub n_samples: u64,
    pub method: EstimateMethod,
    pub raw_value: f64,
    pub bias_bound: f64,
}

impl DivergenceEstimate {
    pub fn exact(value: f64, method: EstimateMethod) -> Self {
        assert!(method.is_exact(), "exact() needs an exact method");
        Self {
            value,
            stderr: 0.0,
            n_samples: 0,
            method,
            raw_value: value,
            bias_bound: 0.0,
        }
    }

    pub fn closed_form(value: f64) -> Self {
        Self::exact(value, EstimateMethod::ClosedForm)
    }

    pub fn quadrature(value: f64) -> Self {
        Self::exact(value, EstimateMethod::Quadrature)
    }

    /// A conservative upper confidence value: value + k stderr + bias,
    /// clamped into [0, 1] for TV-type quantities by the caller if needed.
    pub fn upper(&self, k: f64) -> f64 {
        self.value + k * self.stderr + self.bias_bound
    }
}

/// Number of counter positions reserved per Monte Carlo sample; the
/// q-sampler may consume at most this many draws for one point.
pub const DRAWS_PER_SAMPLE: u64 = 64;

const MC_BLOCK: u64 = 4096;

/// Monte Carlo TV via exact log-densities:
///
///   TV(p, q) = E_{X~q}[(1 - p(X)/q(X))_+],
///
/// averaged over n >= 1000 draws of `sample_q`. Sample j reads the stream
/// at counter offset j * [`DRAWS_PER_SAMPLE`], so the estimate is
/// bit-identical for any thread count and any block partition. The
/// estimator lives in [0, 1] samplewise; `raw_value` equals `value` and is
/// kept for uniformity. The standard error is the usual sqrt(S^2/n); it is
/// legitimately 0 in the degenerate case p = q.
///
/// # Errors
///
/// n < 1000, or a non-finite log-density ratio at some sample.
pub fn tv_mc_exact_density<P, Q, S>(
    log_p: P,
    log_q: Q,
    sample_q: S,
    n: u64,
    stream: RngStream,
) -> Result<DivergenceEstimate>
where
    P: Fn(&[f64]) -> f64 + Sync,
    Q: Fn(&[f64]) -> f64 + Sync,
    S: Fn(&mut RngStream) -> Vec<f64> + Sync,
{
    if n < 1000 {
        return Err(Error::InvalidParameter(format!(
            "tv_mc_exact_density needs n >= 1000, got {n}"
        )));
    }
    let n_blocks = n.div_ceil(MC_BLOCK);
    let partials: Vec<Result<(f64, f64)>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let lo = b * MC_BLOCK;
            let hi = (lo + MC_BLOCK).min(n);
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for j in lo..hi {
                let mut r = stream.at_offset(j * DRAWS_PER_SAMPLE);
                let x = sample_q(&mut r);
                debug_assert!(
                    r.position() - j * DRAWS_PER_SAMPLE <= DRAWS_PER_SAMPLE,
                    "q-sampler consumed more than DRAWS_PER_SAMPLE draws"
                );
                let ratio = log_p(&x) - log_q(&x);
                if ratio.is_nan() || ratio == f64::INFINITY {
                    return Err(Error::NonFiniteDensityRatio { index: j });
                }
                // (1 - e^ratio)_+ via expm1 for precision near ratio = 0
                let v = if ratio >= 0.0 { 0.0 } else { -f64::exp_m1(ratio) };
                sum += v;
                sumsq += v * v;
            }
            Ok((sum, sumsq))
        })
        .collect();

    let mut sums = Vec::with_capacity(partials.len());
    let mut sumsqs = Vec::with_capacity(partials.len());
    for p in partials {
        let (s, ss) = p?;
        sums.push(s);
        sumsqs.push(ss);
    }
    let sum = pairwise_sum(&sums);
    let sumsq = pairwise_sum(&sumsqs);
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(DivergenceEstimate {
        value: mean.clamp(0.0, 1.0),
        stderr: (var / nf).sqrt(),
        n_samples: n,
        method: EstimateMethod::McExactDensity,
        raw_value: mean,
        bias_bound: 0.0,
    })
}

/// First and second moment summary of an ensemble.
///
/// `variance_mean` averages the unbiased per-coordinate sample variances;
/// `mean_stderr` is the rms standard error of the coordinate means, and
/// `variance_stderr` the standard error of `variance_mean` treating
/// coordinates as independent (exact for the isotropic laws used here).
#[derive(Debug, Clone)]
pub struct EnsembleMoments {
    pub mean: Vec<f64>,
    pub variance_mean: f64,
    pub mean_stderr: f64,
    pub variance_stderr: f64,
}

pub fn ensemble_moments(ens: &ParticleEnsemble) -> Result<EnsembleMoments> {
    let n = ens.n_chains();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "moments need at least 2 chains".into(),
        ));
    }
    let d = ens.dim();
    let nf = n as f64;
    let mut mean = vec![0.0; d];
    let mut var = vec![0.0; d];
    let mut var_of_var = vec![0.0; d];
    let mut col = vec![0.0; n];
    for j in 0..d {
        for (i, p) in ens.points().enumerate() {
            col[i] = p[j];
        }
        let m = pairwise_sum(&col) / nf;
        let mut dev2 = vec![0.0; n];
        let mut dev4 = vec![0.0; n];
        for i in 0..n {
            let dd = (col[i] - m) * (col[i] - m);
            dev2[i] = dd;
            dev4[i] = dd * dd;
        }
        let s2 = pairwise_sum(&dev2) / (nf - 1.0);
        let m4 = pairwise_sum(&dev4) / nf;
        mean[j] = m;
        var[j] = s2;
        // asymptotic variance of the sample variance
        var_of_var[j] = ((m4 - s2 * s2 * (nf - 3.0) / (nf - 1.0)) / nf).max(0.0);
    }
    let variance_mean = pairwise_sum(&var) / d as f64;
    let mean_se2 = var.iter().map(|v| v / nf).sum::<f64>() / d as f64;
    let var_se2 = var_of_var.iter().sum::<f64>() / (d as f64 * d as f64);
    Ok(EnsembleMoments {
        mean,
        variance_mean,
        mean_stderr: mean_se2.sqrt(),
        variance_stderr: var_se2.sqrt(),
    })
}

/// Project points onto the diagonal direction 1/sqrt(d). For an isotropic
/// Gaussian the projection is N(<m, 1>/sqrt(d), s^2), so this is a faithful
/// 1-D lens on the two families the lab simulates.
pub(crate) fn project_diagonal(ens: &ParticleEnsemble) -> Vec<f64> {
    let scale = 1.0 / (ens.dim() as f64).sqrt();
    ens.points()
        .map(|p| p.iter().sum::<f64>() * scale)
        .collect()
}

/// Shared binned-TV core: empirical masses of `samples` over `bins` equal
/// cells spanning [lo, hi] plus two overflow cells, against reference
/// masses summing to 1.
pub(crate) fn histogram_tv(
    samples: &[f64],
    lo: f64,
    hi: f64,
    ref_masses: &[f64],
    ref_below: f64,
    ref_above: f64,
) -> DivergenceEstimate {
    let bins = ref_masses.len();
    let n = samples.len() as f64;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut below = 0u64;
    let mut above = 0u64;
    for &x in samples {
        if x < lo {
            below += 1;
        } else if x >= hi {
            above += 1;
        } else {
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let mut l1 = (below as f64 / n - ref_below).abs() + (above as f64 / n - ref_above).abs();
    let mut se2 = 0.0;
    let mut bias = 0.0;
    let phat_below = below as f64 / n;
    let phat_above = above as f64 / n;
    se2 += phat_below * (1.0 - phat_below) / n + phat_above * (1.0 - phat_above) / n;
    bias += (ref_below / n).sqrt() + (ref_above / n).sqrt();
    for (k, &c) in counts.iter().enumerate() {
        let phat = c as f64 / n;
        l1 += (phat - ref_masses[k]).abs();
        se2 += phat * (1.0 - phat) / n;
        // E|phat - p| <= sqrt(p(1-p)/n) <= sqrt(p/n): upward bias of the
        // plug-in L1 distance on cells where the true gap is ~0
        bias += (ref_masses[k] / n).sqrt();
    }
    let raw = 0.5 * l1;
    DivergenceEstimate {
        value: raw.clamp(0.0, 1.0),
        stderr: 0.5 * se2.sqrt(),
        n_samples: samples.len() as u64,
        method: EstimateMethod::Histogram,
        raw_value: raw,
        bias_bound: 0.5 * bias,
    }
}

/// Histogram TV between an ensemble (projected on the diagonal direction
/// for d > 1) and an isotropic Gaussian reference.
///
/// The binning spans reference mean +- 8 sd with two overflow cells, so no
/// mass is dropped. The value is a plug-in estimate and biased upward by at
/// most `bias_bound`; it is deliberately NOT tagged `mc-exact-density`.
///
/// # Errors
///
/// bins < 10, dimension mismatch, or a Dirac reference.
pub fn ensemble_tv_vs_gaussian(
    ens: &ParticleEnsemble,
    reference: &crate::measures::IsotropicGaussian,
    bins: usize,
) -> Result<DivergenceEstimate> {
    if bins < 10 {
        return Err(Error::InvalidParameter(format!(
            "need at least 10 bins, got {bins}"
        )));
    }
    if ens.dim() != reference.dim() {
        return Err(Error::DimensionMismatch {
            left: ens.dim(),
            right: reference.dim(),
        });
    }
    if reference.is_dirac() {
        return Err(Error::InvalidParameter(
            "histogram TV against a Dirac reference is degenerate".into(),
        ));
    }
    let proj = project_diagonal(ens);
    let scale = 1.0 / (reference.dim() as f64).sqrt();
    let ref_mean = reference.mean().iter().sum::<f64>() * scale;
    let sd = reference.variance().sqrt();
    let lo = ref_mean - 8.0 * sd;
    let hi = ref_mean + 8.0 * sd;
    let width = (hi - lo) / bins as f64;
    let mut ref_masses = Vec::with_capacity(bins);
    let mut prev_cdf = normal_cdf((lo - ref_mean) / sd);
    let ref_below = prev_cdf;
    for k in 1..=bins {
        let edge = lo + k as f64 * width;
        let c = normal_cdf((edge - ref_mean) / sd);
        ref_masses.push((c - prev_cdf).max(0.0));
        prev_cdf = c;
    }
    let ref_above = 1.0 - prev_cdf;
    Ok(histogram_tv(&proj, lo, hi, &ref_masses, ref_below, ref_above))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::IsotropicGaussian;
    use crate::numeric::INV_SQRT_2PI;

    fn std_normal_logpdf(shift: f64, var: f64) -> impl Fn(&[f64]) -> f64 {
        move |x: &[f64]| {
            let mut s = 0.0;
            for &xi in x {
                s += -0.5 * (xi - shift) * (xi - shift) / var;
            }
            s - 0.5 * x.len() as f64 * (var / (INV_SQRT_2PI * INV_SQRT_2PI)).ln()
        }
    }

    #[test]
    fn tv_mc_matches_unit_shift_closed_form() {
        // TV(N(0,1), N(1,1)) = 2 Phi(1/2) - 1
        let want = 0.38292492254802620728;
        let est = tv_mc_exact_density(
            std_normal_logpdf(1.0, 1.0),
            std_normal_logpdf(0.0, 1.0),
            |r: &mut RngStream| vec![r.next_normal()],
            60_000,
            RngStream::new(404, 0),
        )
        .unwrap();
        assert!(est.stderr > 0.0 && est.stderr < 0.01);
        assert!(
            (est.value - want).abs() <= 4.0 * est.stderr,
            "{} vs {want} (se {})",
            est.value,
            est.stderr
        );
        assert_eq!(est.method, EstimateMethod::McExactDensity);
        assert_eq!(est.n_samples, 60_000);
    }

    #[test]
    fn tv_mc_identical_laws_is_exactly_zero() {
        let est = tv_mc_exact_density(
            std_normal_logpdf(0.0, 1.0),
            std_normal_logpdf(0.0, 1.0),
            |r: &mut RngStream| vec![r.next_normal()],
            1000,
            RngStream::new(7, 0),
        )
        .unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn tv_mc_is_thread_count_invariant() {
        let run = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                tv_mc_exact_density(
                    std_normal_logpdf(0.7, 2.0),
                    std_normal_logpdf(0.0, 1.0),
                    |r: &mut RngStream| vec![r.next_normal()],
                    20_000,
                    RngStream::new(99, 3),
                )
                .unwrap()
            })
        };
        let a = run(1);
        let b = run(4);
        let c = run(8);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.stderr.to_bits(), c.stderr.to_bits());
    }

    #[test]
    fn tv_mc_rejects_small_n_and_bad_density() {
        assert!(tv_mc_exact_density(
            |_: &[f64]| 0.0,
            |_: &[f64]| 0.0,
            |r: &mut RngStream| vec![r.next_normal()],
            999,
            RngStream::new(0, 0),
        )
        .is_err());
        let err = tv_mc_exact_density(
            |_: &[f64]| f64::NAN,
            |_: &[f64]| 0.0,
            |r: &mut RngStream| vec![r.next_normal()],
            1000,
            RngStream::new(0, 0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteDensityRatio { .. }));
    }

    #[test]
    fn moments_recover_law_within_bands() {
        let law = IsotropicGaussian::new(vec![1.0, -2.0, 0.5], 2.0).unwrap();
        let ens = ParticleEnsemble::from_gaussian(&law, 30_000, 21).unwrap();
        let m = ensemble_moments(&ens).unwrap();
        for j in 0..3 {
            assert!(
                (m.mean[j] - law.mean()[j]).abs() < 4.0 * m.mean_stderr * 3.0_f64.sqrt(),
                "coord {j}"
            );
        }
        assert!((m.variance_mean - 2.0).abs() < 4.0 * m.variance_stderr);
        assert!(m.variance_stderr > 0.0);
    }

    #[test]
    fn histogram_tv_small_for_matching_law_large_for_shifted() {
        let law = IsotropicGaussian::new(vec![0.0, 0.0], 1.0).unwrap();
        let ens = ParticleEnsemble::from_gaussian(&law, 20_000, 33).unwrap();
        let same = ensemble_tv_vs_gaussian(&ens, &law, 40).unwrap();
        assert_eq!(same.method, EstimateMethod::Histogram);
        assert!(same.bias_bound > 0.0);
        // plug-in noise floor ~ bias_bound; matching laws stay under it
        assert!(
            same.value <= same.bias_bound + 4.0 * same.stderr,
            "tv {} bias {}",
            same.value,
            same.bias_bound
        );
        let shifted = IsotropicGaussian::new(vec![1.0, 1.0], 1.0).unwrap();
        let far = ensemble_tv_vs_gaussian(&ens, &shifted, 40).unwrap();
        // true TV of the projections = TV(N(0,1), N(sqrt(2),1)) ~ 0.52
        let want = 2.0 * normal_cdf(2.0_f64.sqrt() / 2.0) - 1.0;
        assert!(
            (far.value - want).abs() <= far.bias_bound + 4.0 * far.stderr,
            "{} vs {want}",
            far.value
        );
    }

    #[test]
    fn histogram_tv_rejects_thin_binning() {
        let law = IsotropicGaussian::new(vec![0.0], 1.0).unwrap();
        let ens = ParticleEnsemble::from_gaussian(&law, 100, 0).unwrap();
        assert!(ensemble_tv_vs_gaussian(&ens, &law, 9).is_err());
    }

    #[test]
    fn exact_constructor_refuses_sampling_methods() {
        let ok = DivergenceEstimate::closed_form(0.5);
        assert_eq!(ok.stderr, 0.0);
        assert_eq!(ok.n_samples, 0);
        let r = std::panic::catch_unwind(|| {
            DivergenceEstimate::exact(0.5, EstimateMethod::McExactDensity)
        });
        assert!(r.is_err());
    }
}
