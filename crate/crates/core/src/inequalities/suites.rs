//! Randomized sweeps: each suite draws a family of instances from a
//! seeded stream, checks one inequality on all of them, and folds the
//! reports into a [`SuiteOutcome`]. Instance i owns RNG stream
//! (seed, salt << 40 | i), so suites are deterministic, order-stable, and
//! independent of each other and of thread count.

use rayon::prelude::*;

use super::{
    check_chi2_contraction_prox, check_chi2_form_order, check_interpolation_ratio,
    check_lpi_langevin, check_lpi_prox, check_mixing_bound_ld, check_mixing_bound_ld_w2,
    check_mixing_bound_prox, check_mixing_bound_prox_w2, check_parabolic_reg_ld,
    check_parabolic_reg_prox, check_transport_variance, check_window_bound_ld,
    check_window_bound_prox, check_wtv_gaussian, check_wtv_grid, HatCp, InequalityReport,
};
use crate::error::Result;
use crate::experiments::{
    default_horizon_ld, default_horizon_prox, geometric_time_grid, profile_closed_form_meanshift,
    profile_prox_recursion,
};
use crate::measures::{GridMeasure1D, IsotropicGaussian};
use crate::samplers::RngStream;

/// Instance dimensions the Gaussian suites cycle through.
pub const SUITE_DIMS: [usize; 3] = [1, 2, 5];

/// Summary of one inequality over one instance family.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub violations: usize,
    pub vacuous: usize,
    /// Smallest rhs - lhs over non-vacuous instances; +inf when every
    /// instance was vacuous.
    pub min_slack: f64,
    /// The non-vacuous instance realizing min_slack.
    pub worst: Option<InequalityReport>,
}

impl SuiteOutcome {
    pub fn from_reports(name: &'static str, reports: &[InequalityReport]) -> Self {
        let mut violations = 0;
        let mut vacuous = 0;
        let mut min_slack = f64::INFINITY;
        let mut worst = None;
        for r in reports {
            if !r.holds {
                violations += 1;
            }
            if r.vacuous {
                vacuous += 1;
                continue;
            }
            if r.slack < min_slack {
                min_slack = r.slack;
                worst = Some(r.clone());
            }
        }
        Self {
            name,
            instances: reports.len(),
            violations,
            vacuous,
            min_slack,
            worst,
        }
    }

    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

fn pair_stream(seed: u64, salt: u64, i: u64) -> RngStream {
    RngStream::new(seed, (salt << 40) | i)
}

fn random_gaussian(s: &mut RngStream, d: usize) -> IsotropicGaussian {
    let mean = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
    let var = s.next_range(0.25, 4.0);
    IsotropicGaussian::new(mean, var).expect("valid random gaussian")
}

/// Two Gaussian bumps on a 2% broad floor, so supports overlap everywhere
/// and cell-mass ratios stay within eigensolve comfort.
fn random_mixture_grid(s: &mut RngStream, edges: &[f64]) -> GridMeasure1D {
    let w = s.next_range(0.2, 0.8);
    let c1 = s.next_range(-3.0, 3.0);
    let c2 = s.next_range(-3.0, 3.0);
    let s1 = s.next_range(0.5, 2.0);
    let s2 = s.next_range(0.5, 2.0);
    GridMeasure1D::from_density(edges.to_vec(), move |x| {
        let z1 = (x - c1) / s1;
        let z2 = (x - c2) / s2;
        let z3 = x / 3.0;
        let bumps = w * (-0.5 * z1 * z1).exp() / s1 + (1.0 - w) * (-0.5 * z2 * z2).exp() / s2;
        0.98 * bumps + 0.02 * (-0.5 * z3 * z3).exp() / 3.0
    })
    .expect("valid mixture density")
}

pub fn wtv_gaussian_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<SuiteOutcome> {
    let reports = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = pair_stream(seed, 1, i);
            let d = SUITE_DIMS[(i % 3) as usize];
            let mu = random_gaussian(&mut s, d);
            let nu = random_gaussian(&mut s, d);
            check_wtv_gaussian(&mu, &nu).map(|r| r.with_rhs_scale(rhs_scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteOutcome::from_reports("wtv-gaussian", &reports))
}

pub fn transport_variance_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<SuiteOutcome> {
    let reports = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = pair_stream(seed, 2, i);
            let d = SUITE_DIMS[(i % 3) as usize];
            let mu = random_gaussian(&mut s, d);
            // variance ratio in [0.4, 1.9] keeps chi^2(nu || mu) finite
            let mean_nu = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
            let var_nu = mu.variance() * s.next_range(0.4, 1.9);
            let nu = IsotropicGaussian::new(mean_nu, var_nu).expect("valid random gaussian");
            check_transport_variance(&mu, &nu).map(|r| r.with_rhs_scale(rhs_scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteOutcome::from_reports("transport-variance", &reports))
}

pub fn wtv_grid_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<SuiteOutcome> {
    let edges = GridMeasure1D::equispaced_edges(-8.0, 8.0, 400)?;
    let reports = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = pair_stream(seed, 3, i);
            let p = random_mixture_grid(&mut s, &edges);
            let q = random_mixture_grid(&mut s, &edges);
            check_wtv_grid(&p, &q).map(|r| r.with_rhs_scale(rhs_scale))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteOutcome::from_reports("wtv-grid", &reports))
}

pub fn interpolation_suite(n: usize, seed: u64) -> Result<SuiteOutcome> {
    let edges = GridMeasure1D::equispaced_edges(-8.0, 8.0, 400)?;
    let reports = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut s = pair_stream(seed, 4, i);
            let p = random_mixture_grid(&mut s, &edges);
            let q = random_mixture_grid(&mut s, &edges);
            check_interpolation_ratio(&p, &q)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteOutcome::from_reports("interpolation-ratio", &reports))
}

pub fn parabolic_ld_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<SuiteOutcome> {
    let t_grid = geometric_time_grid(1e-3, 50.0, 24)?;
    let mut reports = Vec::new();
    for i in 0..n as u64 {
        let mut s = pair_stream(seed, 5, i);
        let d = SUITE_DIMS[(i % 3) as usize];
        let sigma2 = s.next_range(0.5, 2.0);
        // every fifth init is a Dirac: the regularization bound is about
        // exactly this case (infinite KL at time zero, finite beyond)
        let init = if i % 5 == 0 {
            let point = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
            IsotropicGaussian::dirac(point).expect("valid dirac")
        } else {
            random_gaussian(&mut s, d)
        };
        for r in check_parabolic_reg_ld(&init, sigma2, &t_grid[1..])? {
            reports.push(r.with_rhs_scale(rhs_scale));
        }
    }
    Ok(SuiteOutcome::from_reports("parabolic-reg-ld", &reports))
}

pub fn parabolic_prox_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<SuiteOutcome> {
    let k_grid: [u32; 9] = [1, 2, 3, 5, 8, 13, 21, 34, 50];
    let mut reports = Vec::new();
    for i in 0..n as u64 {
        let mut s = pair_stream(seed, 6, i);
        let d = SUITE_DIMS[(i % 3) as usize];
        let sigma2 = s.next_range(0.5, 2.0);
        let h = [0.1, 1.0, 10.0][(i % 3) as usize];
        let init = if i % 5 == 0 {
            let point = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
            IsotropicGaussian::dirac(point).expect("valid dirac")
        } else {
            random_gaussian(&mut s, d)
        };
        for r in check_parabolic_reg_prox(&init, sigma2, h, &k_grid)? {
            reports.push(r.with_rhs_scale(rhs_scale));
        }
    }
    Ok(SuiteOutcome::from_reports("parabolic-reg-prox", &reports))
}

pub fn chi2_contraction_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<Vec<SuiteOutcome>> {
    let mut power = Vec::new();
    let mut exp = Vec::new();
    let mut order = Vec::new();
    for i in 0..n as u64 {
        let mut s = pair_stream(seed, 7, i);
        let d = SUITE_DIMS[(i % 3) as usize];
        let h = [0.1, 1.0, 10.0][(i % 3) as usize];
        // variance below 2 sigma2 = 2 keeps the initial chi^2 finite
        let var = s.next_range(0.25, 1.9);
        let mean = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
        let init = IsotropicGaussian::new(mean, var).expect("valid random gaussian");
        for k in 0..=8 {
            let c = check_chi2_contraction_prox(&init, 1.0, h, k)?;
            power.push(c.power.with_rhs_scale(rhs_scale));
            exp.push(c.exp.with_rhs_scale(rhs_scale));
            order.push(check_chi2_form_order(&init, 1.0, h, k)?);
        }
    }
    Ok(vec![
        SuiteOutcome::from_reports("chi2-contraction-power", &power),
        SuiteOutcome::from_reports("chi2-contraction-exp", &exp),
        SuiteOutcome::from_reports("chi2-form-order", &order),
    ])
}

pub fn lpi_suite(n: usize, seed: u64, rhs_scale: f64) -> Result<Vec<SuiteOutcome>> {
    let t_grid = geometric_time_grid(1e-3, 30.0, 12)?;
    let mut ld = Vec::new();
    let mut prox = Vec::new();
    for i in 0..n as u64 {
        let mut s = pair_stream(seed, 8, i);
        let d = SUITE_DIMS[(i % 3) as usize];
        let sigma2 = s.next_range(0.5, 2.0);
        let h = [0.1, 1.0, 10.0][(i % 3) as usize];
        let init = if i % 7 == 0 {
            let point = (0..d).map(|_| s.next_range(-3.0, 3.0)).collect();
            IsotropicGaussian::dirac(point).expect("valid dirac")
        } else {
            random_gaussian(&mut s, d)
        };
        for &t in &t_grid {
            ld.push(check_lpi_langevin(&init, sigma2, t)?.with_rhs_scale(rhs_scale));
        }
        for k in (0..=30).step_by(3) {
            prox.push(check_lpi_prox(&init, sigma2, h, k)?.with_rhs_scale(rhs_scale));
        }
    }
    Ok(vec![
        SuiteOutcome::from_reports("lpi-ld", &ld),
        SuiteOutcome::from_reports("lpi-prox", &prox),
    ])
}

/// Deterministic mixing-time and mixing-window sweep: the mean-shift
/// family at growing dimension for the continuous flow, and the prox
/// chain at two step sizes. No randomness: every profile is closed-form
/// or recursion.
pub fn mixing_window_suite(rhs_scale: f64) -> Result<Vec<SuiteOutcome>> {
    let mut mixing_ld = Vec::new();
    let mut mixing_ld_w2 = Vec::new();
    let mut window_ld = Vec::new();
    let mut mixing_prox = Vec::new();
    let mut mixing_prox_w2 = Vec::new();
    let mut window_prox = Vec::new();

    // continuous: init N(1_d, I) relaxing to N(0, I)
    for &d in &[100u64, 10_000, 1_000_000] {
        let kl0 = 0.5 * d as f64;
        let w2_0 = d as f64;
        let horizon = default_horizon_ld(1.0, kl0, 0.05);
        let grid = geometric_time_grid(1e-3, horizon, 128)?;
        let profile = profile_closed_form_meanshift(1.0, 1.0, d, &grid)?;
        for &eps in &[0.05, 0.1, 0.25] {
            mixing_ld.push(check_mixing_bound_ld(&profile, 1.0, kl0, eps)?.with_rhs_scale(rhs_scale));
            mixing_ld_w2
                .push(check_mixing_bound_ld_w2(&profile, w2_0, eps)?.with_rhs_scale(rhs_scale));
            window_ld
                .push(check_window_bound_ld(&profile, 1.0, 1.0, eps)?.with_rhs_scale(rhs_scale));
        }
    }

    // discrete: prox chain from N(4, 1) towards N(0, 1)
    let init = IsotropicGaussian::new(vec![4.0], 1.0)?;
    let (kl0, w2_0) = (8.0, 16.0);
    for &h in &[0.1, 1.0] {
        let hat_pi = HatCp::new(1.0, h)?;
        let hat_mu0 = HatCp::new(1.0, h)?;
        let k_max = default_horizon_prox(hat_pi.value(), kl0, 0.05);
        let profile = profile_prox_recursion(&init, 1.0, h, k_max)?;
        for &eps in &[0.05, 0.25] {
            mixing_prox
                .push(check_mixing_bound_prox(&profile, &hat_pi, kl0, eps)?.with_rhs_scale(rhs_scale));
            mixing_prox_w2.push(
                check_mixing_bound_prox_w2(&profile, w2_0, h, eps)?.with_rhs_scale(rhs_scale),
            );
            window_prox.push(
                check_window_bound_prox(&profile, &hat_pi, &hat_mu0, eps)?
                    .with_rhs_scale(rhs_scale),
            );
        }
    }

    Ok(vec![
        SuiteOutcome::from_reports("mixing-ld", &mixing_ld),
        SuiteOutcome::from_reports("mixing-ld-w2", &mixing_ld_w2),
        SuiteOutcome::from_reports("window-ld", &window_ld),
        SuiteOutcome::from_reports("mixing-prox", &mixing_prox),
        SuiteOutcome::from_reports("mixing-prox-w2", &mixing_prox_w2),
        SuiteOutcome::from_reports("window-prox", &window_prox),
    ])
}

/// Everything, sized off one instance budget n (the Gaussian suites get
/// n, the eigensolve- and recursion-heavy suites proportionally less).
pub fn run_all_suites(n: usize, seed: u64, rhs_scale: f64) -> Result<Vec<SuiteOutcome>> {
    let n_grid = (n / 5).max(8);
    let n_small = (n / 10).max(5);
    let mut out = vec![
        wtv_gaussian_suite(n, seed, rhs_scale)?,
        transport_variance_suite(n, seed, rhs_scale)?,
        wtv_grid_suite(n_grid, seed, rhs_scale)?,
        interpolation_suite(n_grid, seed)?,
        parabolic_ld_suite(n_small, seed, rhs_scale)?,
        parabolic_prox_suite(n_small, seed, rhs_scale)?,
    ];
    out.extend(chi2_contraction_suite(n_small, seed, rhs_scale)?);
    out.extend(lpi_suite(n_small, seed, rhs_scale)?);
    out.extend(mixing_window_suite(rhs_scale)?);
    Ok(out)
}
