//! Piecewise-constant probability measures on a 1-D grid, with exact
//! divergences between them. A grid measure is the honest object behind
//! every histogram and discretized density in the crate: divergences here
//! are computed on the discrete measure itself, so the only approximation
//! error anywhere is the discretization of the continuous law, never the
//! divergence formula.

use crate::error::{Error, Result};
use crate::measures::{DivergenceValue, IsotropicGaussian};
use crate::numeric::normal_cdf;

/// Mass cell sums may drift from 1 by rounding; anything worse than this is
/// a caller bug, not accumulated error.
const MASS_SUM_TOL: f64 = 1e-12;

/// A probability measure with piecewise-constant density on the cells of a
/// strictly increasing edge grid. `mass[i]` sits uniformly on
/// `[edges[i], edges[i+1])`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeasure1D {
    edges: Vec<f64>,
    mass: Vec<f64>,
}

impl GridMeasure1D {
    /// Masses must be nonnegative and sum to 1 within 1e-12; the stored
    /// masses are renormalized so downstream code can rely on an exact sum.
    pub fn new(edges: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        validate_edges(&edges)?;
        if mass.len() + 1 != edges.len() {
            return Err(Error::InvalidGridMeasure(format!(
                "{} cells need {} edges, got {}",
                mass.len(),
                mass.len() + 1,
                edges.len()
            )));
        }
        if mass.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidGridMeasure(
                "cell masses must be finite and >= 0".into(),
            ));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_SUM_TOL {
            return Err(Error::InvalidGridMeasure(format!(
                "cell masses sum to {total}, expected 1"
            )));
        }
        Ok(Self::normalized(edges, mass, total))
    }

    /// Arbitrary nonnegative weights, normalized to a probability measure.
    pub fn from_unnormalized(edges: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        validate_edges(&edges)?;
        if weights.len() + 1 != edges.len() {
            return Err(Error::InvalidGridMeasure(format!(
                "{} cells need {} edges, got {}",
                weights.len(),
                weights.len() + 1,
                edges.len()
            )));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidGridMeasure(
                "weights must be finite and >= 0".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidGridMeasure("total weight must be positive".into()));
        }
        Ok(Self::normalized(edges, weights, total))
    }

    /// Midpoint-rule discretization of an (unnormalized) density.
    pub fn from_density(edges: Vec<f64>, density: impl Fn(f64) -> f64) -> Result<Self> {
        validate_edges(&edges)?;
        let weights: Vec<f64> = edges
            .windows(2)
            .map(|w| density(0.5 * (w[0] + w[1])) * (w[1] - w[0]))
            .collect();
        Self::from_unnormalized(edges, weights)
    }

    /// Equispaced grid with `n` cells on [lo, hi].
    pub fn equispaced_edges(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one cell".into()));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        let width = (hi - lo) / n as f64;
        let mut edges: Vec<f64> = (0..=n).map(|k| lo + k as f64 * width).collect();
        // guard against rounding pushing the last edge short of hi
        edges[n] = hi;
        Ok(edges)
    }

    /// A 1-D Gaussian conditioned on [lo, hi], cell masses by exact
    /// Phi-differences. The discarded tail mass is the caller's
    /// discretization budget; at +-10 sd it is ~1.5e-23.
    pub fn gaussian(mean: f64, variance: f64, lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid Gaussian needs variance > 0, got {variance}"
            )));
        }
        let edges = Self::equispaced_edges(lo, hi, n)?;
        let sd = variance.sqrt();
        let mut weights = Vec::with_capacity(n);
        let mut prev = normal_cdf((edges[0] - mean) / sd);
        for e in &edges[1..] {
            let c = normal_cdf((e - mean) / sd);
            weights.push((c - prev).max(0.0));
            prev = c;
        }
        Self::from_unnormalized(edges, weights)
    }

    /// The uniform law on [a, b], on its own equispaced n-cell grid.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        let edges = Self::equispaced_edges(a, b, n)?;
        Self::from_unnormalized(edges, vec![1.0; n])
    }

    /// The uniform law on [a, b] projected onto the given edges by cell
    /// overlap. [a, b] must lie inside the grid span or mass would be lost.
    pub fn uniform_on(edges: Vec<f64>, a: f64, b: f64) -> Result<Self> {
        validate_edges(&edges)?;
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("need a < b, got [{a}, {b}]")));
        }
        if a < edges[0] || b > *edges.last().unwrap() {
            return Err(Error::InvalidParameter(format!(
                "[{a}, {b}] is not contained in the grid span [{}, {}]",
                edges[0],
                edges.last().unwrap()
            )));
        }
        let weights: Vec<f64> = edges
            .windows(2)
            .map(|w| (w[1].min(b) - w[0].max(a)).max(0.0))
            .collect();
        Self::from_unnormalized(edges, weights)
    }

    pub fn n_cells(&self) -> usize {
        self.mass.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn cell_width(&self, i: usize) -> f64 {
        self.edges[i + 1] - self.edges[i]
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.edges[i] + self.edges[i + 1])
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.edges == other.edges
    }

    /// Mean of the piecewise-constant density.
    pub fn mean(&self) -> f64 {
        (0..self.n_cells()).map(|i| self.mass[i] * self.midpoint(i)).sum()
    }

    /// Variance of the piecewise-constant density (the within-cell uniform
    /// spread w^2/12 included).
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (0..self.n_cells())
            .map(|i| {
                let c = self.midpoint(i) - m;
                let w = self.cell_width(i);
                self.mass[i] * (c * c + w * w / 12.0)
            })
            .sum()
    }

    /// Cumulative masses at every edge, pinned to exactly 1 from the last
    /// positive cell onward: quantile walks then terminate inside that cell
    /// and never step into a trailing zero-mass cell chasing rounding
    /// residue.
    fn cumulative(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.edges.len());
        out.push(0.0);
        let mut acc = 0.0;
        for &m in &self.mass {
            acc += m;
            out.push(acc.min(1.0));
        }
        let lp = self.mass.iter().rposition(|&m| m > 0.0).expect("mass sums to 1");
        for c in out.iter_mut().skip(lp + 1) {
            *c = 1.0;
        }
        out
    }

    fn normalized(edges: Vec<f64>, mut mass: Vec<f64>, total: f64) -> Self {
        for m in &mut mass {
            *m /= total;
        }
        Self { edges, mass }
    }
}

fn validate_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::InvalidGridMeasure("need at least 2 edges".into()));
    }
    if edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidGridMeasure("edges must be finite".into()));
    }
    if edges.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGridMeasure(
            "edges must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// All four divergences between measures on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDivergences {
    pub tv: f64,
    pub kl: DivergenceValue,
    pub chi2: DivergenceValue,
    pub w2: f64,
}

/// TV, KL(p||q), chi^2(p||q) and squared 2-Wasserstein between two measures
/// on the same grid. TV, KL and chi^2 are cellwise sums; W^2 comes from the
/// exact quantile coupling ([`grid_w2`]). KL and chi^2 are infinite when p
/// charges a cell that q does not.
///
/// When the grids discretize continuous laws, TV, KL and chi^2 are exact
/// for the discretized pair and lower bounds for the continuous pair (data
/// processing); in particular a discretization can report a large finite
/// chi^2 where the continuous value is infinite.
pub fn grid_divergences(p: &GridMeasure1D, q: &GridMeasure1D) -> Result<GridDivergences> {
    if !p.same_grid(q) {
        return Err(Error::GridMismatch);
    }
    let mut l1 = 0.0;
    let mut kl = 0.0;
    let mut chi2 = 0.0;
    let mut finite = true;
    for (&pi, &qi) in p.mass.iter().zip(&q.mass) {
        l1 += (pi - qi).abs();
        if pi > 0.0 {
            if qi > 0.0 {
                kl += pi * (pi / qi).ln();
                let gap = pi - qi;
                chi2 += gap * gap / qi;
            } else {
                finite = false;
            }
        }
    }
    Ok(GridDivergences {
        tv: (0.5 * l1).clamp(0.0, 1.0),
        kl: if finite {
            DivergenceValue::Finite(kl.max(0.0))
        } else {
            DivergenceValue::Infinite
        },
        chi2: if finite {
            DivergenceValue::Finite(chi2.max(0.0))
        } else {
            DivergenceValue::Infinite
        },
        w2: grid_w2(p, q),
    })
}

/// Exact squared 2-Wasserstein distance between two grid measures, which
/// may live on different grids.
///
/// In 1-D the optimal coupling is the quantile coupling,
/// W^2 = int_0^1 (F_p^{-1}(v) - F_q^{-1}(v))^2 dv. Both quantile functions
/// are piecewise linear in v (one linear piece per positive-mass cell), so
/// the integral splits at the merged cumulative-mass levels of both
/// measures and each piece is the exact integral of a quadratic, evaluated
/// in midpoint form Delta [(c0 + c1 tm)^2 + c1^2 Delta^2 / 12].
pub fn grid_w2(p: &GridMeasure1D, q: &GridMeasure1D) -> f64 {
    let cp = p.cumulative();
    let cq = q.cumulative();
    let mut i = 0; // current positive-mass cell of p, as edge index
    let mut j = 0;
    let mut v = 0.0;
    let mut acc = 0.0;
    while v < 1.0 {
        // skip exhausted and zero-mass cells
        while cp[i + 1] <= v && i + 1 < p.mass.len() {
            i += 1;
        }
        while cq[j + 1] <= v && j + 1 < q.mass.len() {
            j += 1;
        }
        let vn = cp[i + 1].min(cq[j + 1]).min(1.0);
        if vn > v {
            // quantile of p on [cp[i], cp[i+1]] is edges[i] + (v - cp[i]) * w / m
            let sp = p.cell_width(i) / p.mass[i];
            let ap0 = p.edges[i] - cp[i] * sp;
            let sq = q.cell_width(j) / q.mass[j];
            let bq0 = q.edges[j] - cq[j] * sq;
            let c0 = ap0 - bq0;
            let c1 = sp - sq;
            let tm = 0.5 * (v + vn);
            let delta = vn - v;
            let mid = c0 + c1 * tm;
            acc += delta * (mid * mid + c1 * c1 * delta * delta / 12.0);
            v = vn;
        } else {
            // only possible if both walkers are pinned at their last cells
            // with vn == v < 1, which the forced cumulative endpoint of 1
            // rules out; break defensively rather than loop forever
            debug_assert!(false, "quantile walk stalled at v = {v}");
            break;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{gaussian_chi2, gaussian_kl, gaussian_tv, gaussian_w2};
    use crate::tol;
    use proptest::prelude::*;

    // Union of the two +-5.5 sd windows: both laws keep all but ~2e-8 of
    // their mass (W^2 needs wide coverage: truncating a law at 3 sd costs
    // percents there). Beyond z ~ 8.2 a law's Phi-differences quantize to
    // exactly zero, silently truncating it further; that is harmless for
    // KL(p||q) and chi2(p||q) as long as q's representable support covers
    // p's, so the reference law below must always be the one with the
    // wider reach.
    fn grid_pair(
        a: &IsotropicGaussian,
        b: &IsotropicGaussian,
        n: usize,
    ) -> (GridMeasure1D, GridMeasure1D) {
        let (ma, sa) = (a.mean()[0], a.variance().sqrt());
        let (mb, sb) = (b.mean()[0], b.variance().sqrt());
        let lo = (ma - 5.5 * sa).min(mb - 5.5 * sb);
        let hi = (ma + 5.5 * sa).max(mb + 5.5 * sb);
        let p = GridMeasure1D::gaussian(ma, a.variance(), lo, hi, n).unwrap();
        let q = GridMeasure1D::gaussian(mb, b.variance(), lo, hi, n).unwrap();
        (p, q)
    }

    fn rel_close(got: f64, want: f64, rel: f64) -> bool {
        (got - want).abs() <= rel * want.abs().max(1e-12)
    }

    #[test]
    fn discretized_gaussians_match_closed_forms() {
        let cases = [
            (0.0, 1.0, 0.3, 1.0),  // equal variance, shift
            (0.0, 1.0, 1.0, 4.0),  // unequal variance and shift
            (-0.5, 0.9, 0.5, 2.0), // both moved, q again the wider law
        ];
        for (m1, v1, m2, v2) in cases {
            let a = IsotropicGaussian::new(vec![m1], v1).unwrap();
            let b = IsotropicGaussian::new(vec![m2], v2).unwrap();
            let (p, q) = grid_pair(&a, &b, 4001);
            let got = grid_divergences(&p, &q).unwrap();

            let tv = gaussian_tv(&a, &b).unwrap().value;
            let kl = gaussian_kl(&a, &b).unwrap().expect_finite("kl");
            let w2 = gaussian_w2(&a, &b).unwrap();
            assert!(
                rel_close(got.tv, tv, tol::GRID_VS_CLOSED_REL),
                "tv: grid {} vs closed {tv}",
                got.tv
            );
            assert!(
                rel_close(got.kl.expect_finite("kl"), kl, tol::GRID_VS_CLOSED_REL),
                "kl: grid {:?} vs closed {kl}",
                got.kl
            );
            assert!(
                rel_close(got.w2, w2, tol::GRID_VS_CLOSED_REL),
                "w2: grid {} vs closed {w2}",
                got.w2
            );
            if let DivergenceValue::Finite(chi2) =
                gaussian_chi2(&a, &b).unwrap()
            {
                assert!(
                    rel_close(got.chi2.expect_finite("chi2"), chi2, tol::GRID_VS_CLOSED_REL),
                    "chi2: grid {:?} vs closed {chi2}",
                    got.chi2
                );
            }
        }
    }

    #[test]
    fn shifted_uniform_w2_is_exact() {
        // quantiles differ by the constant 0.5 at every level, so W^2 is
        // exactly 0.25 no matter how the two grids are cut
        let p = GridMeasure1D::uniform(0.0, 1.0, 1000).unwrap();
        let q = GridMeasure1D::uniform(0.5, 1.5, 777).unwrap();
        let w2 = grid_w2(&p, &q);
        assert!((w2 - 0.25).abs() < 1e-12, "{w2}");
        assert!((grid_w2(&q, &p) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn w2_ignores_zero_mass_padding() {
        // dead cells on both flanks of p must stay out of the coupling: the
        // cumulative pins to 1 at the last positive cell, so the quantile
        // walk never divides by a zero cell mass
        let edges = GridMeasure1D::equispaced_edges(-2.0, 3.0, 1000).unwrap();
        let p = GridMeasure1D::uniform_on(edges, 0.0, 1.0).unwrap();
        let q = GridMeasure1D::uniform(0.25, 1.25, 640).unwrap();
        let w2 = grid_w2(&p, &q);
        assert!((w2 - 0.0625).abs() < 1e-9, "w2 {w2}");
        assert!((grid_w2(&q, &p) - 0.0625).abs() < 1e-9);
    }

    #[test]
    fn disjoint_supports_on_common_grid() {
        let edges = GridMeasure1D::equispaced_edges(0.0, 3.0, 300).unwrap();
        let p = GridMeasure1D::uniform_on(edges.clone(), 0.0, 1.0).unwrap();
        let q = GridMeasure1D::uniform_on(edges, 2.0, 3.0).unwrap();
        let d = grid_divergences(&p, &q).unwrap();
        assert_eq!(d.tv, 1.0);
        assert_eq!(d.kl, DivergenceValue::Infinite);
        assert_eq!(d.chi2, DivergenceValue::Infinite);
        // pure translation by 2
        assert!((d.w2 - 4.0).abs() < 1e-12, "{}", d.w2);
    }

    #[test]
    fn zero_mass_cells_are_skipped_cleanly() {
        // p lives on the left third, q on the right third, middle empty
        let edges = vec![0.0, 1.0, 2.0, 3.0];
        let p = GridMeasure1D::from_unnormalized(edges.clone(), vec![1.0, 0.0, 0.0]).unwrap();
        let q = GridMeasure1D::from_unnormalized(edges, vec![0.0, 0.0, 1.0]).unwrap();
        let d = grid_divergences(&p, &q).unwrap();
        assert_eq!(d.tv, 1.0);
        assert!((d.w2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn from_density_recovers_uniform() {
        let edges = GridMeasure1D::equispaced_edges(-1.0, 1.0, 50).unwrap();
        let p = GridMeasure1D::from_density(edges, |_| 7.0).unwrap();
        for i in 0..p.n_cells() {
            assert!((p.mass()[i] - 0.02).abs() < 1e-15);
        }
        assert!((p.mean() - 0.0).abs() < 1e-14);
        // uniform on [-1,1]: variance 1/3
        assert!((p.variance() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        assert!(GridMeasure1D::new(vec![0.0, 1.0], vec![0.5]).is_err()); // sums to 0.5
        assert!(GridMeasure1D::new(vec![0.0, 0.0, 1.0], vec![0.5, 0.5]).is_err()); // flat edge
        assert!(GridMeasure1D::new(vec![1.0, 0.0], vec![1.0]).is_err()); // decreasing
        assert!(GridMeasure1D::from_unnormalized(vec![0.0, 1.0], vec![-1.0]).is_err());
        assert!(GridMeasure1D::from_unnormalized(vec![0.0, 1.0], vec![0.0]).is_err());
        assert!(GridMeasure1D::uniform_on(vec![0.0, 1.0], -0.5, 0.5).is_err());
        let p = GridMeasure1D::uniform(0.0, 1.0, 10).unwrap();
        let q = GridMeasure1D::uniform(0.0, 1.0, 11).unwrap();
        assert!(matches!(grid_divergences(&p, &q), Err(Error::GridMismatch)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn divergences_vanish_iff_equal(
            weights in prop::collection::vec(0.0f64..1.0, 5..20),
            lo in -2.0f64..0.0,
            span in 0.5f64..4.0,
        ) {
            prop_assume!(weights.iter().sum::<f64>() > 0.1);
            let n = weights.len();
            let edges = GridMeasure1D::equispaced_edges(lo, lo + span, n).unwrap();
            let p = GridMeasure1D::from_unnormalized(edges, weights).unwrap();
            let d = grid_divergences(&p, &p.clone()).unwrap();
            prop_assert!(d.tv == 0.0);
            prop_assert_eq!(d.kl, DivergenceValue::Finite(0.0));
            prop_assert_eq!(d.chi2, DivergenceValue::Finite(0.0));
            prop_assert!(d.w2.abs() < 1e-15);
        }

        #[test]
        fn tv_bounded_and_symmetric_w2_symmetric(
            wp in prop::collection::vec(0.01f64..1.0, 8..16),
            wq in prop::collection::vec(0.01f64..1.0, 8..16),
        ) {
            prop_assume!(wp.len() == wq.len());
            let n = wp.len();
            let edges = GridMeasure1D::equispaced_edges(0.0, 1.0, n).unwrap();
            let p = GridMeasure1D::from_unnormalized(edges.clone(), wp).unwrap();
            let q = GridMeasure1D::from_unnormalized(edges, wq).unwrap();
            let pq = grid_divergences(&p, &q).unwrap();
            let qp = grid_divergences(&q, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&pq.tv));
            prop_assert!((pq.tv - qp.tv).abs() < 1e-15);
            prop_assert!((pq.w2 - qp.w2).abs() < 1e-12 * pq.w2.max(1e-9));
            // Pinsker on the discrete pair
            if let DivergenceValue::Finite(kl) = pq.kl {
                prop_assert!(pq.tv <= (kl / 2.0).sqrt() + 1e-9);
            }
        }
    }
}
