use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use super::CiTest;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};

pub const DEFAULT_ALPHA: f64 = 0.01;
const R_CLAMP: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone)]
pub struct GaussianTestConfig {
    pub alpha: f64,
    pub sample_size: usize,
    pub correlation: DMatrix<f64>,
}

impl GaussianTestConfig {
    pub fn new(correlation: DMatrix<f64>, sample_size: usize) -> Self {
        GaussianTestConfig { alpha: DEFAULT_ALPHA, sample_size, correlation }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// Partial correlation of `a` and `b` given `s` from a correlation matrix.
///
/// Closed-form recursion for up to two conditioning variables, otherwise the
/// inverse of the correlation sub-matrix over `{a, b} ∪ s`.
pub fn partial_correlation(corr: &DMatrix<f64>, a: Node, b: Node, s: &NodeSet) -> Result<f64> {
    let cond: Vec<Node> = s.iter().copied().collect();
    if cond.len() <= 2 {
        return recursive(corr, a, b, &cond);
    }
    let mut idx = vec![a, b];
    idx.extend(&cond);
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| corr[(idx[i], idx[j])]);
    let prec = sub
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular correlation sub-matrix".into()))?;
    let denom = (prec[(0, 0)] * prec[(1, 1)]).sqrt();
    if !denom.is_finite() || denom <= 0.0 {
        return Err(Error::Numerical("non-positive precision diagonal".into()));
    }
    Ok(-prec[(0, 1)] / denom)
}

fn recursive(corr: &DMatrix<f64>, a: Node, b: Node, cond: &[Node]) -> Result<f64> {
    match cond.split_last() {
        None => Ok(corr[(a, b)]),
        Some((&c, rest)) => {
            let rab = recursive(corr, a, b, rest)?;
            let rac = recursive(corr, a, c, rest)?;
            let rbc = recursive(corr, b, c, rest)?;
            let denom = ((1.0 - rac * rac) * (1.0 - rbc * rbc)).sqrt();
            if !(denom > 1e-12) {
                return Err(Error::Numerical("degenerate partial correlation".into()));
            }
            Ok((rab - rac * rbc) / denom)
        }
    }
}

/// `sqrt(n - k - 3) * |atanh(r)|` with `|r|` clamped away from one.
pub fn fisher_z_statistic(r: f64, n: usize, k: usize) -> Result<f64> {
    if n <= k + 3 {
        return Err(Error::InvalidArgument(format!(
            "sample size {n} too small for a conditioning set of size {k}"
        )));
    }
    let r = r.clamp(-R_CLAMP, R_CLAMP);
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    Ok(((n - k - 3) as f64).sqrt() * z.abs())
}

/// Fisher-z test of vanishing partial correlation.
#[derive(Debug, Clone)]
pub struct GaussianTest {
    cfg: GaussianTestConfig,
    threshold: f64,
}

impl GaussianTest {
    pub fn new(cfg: GaussianTestConfig) -> Result<Self> {
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha {} outside (0, 1)", cfg.alpha)));
        }
        if cfg.sample_size == 0 {
            return Err(Error::InvalidArgument("sample size must be positive".into()));
        }
        if cfg.correlation.nrows() != cfg.correlation.ncols() {
            return Err(Error::InvalidArgument("correlation matrix must be square".into()));
        }
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let threshold = normal.inverse_cdf(1.0 - cfg.alpha / 2.0);
        Ok(GaussianTest { cfg, threshold })
    }

    pub fn config(&self) -> &GaussianTestConfig {
        &self.cfg
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    fn check(&self, a: Node, b: Node, s: &NodeSet) -> Result<()> {
        let n = self.n_vars();
        if a >= n || b >= n || s.iter().any(|&v| v >= n) {
            return Err(Error::InvalidNode(*[a, b].iter().chain(s).find(|&&v| v >= n).unwrap()));
        }
        if a == b || s.contains(&a) || s.contains(&b) {
            return Err(Error::InvalidArgument("tested pair must be distinct and outside the conditioning set".into()));
        }
        Ok(())
    }
}

impl CiTest for GaussianTest {
    fn n_vars(&self) -> usize {
        self.cfg.correlation.nrows()
    }

    fn test(&self, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
        self.check(a, b, s)?;
        let r = partial_correlation(&self.cfg.correlation, a, b, s)?;
        let stat = fisher_z_statistic(r, self.cfg.sample_size, s.len())?;
        Ok(stat <= self.threshold)
    }

    fn association(&self, a: Node, b: Node, s: &NodeSet) -> Result<Option<f64>> {
        self.check(a, b, s)?;
        Ok(Some(partial_correlation(&self.cfg.correlation, a, b, s)?.abs()))
    }
}

/// One-off form of [`GaussianTest::test`].
pub fn gaussian_test(cfg: &GaussianTestConfig, a: Node, b: Node, s: &NodeSet) -> Result<bool> {
    GaussianTest::new(cfg.clone())?.test(a, b, s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn corr3(r01: f64, r02: f64, r12: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[1.0, r01, r02, r01, 1.0, r12, r02, r12, 1.0])
    }

    #[test]
    fn zero_correlation_is_independent() {
        let cfg = GaussianTestConfig::new(DMatrix::identity(3, 3), 500).with_alpha(0.5);
        assert!(gaussian_test(&cfg, 0, 1, &NodeSet::new()).unwrap());
    }

    #[test]
    fn statistic_for_r_half() {
        let stat = fisher_z_statistic(0.5, 100, 0).unwrap();
        // atanh(0.5) = 0.549306..., sqrt(97) = 9.8489...
        assert_relative_eq!(stat, 0.5f64.atanh() * 97f64.sqrt(), epsilon = 1e-12);
        assert!((stat - 5.41).abs() < 0.01);
        let t = GaussianTest::new(GaussianTestConfig::new(corr3(0.5, 0.0, 0.0), 100)).unwrap();
        assert_relative_eq!(t.threshold(), 2.5758, epsilon = 1e-4);
        assert!(!t.test(0, 1, &NodeSet::new()).unwrap());
    }

    #[test]
    fn alpha_near_one_rejects_everything() {
        let t = GaussianTest::new(GaussianTestConfig::new(corr3(1e-3, 0.0, 0.0), 100).with_alpha(1.0 - 1e-9)).unwrap();
        assert!(!t.test(0, 1, &NodeSet::new()).unwrap());
    }

    #[test]
    fn recursive_and_inverse_agree() {
        // Correlation of a random positive-definite covariance.
        let a = DMatrix::from_row_slice(5, 5, &[
            1.0, 0.2, 0.0, 0.3, 0.1, 0.0, 1.0, 0.4, 0.0, 0.2, 0.5, 0.0, 1.0, 0.1, 0.0, 0.0, 0.3, 0.0, 1.0, 0.6,
            0.2, 0.0, 0.1, 0.0, 1.0,
        ]);
        let cov: DMatrix<f64> = &a * a.transpose();
        let d = DMatrix::from_fn(5, 5, |i, j| cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt());
        let s = NodeSet::from([2, 3]);
        let rec = partial_correlation(&d, 0, 1, &s).unwrap();
        let idx = [0usize, 1, 2, 3];
        let sub = DMatrix::from_fn(4, 4, |i, j| d[(idx[i], idx[j])]);
        let p = sub.try_inverse().unwrap();
        assert_relative_eq!(rec, -p[(0, 1)] / (p[(0, 0)] * p[(1, 1)]).sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn argument_errors() {
        let t = GaussianTest::new(GaussianTestConfig::new(DMatrix::identity(6, 6), 5)).unwrap();
        assert!(matches!(t.test(0, 1, &NodeSet::from([2, 3])), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.test(0, 0, &NodeSet::new()), Err(Error::InvalidArgument(_))));
        assert!(matches!(t.test(0, 9, &NodeSet::new()), Err(Error::InvalidNode(9))));
        let singular = DMatrix::from_element(5, 5, 1.0);
        let t = GaussianTest::new(GaussianTestConfig::new(singular, 100)).unwrap();
        assert!(matches!(t.test(0, 1, &NodeSet::from([2, 3, 4])), Err(Error::Numerical(_))));
    }
}
