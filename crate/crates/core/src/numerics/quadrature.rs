//! Gauss-Legendre rules (nodes from `gauss-quad`), an adaptive bisection
//! integrator and cumulative composite integration along a node list.

use std::num::NonZeroUsize;
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;

use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pairs: Vec<(f64, f64)>,
}

impl GaussRule {
    pub fn new(degree: usize) -> Self {
        let degree = NonZeroUsize::new(degree.max(1)).expect("degree >= 1");
        let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(degree)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x, w))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { pairs }
    }

    pub fn degree(&self) -> usize {
        self.pairs.len()
    }

    /// Nodes and weights mapped onto `[a, b]`, in increasing node order when `a < b`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (x, w) in self.mapped(a, b) {
            acc += w * f(x)?;
        }
        Ok(acc)
    }
}

/// The 8-point rule used by the adaptive and composite integrators.
pub fn rule8() -> &'static GaussRule {
    static RULE: OnceLock<GaussRule> = OnceLock::new();
    RULE.get_or_init(|| GaussRule::new(8))
}

const MAX_DEPTH: usize = 40;
const MAX_INTERVALS: usize = 4096;

/// Adaptive Gauss-Legendre integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Each interval is accepted when the 8-point estimate and the sum of the two
/// half-interval estimates agree within the interval's share of `tol`.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let rule = rule8();
    let total = (b - a).abs();
    let whole = rule.integrate(a, b, &mut f)?;
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut acc = 0.0;
    let mut trace = Vec::new();
    let mut intervals = 0usize;
    while let Some((lo, hi, est, depth)) = stack.pop() {
        intervals += 1;
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f)?;
        let right = rule.integrate(mid, hi, &mut f)?;
        let diff = (left + right - est).abs();
        let share = tol * ((hi - lo).abs() / total).max(1e-3);
        // Noise floor: integrands built from finite differences cannot be
        // resolved below a few ulps of the interval estimate.
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if diff <= share.max(floor) {
            acc += left + right;
            continue;
        }
        if depth >= MAX_DEPTH || intervals >= MAX_INTERVALS {
            trace.push((lo, hi, diff));
            if trace.len() > 16 {
                trace.remove(0);
            }
            return Err(Error::Quadrature { a, b, tol, trace });
        }
        trace.push((lo, hi, diff));
        if trace.len() > 16 {
            trace.remove(0);
        }
        stack.push((mid, hi, right, depth + 1));
        stack.push((lo, mid, left, depth + 1));
    }
    Ok(acc)
}

/// Cumulative integrals `F[i] = int_{points[0]}^{points[i]} f` using a fixed
/// composite rule on each consecutive pair of points.
pub fn cumulative<F>(mut f: F, points: &[f64], rule: &GaussRule) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    if let Some(&first) = points.first() {
        out.push(0.0);
        let mut prev = first;
        for &p in &points[1..] {
            acc += rule.integrate(prev, p, &mut f)?;
            out.push(acc);
            prev = p;
        }
    }
    Ok(out)
}

/// Nodes and weights for `int_0^{2 pi}` with the periodic trapezoid rule.
pub fn periodic_trapezoid(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(move |j| (j as f64 * h, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let rule = GaussRule::new(5);
        for k in 0..10 {
            let v = rule.integrate(0.0, 2.0, |x| Ok(x.powi(k))).unwrap();
            let exact = 2f64.powi(k + 1) / (k + 1) as f64;
            assert!((v - exact).abs() < 1e-12 * exact.max(1.0), "k = {k}");
        }
    }

    #[test]
    fn mapped_nodes_are_ordered() {
        let nodes: Vec<f64> = GaussRule::new(7).mapped(1.0, 3.0).map(|p| p.0).collect();
        assert!(nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(nodes[0] > 1.0 && nodes[6] < 3.0);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        let v = adaptive(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, 1e-10).unwrap();
        let exact = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
    }

    #[test]
    fn adaptive_reversed_interval_changes_sign() {
        let f = |x: f64| Ok(x.sin());
        let a = adaptive(f, 0.0, 2.0, 1e-12).unwrap();
        let b = adaptive(f, 2.0, 0.0, 1e-12).unwrap();
        assert!((a + b).abs() < 1e-14);
        assert!((a - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn adaptive_reports_failure_on_singularity() {
        let err = adaptive(|x| Ok(1.0 / x.abs().sqrt().max(1e-300) / x.abs().max(1e-300)), -1.0, 1.0, 1e-12);
        assert!(matches!(err, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn cumulative_matches_antiderivative() {
        let pts = [0.0, 0.3, 0.9, 1.7];
        let c = cumulative(|x| Ok(x.cos()), &pts, rule8()).unwrap();
        for (p, v) in pts.iter().zip(&c) {
            assert!((v - p.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn trapezoid_is_spectral_for_periodic_functions() {
        let s: f64 = periodic_trapezoid(16).map(|(t, w)| w * (t.cos()).exp()).sum();
        // 2 pi I_0(1)
        let exact = 2.0 * PI * 1.266_065_877_752_008_4;
        assert!((s - exact).abs() < 1e-13);
    }
}
