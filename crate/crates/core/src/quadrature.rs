//! Gauss–Legendre rules, composite panels and adaptive bisection.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A Gauss–Legendre rule on the reference interval [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Builds the `order`-point rule by Newton iteration on the Legendre polynomial.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::domain("quadrature order must be at least 1"));
        }
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let nf = order as f64;
        for i in 0..(order + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Roots come out in descending order; mirror them into place.
            nodes[order - 1 - i] = x;
            weights[order - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
        Ok(Self { nodes, weights })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of nodes; the rule is exact for polynomials up to degree `2 * order - 1`.
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum of the rule over `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let width = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * width;
                let hi = if k + 1 == panels { b } else { lo + width };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }
}

/// Evaluates `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates a vector-valued function over `[a, b]` by recursive bisection.
///
/// `f(x, out)` must overwrite `out` with the integrand at `x`. A panel is accepted
/// once the rule on the panel and the sum over its two halves differ by at most
/// `abs_tol` in every component. The result is *added* to `acc`.
pub fn integrate_adaptive_vec<F>(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
    mut f: F,
    acc: &mut [f64],
) -> Result<()>
where
    F: FnMut(f64, &mut [f64]),
{
    let dim = acc.len();
    let mut scratch = vec![0.0; dim];
    let mut estimate = |lo: f64, hi: f64, f: &mut F| -> Vec<f64> {
        let mut sum = vec![0.0; dim];
        for (x, w) in rule.mapped(lo, hi) {
            f(x, &mut scratch);
            for (s, v) in sum.iter_mut().zip(&scratch) {
                *s += w * v;
            }
        }
        sum
    };

    let whole = estimate(a, b, &mut f);
    let mut stack = vec![(a, b, whole, 0usize)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = estimate(lo, mid, &mut f);
        let right = estimate(mid, hi, &mut f);
        let change = whole
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(w, (l, r))| (l + r - w).abs())
            .fold(0.0, f64::max);
        if change <= abs_tol || !(mid > lo && mid < hi) {
            for ((s, l), r) in acc.iter_mut().zip(&left).zip(&right) {
                *s += l + r;
            }
        } else if depth >= max_depth {
            return Err(Error::Quadrature { a: lo, b: hi, change });
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(())
}

/// Scalar adaptive integration with an absolute tolerance.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: usize,
    mut f: F,
) -> Result<f64> {
    let mut acc = [0.0];
    integrate_adaptive_vec(rule, a, b, abs_tol, max_depth, |x, out| out[0] = f(x), &mut acc)?;
    Ok(acc[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_two() {
        for order in 1..=40 {
            let rule = QuadratureRule::gauss_legendre(order).unwrap();
            let s: f64 = rule.weights().iter().sum();
            assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn exact_for_monomials() {
        for order in 1..=20 {
            let rule = QuadratureRule::gauss_legendre(order).unwrap();
            for deg in 0..2 * order {
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                assert_abs_diff_eq!(got, exact, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn zero_order_rejected() {
        assert!(QuadratureRule::gauss_legendre(0).is_err());
    }

    #[test]
    fn composite_matches_single_for_polynomials() {
        let rule = QuadratureRule::gauss_legendre(4).unwrap();
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let a = rule.integrate(0.0, 2.0, f);
        let b = rule.integrate_composite(0.0, 2.0, 7, f);
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
        assert_abs_diff_eq!(a, 8.0 - 2.0 + 4.0, epsilon = 1e-13);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let rule = QuadratureRule::gauss_legendre(8).unwrap();
        // ∫_0^1 x^{-1/2} dx = 2
        let got = integrate_adaptive(&rule, 0.0, 1.0, 1e-14, 400, |x| x.powf(-0.5)).unwrap();
        assert_abs_diff_eq!(got, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn adaptive_depth_cap_reports_error() {
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        let err = integrate_adaptive(&rule, 0.0, 1.0, 1e-30, 2, |x| x.powf(-0.9)).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }
}
