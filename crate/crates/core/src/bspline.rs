//! B-spline bases on open uniform knot vectors and cardinal B-splines.
//!
//! Spans are half-open `[t_i, t_{i+1})` except the last non-empty span, which is
//! closed at `t = 1` so that the basis sums to one on all of `[0, 1]`. Terms of
//! the Cox–de Boor recursion with a zero denominator are taken to be zero.

use crate::error::{Error, Result};

/// Open uniform knot vector: `p + 1` zeros, the interior knots `i / n`, `p + 1` ones.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    spans: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of non-degenerate knot intervals `n`.
    pub fn spans(&self) -> usize {
        self.spans
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Total number of basis functions, `n + p`.
    pub fn num_basis(&self) -> usize {
        self.spans + self.degree
    }

    /// Knot index `k` of the span `[t_k, t_{k+1})` containing `t` (clamped to `[0, 1]`).
    pub fn find_span(&self, t: f64) -> usize {
        let p = self.degree;
        let n = self.spans;
        if t >= 1.0 {
            return p + n - 1;
        }
        if t <= 0.0 {
            return p;
        }
        let i = ((t * n as f64).floor() as usize).min(n - 1);
        // Guard against rounding in t * n near an interior knot.
        let mut k = p + i;
        while k > p && t < self.knots[k] {
            k -= 1;
        }
        while k < p + n - 1 && t >= self.knots[k + 1] {
            k += 1;
        }
        k
    }

    /// Values and first derivatives of the `p + 1` basis functions that are
    /// non-zero on span `k`, i.e. `N_{k-p}, ..., N_k` evaluated at `t`.
    pub fn nonzero_basis(&self, k: usize, t: f64, values: &mut [f64], derivs: &mut [f64]) {
        let p = self.degree;
        debug_assert_eq!(values.len(), p + 1);
        debug_assert_eq!(derivs.len(), p + 1);
        let mut lower = vec![0.0; p];
        if p >= 1 {
            span_basis(&self.knots, k, t, p - 1, &mut lower);
        }
        span_basis(&self.knots, k, t, p, values);
        let pf = p as f64;
        for r in 0..=p {
            let j = k + r - p;
            let mut d = 0.0;
            if r >= 1 {
                let den = self.knots[j + p] - self.knots[j];
                if den > 0.0 {
                    d += pf * lower[r - 1] / den;
                }
            }
            if r < p {
                let den = self.knots[j + p + 1] - self.knots[j + 1];
                if den > 0.0 {
                    d -= pf * lower[r] / den;
                }
            }
            derivs[r] = d;
        }
    }
}

/// Non-vanishing degree-`q` basis functions on span `k` (de Boor's triangular scheme).
fn span_basis(knots: &[f64], k: usize, t: f64, q: usize, out: &mut [f64]) {
    let mut left = vec![0.0; q + 1];
    let mut right = vec![0.0; q + 1];
    out[0] = 1.0;
    for j in 1..=q {
        left[j] = t - knots[k + 1 - j];
        right[j] = knots[k + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let den = right[r + 1] + left[j - r];
            let temp = if den != 0.0 { out[r] / den } else { 0.0 };
            out[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        out[j] = saved;
    }
}

pub fn open_uniform_knots(p: usize, n: usize) -> Result<KnotVector> {
    if p < 1 {
        return Err(Error::domain(format!("degree must be >= 1, got {p}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("number of spans must be >= 2, got {n}")));
    }
    let mut knots = Vec::with_capacity(2 * p + n + 1);
    knots.extend(std::iter::repeat_n(0.0, p + 1));
    knots.extend((1..n).map(|i| i as f64 / n as f64));
    knots.extend(std::iter::repeat_n(1.0, p + 1));
    Ok(KnotVector {
        degree: p,
        spans: n,
        knots,
    })
}

fn check_index(kv: &KnotVector, j: usize) -> Result<()> {
    if j >= kv.num_basis() {
        return Err(Error::domain(format!(
            "basis index {j} out of range 0..={}",
            kv.num_basis() - 1
        )));
    }
    Ok(())
}

/// `N_j^q(t)` on the knots of `kv` for any `q <= p`, by the Cox–de Boor recursion.
fn cox_de_boor(knots: &[f64], j: usize, q: usize, t: f64) -> f64 {
    let last = knots.len() - 1;
    // Degree-0 indicators N_{j+i}^0 for i = 0..=q.
    let mut level: Vec<f64> = (0..=q)
        .map(|i| {
            let a = knots[j + i];
            let b = knots[j + i + 1];
            let inside = a <= t && t < b;
            // The last non-empty span is closed on the right.
            let closing = t == knots[last] && b == knots[last] && a < b;
            if inside || closing {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for d in 1..=q {
        for i in 0..=(q - d) {
            let jj = j + i;
            let den_l = knots[jj + d] - knots[jj];
            let den_r = knots[jj + d + 1] - knots[jj + 1];
            let l = if den_l != 0.0 { (t - knots[jj]) / den_l * level[i] } else { 0.0 };
            let r = if den_r != 0.0 {
                (knots[jj + d + 1] - t) / den_r * level[i + 1]
            } else {
                0.0
            };
            level[i] = l + r;
        }
    }
    level[0]
}

pub fn basis_eval(kv: &KnotVector, j: usize, t: f64) -> Result<f64> {
    check_index(kv, j)?;
    Ok(cox_de_boor(&kv.knots, j, kv.degree, t))
}

/// First derivative of `N_j^p` via the degree-lowering identity.
pub fn basis_deriv(kv: &KnotVector, j: usize, t: f64) -> Result<f64> {
    check_index(kv, j)?;
    let p = kv.degree;
    let k = &kv.knots;
    let pf = p as f64;
    let mut d = 0.0;
    let den_l = k[j + p] - k[j];
    if den_l != 0.0 {
        d += pf / den_l * cox_de_boor(k, j, p - 1, t);
    }
    let den_r = k[j + p + 1] - k[j + 1];
    if den_r != 0.0 {
        d -= pf / den_r * cox_de_boor(k, j + 1, p - 1, t);
    }
    Ok(d)
}

/// Cardinal B-spline `𝒩_p(x)` on the integer knots `0, 1, ..., p + 1`.
pub fn cardinal_eval(p: usize, x: f64) -> f64 {
    if !(0.0..=(p as f64 + 1.0)).contains(&x) {
        return 0.0;
    }
    // level[s] holds 𝒩_q(x - s) for s = 0..=p-q.
    let mut level: Vec<f64> = (0..=p)
        .map(|s| {
            let y = x - s as f64;
            if (0.0..1.0).contains(&y) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    for q in 1..=p {
        let qf = q as f64;
        for s in 0..=(p - q) {
            let y = x - s as f64;
            level[s] = y / qf * level[s] + (qf + 1.0 - y) / qf * level[s + 1];
        }
    }
    level[0]
}

/// `order`-th derivative of `𝒩_p` from the difference identity
/// `𝒩_p' (x) = 𝒩_{p-1}(x) - 𝒩_{p-1}(x - 1)`.
pub fn cardinal_deriv(p: usize, x: f64, order: usize) -> Result<f64> {
    if order == 0 {
        return Ok(cardinal_eval(p, x));
    }
    if order >= p {
        return Err(Error::domain(format!(
            "derivative of order {order} of the degree-{p} cardinal B-spline is not continuous"
        )));
    }
    let mut binom = 1.0;
    let mut sum = 0.0;
    for i in 0..=order {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * cardinal_eval(p - order, x - i as f64);
        binom = binom * (order - i) as f64 / (i + 1) as f64;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn knot_vectors() {
        let kv = open_uniform_knots(1, 2).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.5, 1.0, 1.0]);
        let kv = open_uniform_knots(2, 2).unwrap();
        assert_eq!(kv.knots(), &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]);
        assert_eq!(open_uniform_knots(3, 4).unwrap().knots().len(), 11);
        assert!(open_uniform_knots(0, 4).is_err());
        assert!(open_uniform_knots(2, 1).is_err());
    }

    #[test]
    fn hat_function() {
        let kv = open_uniform_knots(1, 2).unwrap();
        assert_abs_diff_eq!(basis_eval(&kv, 1, 0.5).unwrap(), 1.0);
        assert_abs_diff_eq!(basis_eval(&kv, 1, 0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(basis_deriv(&kv, 1, 0.25).unwrap(), 2.0);
        assert!(basis_eval(&kv, 3, 0.5).is_err());
        assert!(basis_deriv(&kv, 3, 0.5).is_err());
    }

    #[test]
    fn right_closed_at_one() {
        for p in 1..=4 {
            let kv = open_uniform_knots(p, 5).unwrap();
            assert_abs_diff_eq!(basis_eval(&kv, p + 4, 1.0).unwrap(), 1.0);
            assert_abs_diff_eq!(basis_eval(&kv, 0, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let kv = open_uniform_knots(2, 4).unwrap();
        let t = 0.375; // midpoint of the second span
        let h = 1e-6;
        let fd = (basis_eval(&kv, 2, t + h).unwrap() - basis_eval(&kv, 2, t - h).unwrap()) / (2.0 * h);
        assert_abs_diff_eq!(basis_deriv(&kv, 2, t).unwrap(), fd, epsilon = 1e-8);
    }

    #[test]
    fn span_evaluator_agrees_with_recursion() {
        for p in 1..=5 {
            let kv = open_uniform_knots(p, 7).unwrap();
            let mut v = vec![0.0; p + 1];
            let mut d = vec![0.0; p + 1];
            for &t in &[0.0, 0.03, 0.2, 3.0 / 7.0, 0.51, 0.999, 1.0] {
                let k = kv.find_span(t);
                kv.nonzero_basis(k, t, &mut v, &mut d);
                for r in 0..=p {
                    let j = k + r - p;
                    assert_abs_diff_eq!(v[r], basis_eval(&kv, j, t).unwrap(), epsilon = 1e-13);
                    if t < 1.0 {
                        assert_abs_diff_eq!(d[r], basis_deriv(&kv, j, t).unwrap(), epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn cardinal_values() {
        assert_abs_diff_eq!(cardinal_eval(0, 0.5), 1.0);
        assert_abs_diff_eq!(cardinal_eval(1, 1.0), 1.0);
        assert_abs_diff_eq!(cardinal_eval(3, 2.0), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cardinal_eval(3, 1.0), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(cardinal_eval(5, 7.0), 0.0);
        assert_eq!(cardinal_eval(2, -0.1), 0.0);
    }

    #[test]
    fn cardinal_derivatives() {
        assert_abs_diff_eq!(cardinal_deriv(3, 2.0, 1).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cardinal_deriv(2, 0.0, 1).unwrap(), 0.0);
        let h = 1e-4;
        let fd2 = (cardinal_eval(3, 1.5 + h) - 2.0 * cardinal_eval(3, 1.5) + cardinal_eval(3, 1.5 - h))
            / (h * h);
        assert_abs_diff_eq!(cardinal_deriv(3, 1.5, 2).unwrap(), fd2, epsilon = 1e-6);
        assert_abs_diff_eq!(cardinal_deriv(3, 1.5, 2).unwrap(), -0.5, epsilon = 1e-15);
        assert!(cardinal_deriv(3, 1.0, 3).is_err());
        assert_eq!(cardinal_deriv(0, 0.5, 0).unwrap(), 1.0);
    }
}
