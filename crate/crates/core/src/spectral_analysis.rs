//! Statistics of computed spectra against the rearranged symbol: gaps, outliers,
//! Weyl-law errors, pack counts and eigenvalue orderings.

use crate::assembly::QuadratureConfig;
use crate::eigensolve::{solve_reparametrized, Spectrum};
use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;
use crate::reparam::Reparametrization;
use crate::symbol::{psi_sqrt, EpSymbol, RearrangedSymbol};

/// Default relative tolerance above `range_max` for counting an eigenvalue as an outlier.
pub const DEFAULT_OUTLIER_TOL: f64 = 1e-6;

/// Number of outliers predicted for degree `p`: `2⌊(p-1)/2⌋`.
pub fn outlier_count_formula(p: usize) -> usize {
    2 * (p.saturating_sub(1) / 2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub p: usize,
    pub n: usize,
    pub phi_label: String,
    /// `min_k (√λ_{k+1} - √λ_k)` over `1 <= k <= N-1`.
    pub delta: f64,
    /// Smallest 1-based index attaining `delta`.
    pub m_of_n: usize,
    /// Same minimum restricted to `k <= N - 1 - OUT(p)`.
    pub delta_out: f64,
    /// `n · min (√ξ((i+1)/n) - √ξ(i/n))`, only for `p = 1`.
    pub approx_delta: Option<f64>,
    pub gamma: f64,
    pub out_count_formula: usize,
    pub out_count_observed: usize,
}

impl GapReport {
    pub fn outlier_mismatch(&self) -> bool {
        self.out_count_formula != self.out_count_observed
    }
}

/// Minimum consecutive difference of `values` and its smallest 1-based index,
/// over the first `limit` differences.
fn min_gap(values: &[f64], limit: usize) -> (f64, usize) {
    let mut best = f64::INFINITY;
    let mut at = 0;
    for k in 0..limit.min(values.len().saturating_sub(1)) {
        let d = values[k + 1] - values[k];
        if d < best {
            best = d;
            at = k + 1;
        }
    }
    (best, at)
}

pub fn compute_gap(spec: &Spectrum, rs: &RearrangedSymbol, outlier_tol: f64) -> Result<GapReport> {
    let big_n = spec.len();
    if big_n < 2 {
        return Err(Error::domain(format!("need at least two eigenvalues, got {big_n}")));
    }
    let roots: Vec<f64> = spec.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    let (delta, m_of_n) = min_gap(&roots, big_n - 1);
    let out = outlier_count_formula(spec.p);
    let limit = (big_n - 1).saturating_sub(out).max(1);
    let (delta_out, _) = min_gap(&roots, limit);
    let approx_delta = if rs.p() == 1 && spec.n >= 3 {
        Some(approximate_gap(rs, spec.n)?)
    } else {
        None
    };
    Ok(GapReport {
        p: spec.p,
        n: spec.n,
        phi_label: spec.phi_label.clone(),
        delta,
        m_of_n,
        delta_out,
        approx_delta,
        gamma: rs.gamma(),
        out_count_formula: out,
        out_count_observed: outlier_count_observed(spec, rs, outlier_tol),
    })
}

/// `√ξ` at increasing points, reusing each result as the next lower bracket.
pub fn xi_sqrt_increasing(rs: &RearrangedSymbol, xs: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(xs.len());
    let mut lo = 0.0;
    let mut prev_x = 0.0;
    for &x in xs {
        if x < prev_x {
            lo = 0.0;
        }
        let y = xi_sqrt_from(rs, x, lo)?;
        out.push(y);
        lo = y;
        prev_x = x;
    }
    Ok(out)
}

fn xi_sqrt_from(rs: &RearrangedSymbol, x: f64, lo: f64) -> Result<f64> {
    if x <= 0.0 || x >= 1.0 {
        return rs.xi_sqrt(x.clamp(0.0, 1.0));
    }
    let target = std::f64::consts::PI * x;
    let (mut lo, mut hi) = (lo.max(0.0), rs.range_max());
    if rs.psi(lo)? > target {
        lo = 0.0;
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        if rs.psi(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        what: "inversion of the measure function".into(),
        iterations: 200,
    })
}

/// `δ̃_n = n · min_{1 <= i <= n-2} (√ξ((i+1)/n) - √ξ(i/n))` for linear splines.
pub fn approximate_gap(rs: &RearrangedSymbol, n: usize) -> Result<f64> {
    if rs.p() != 1 {
        return Err(Error::domain(format!(
            "the approximate gap is defined for p = 1, got p = {}",
            rs.p()
        )));
    }
    if n < 3 {
        return Err(Error::domain(format!("need n >= 3, got {n}")));
    }
    let xs: Vec<f64> = (1..n).map(|i| i as f64 / n as f64).collect();
    let ys = xi_sqrt_increasing(rs, &xs)?;
    let min = ys.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    Ok(n as f64 * min)
}

/// Number of `k` with `√(λ_k / n²) > range_max · (1 + tol)`.
pub fn outlier_count_observed(spec: &Spectrum, rs: &RearrangedSymbol, tol: f64) -> usize {
    let threshold = rs.range_max() * (1.0 + tol.max(0.0));
    spec.sqrt_normalized().iter().filter(|&&s| s > threshold).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylReport {
    /// `max_y |G_n(y) - Ψ(y)/π|` over a uniform grid on `[0, range_max]`.
    pub sup_g_error: f64,
    /// `max_{k <= N-OUT} |√(λ_k/n²) - √ξ(k/(N+1))|`.
    pub sampling_sup_error: f64,
    /// Same with weights `n / k`.
    pub weighted_sup_error: f64,
    /// `(1/(N-1)) Σ_{k=1}^{N-1} k (s_{k+1} - s_k)` with `s_k = √(λ_k/n²)`.
    pub avg_gap_lhs: f64,
    /// `∫₀^{range_max} Ψ(y)/π dy`.
    pub avg_gap_rhs: f64,
}

impl WeylReport {
    pub fn avg_gap_difference(&self) -> f64 {
        (self.avg_gap_lhs - self.avg_gap_rhs).abs()
    }
}

/// Normalized counting function `G_n(y) = #{k : √(λ_k/n²) <= y} / (N+1)`.
pub fn counting_function(sorted_roots: &[f64], y: f64) -> f64 {
    let count = sorted_roots.partition_point(|&s| s <= y);
    count as f64 / (sorted_roots.len() + 1) as f64
}

pub fn weyl_statistic(spec: &Spectrum, rs: &RearrangedSymbol, grid_size: usize) -> Result<WeylReport> {
    if grid_size < 2 {
        return Err(Error::domain(format!("grid size must be >= 2, got {grid_size}")));
    }
    let big_n = spec.len();
    if big_n < 2 {
        return Err(Error::domain(format!("need at least two eigenvalues, got {big_n}")));
    }
    let roots = spec.sqrt_normalized();
    let pi = std::f64::consts::PI;
    let rmax = rs.range_max();

    let mut sup_g = 0.0_f64;
    for i in 0..grid_size {
        let y = rmax * i as f64 / (grid_size - 1) as f64;
        let e = (counting_function(&roots, y) - rs.psi(y)? / pi).abs();
        sup_g = sup_g.max(e);
    }

    let keep = big_n - outlier_count_formula(spec.p).min(big_n - 1);
    let xs: Vec<f64> = (1..=keep).map(|k| k as f64 / (big_n + 1) as f64).collect();
    let xi = xi_sqrt_increasing(rs, &xs)?;
    let n = spec.n as f64;
    let mut sampling = 0.0_f64;
    let mut weighted = 0.0_f64;
    for (k, (s, x)) in roots.iter().zip(&xi).enumerate() {
        let d = (s - x).abs();
        sampling = sampling.max(d);
        weighted = weighted.max(n / (k + 1) as f64 * d);
    }

    let lhs = roots
        .windows(2)
        .enumerate()
        .map(|(k, w)| (k + 1) as f64 * (w[1] - w[0]))
        .sum::<f64>()
        / (big_n - 1) as f64;
    let rule = QuadratureRule::gauss_legendre(8)?;
    let mut err = None;
    let rhs = rule.integrate_composite(0.0, rmax, 64, |y| match rs.psi(y) {
        Ok(v) => v / pi,
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(WeylReport {
        sup_g_error: sup_g,
        sampling_sup_error: sampling,
        weighted_sup_error: weighted,
        avg_gap_lhs: lhs,
        avg_gap_rhs: rhs,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackReport {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl PackReport {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// True when every bin holds strictly fewer eigenvalues than the previous one.
    pub fn strictly_decreasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] > w[1])
    }

    pub fn strictly_increasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] < w[1])
    }
}

/// Counts of `√(λ_k/n²)` in the bins `(y_{i-1}, y_i]` of a uniform split of `[y0, yr]`
/// into `r` pieces.
pub fn pack_counts(spec: &Spectrum, y0: f64, yr: f64, r: usize) -> Result<PackReport> {
    if !(y0 >= 0.0 && y0 < yr) {
        return Err(Error::domain(format!("need 0 <= y0 < yr, got [{y0}, {yr}]")));
    }
    if r < 1 {
        return Err(Error::domain("need at least one bin"));
    }
    let bin_edges: Vec<f64> = (0..=r)
        .map(|i| if i == r { yr } else { y0 + (yr - y0) * i as f64 / r as f64 })
        .collect();
    let roots = spec.sqrt_normalized();
    let counts = bin_edges
        .windows(2)
        .map(|w| roots.iter().filter(|&&s| s > w[0] && s <= w[1]).count())
        .collect();
    Ok(PackReport { bin_edges, counts })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderReport {
    pub p: usize,
    pub n: usize,
    pub interval: (f64, f64),
    /// `min_y Ψ_A(√y) - Ψ_B(√y)` over 200 points of the interval.
    pub psi_margin: f64,
    /// `(k, λ_k^A/n² - λ_k^B/n²)` for every 1-based `k` with both values in the interval.
    pub pairs: Vec<(usize, f64)>,
    /// Every listed pair satisfies `λ_k^A < λ_k^B` (vacuously false when there are no pairs).
    pub ordering_holds: bool,
}

/// Checks the eigenvalue ordering implied by `Ψ_A(√y) > Ψ_B(√y)` on `interval`
/// (in units of `λ / n²`).
pub fn compare_orderings(
    phi_a: &Reparametrization,
    phi_b: &Reparametrization,
    p: usize,
    n: usize,
    interval: (f64, f64),
    quad: &QuadratureConfig,
) -> Result<OrderReport> {
    let sym = EpSymbol::new(p)?;
    let (lo, hi) = interval;
    for phi in [phi_a, phi_b] {
        let top = crate::symbol::range_max(phi, &sym).powi(2);
        if !(lo >= 0.0 && lo < hi && hi <= top * (1.0 + 1e-12)) {
            return Err(Error::domain(format!(
                "interval [{lo}, {hi}] is not inside the symbol range [0, {top}] of {}",
                phi.label()
            )));
        }
    }
    let mut margin = f64::INFINITY;
    for i in 0..200 {
        let y = lo + (hi - lo) * i as f64 / 199.0;
        let d = psi_sqrt(phi_a, &sym, y.sqrt())? - psi_sqrt(phi_b, &sym, y.sqrt())?;
        margin = margin.min(d);
    }
    let sa = solve_reparametrized(phi_a, p, n, quad, false)?.normalized();
    let sb = solve_reparametrized(phi_b, p, n, quad, false)?.normalized();
    let inside = |v: f64| v >= lo && v <= hi;
    let pairs: Vec<(usize, f64)> = sa
        .iter()
        .zip(&sb)
        .enumerate()
        .filter(|(_, (a, b))| inside(**a) && inside(**b))
        .map(|(k, (a, b))| (k + 1, a - b))
        .collect();
    let ordering_holds = !pairs.is_empty() && pairs.iter().all(|(_, d)| *d < 0.0);
    Ok(OrderReport {
        p,
        n,
        interval,
        psi_margin: margin,
        pairs,
        ordering_holds,
    })
}

/// First zero in `(0, 1]` of `φ_A′ - φ_B′` after the shared starting slope, or 1 if none.
pub fn first_slope_crossing(phi_a: &Reparametrization, phi_b: &Reparametrization) -> f64 {
    let diff = |x: f64| phi_a.deriv1(x) - phi_b.deriv1(x);
    let steps = 1000;
    let mut prev_x = 1e-9;
    let prev_sign = diff(prev_x).signum();
    for i in 1..=steps {
        let x = i as f64 / steps as f64;
        if diff(x).signum() != prev_sign {
            let (mut lo, mut hi) = (prev_x, x);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if diff(mid).signum() == prev_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_x = x;
    }
    1.0
}

/// Closed interval on which a convex pair with equal `φ′(0)` and `φ_A′ >= φ_B′` on
/// `[0, x₀]` satisfies `Ψ_A(√y) > Ψ_B(√y)`: the lower 95% of
/// `[e_p(π)/φ_A′(x₀)², e_p(π)/φ_A′(0)²]`. At the upper end both measures equal π.
pub fn ordering_interval(phi_a: &Reparametrization, phi_b: &Reparametrization, p: usize) -> Result<(f64, f64)> {
    let sym = EpSymbol::new(p)?;
    let x0 = first_slope_crossing(phi_a, phi_b);
    let e = sym.e_max();
    let lo = e / phi_a.deriv1(x0).powi(2);
    let top = e / phi_a.deriv1(0.0).powi(2);
    let hi = lo + 0.95 * (top - lo);
    if !(lo < hi) {
        return Err(Error::domain(format!(
            "{} and {} do not give a non-empty ordering interval",
            phi_a.label(),
            phi_b.label()
        )));
    }
    Ok((lo, hi))
}

/// Smallest `n` in `ns` (taken in order) for which the ordering holds.
pub fn first_ordered_n(
    phi_a: &Reparametrization,
    phi_b: &Reparametrization,
    p: usize,
    interval: (f64, f64),
    ns: &[usize],
    quad: &QuadratureConfig,
) -> Result<Option<usize>> {
    for &n in ns {
        if compare_orderings(phi_a, phi_b, p, n, interval, quad)?.ordering_holds {
            return Ok(Some(n));
        }
    }
    Ok(None)
}
