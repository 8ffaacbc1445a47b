//! Spectral symbol of the reparametrized discretization and its monotone rearrangement.
//!
//! With `g_p`, `f_p` the cosine sums built from cardinal B-spline samples and
//! `e_p = f_p / g_p`, the normalized eigenvalues `n⁻² λ` are distributed as
//! `ω(x, θ) = e_p(θ) / φ′(x)²`. `Ψ(y)` is the area of `{√ω ≤ y}` and
//! `√ξ(x) = Ψ⁻¹(πx)` is the monotone rearrangement of `√ω`.

use std::f64::consts::PI;

use crate::bspline::{cardinal_deriv, cardinal_eval};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive, QuadratureRule};
use crate::reparam::{Convexity, Reparametrization};

const BISECTION_TOL: f64 = 1e-12;
const BISECTION_CAP: usize = 200;
const THETA_PANELS: usize = 64;
const THETA_NODES: usize = 8;
const SQRT12: f64 = 3.464_101_615_137_754_6;

/// `g_p(θ) = 𝒩_{2p+1}(p+1) + 2 Σ_{k=1}^{p} 𝒩_{2p+1}(p+1-k) cos kθ`, defined for `p >= 0`.
pub fn g_p(p: usize, theta: f64) -> f64 {
    let q = 2 * p + 1;
    let c = (p + 1) as f64;
    let mut s = cardinal_eval(q, c);
    for k in 1..=p {
        s += 2.0 * cardinal_eval(q, c - k as f64) * (k as f64 * theta).cos();
    }
    s
}

/// Cached cardinal-spline samples defining `g_p`, `f_p` and `e_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpSymbol {
    p: usize,
    /// `𝒩_{2p+1}(p+1-k)` for `k = 0..=p`.
    pub mass_samples: Vec<f64>,
    /// `-𝒩″_{2p+1}(p+1-k)` for `k = 0..=p`.
    pub stiff_samples: Vec<f64>,
    e_max: f64,
}

impl EpSymbol {
    pub fn new(p: usize) -> Result<Self> {
        if p < 1 {
            return Err(Error::domain(format!("degree must be >= 1, got {p}")));
        }
        let q = 2 * p + 1;
        let c = (p + 1) as f64;
        let mass_samples = (0..=p).map(|k| cardinal_eval(q, c - k as f64)).collect();
        let stiff_samples = (0..=p)
            .map(|k| cardinal_deriv(q, c - k as f64, 2).map(|v| -v))
            .collect::<Result<Vec<_>>>()?;
        let mut sym = EpSymbol {
            p,
            mass_samples,
            stiff_samples,
            e_max: 0.0,
        };
        sym.e_max = sym.e(PI);
        Ok(sym)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn g(&self, theta: f64) -> f64 {
        let mut s = self.mass_samples[0];
        for (k, a) in self.mass_samples.iter().enumerate().skip(1) {
            s += 2.0 * a * (k as f64 * theta).cos();
        }
        s
    }

    /// `f_p(θ)`. The samples sum to zero, so the sum is taken against
    /// `cos kθ - 1 = -2 sin²(kθ/2)`, which keeps full relative accuracy near 0.
    pub fn f(&self, theta: f64) -> f64 {
        let mut s = 0.0;
        for (k, a) in self.stiff_samples.iter().enumerate().skip(1) {
            let h = (0.5 * k as f64 * theta).sin();
            s -= 4.0 * a * h * h;
        }
        s
    }

    /// `e_p(θ) = f_p(θ) / g_p(θ)` without range checks.
    pub fn e(&self, theta: f64) -> f64 {
        self.f(theta) / self.g(theta)
    }

    /// `e_p(π)`, the maximum of `e_p`.
    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    /// The `θ ∈ [0, π]` with `e_p(θ) = v`; `v` is clipped to `[0, e_p(π)]`.
    fn inverse_clipped(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        if v >= self.e_max {
            return PI;
        }
        // Start from the small-θ approximation e_p(θ) ≈ θ² when it lies in range.
        let (mut lo, mut hi) = (0.0, PI);
        let guess = v.sqrt();
        if guess < PI {
            let probe = (guess * 1.01).min(PI);
            if self.e(probe) >= v {
                hi = probe;
                let low = guess * 0.99;
                if self.e(low) <= v {
                    lo = low;
                }
            }
        }
        for _ in 0..BISECTION_CAP {
            if hi - lo <= BISECTION_TOL * 0.5 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.e(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::domain(format!("theta = {theta} outside [0, pi]")));
    }
    Ok(())
}

pub fn ep_eval(sym: &EpSymbol, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    Ok(sym.e(theta))
}

/// Inverse of the increasing map `e_p: [0, π] → [0, e_p(π)]`.
pub fn ep_inverse(sym: &EpSymbol, v: f64) -> Result<f64> {
    if !(0.0..=sym.e_max).contains(&v) {
        return Err(Error::domain(format!(
            "value {v} outside the range [0, {}] of e_{}",
            sym.e_max, sym.p
        )));
    }
    Ok(sym.inverse_clipped(v))
}

/// `ω(x, θ) = e_p(θ) / φ′(x)²`.
pub fn omega_eval(phi: &Reparametrization, sym: &EpSymbol, x: f64, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x = {x} outside [0, 1]")));
    }
    check_theta(theta)?;
    let d = phi.deriv1(x);
    Ok(sym.e(theta) / (d * d))
}

/// Largest value of `√ω`, namely `√e_p(π) / min φ′`.
pub fn range_max(phi: &Reparametrization, sym: &EpSymbol) -> f64 {
    sym.e_max.sqrt() / phi.deriv1_range().0
}

/// `Ψ(y) = ∫₀^π |{x : φ′(x) ≥ √e_p(θ) / y}| dθ`.
pub fn psi_sqrt(phi: &Reparametrization, sym: &EpSymbol, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!("y = {y} must be non-negative")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y >= range_max(phi, sym) {
        return Ok(PI);
    }
    let (dmin, dmax) = phi.deriv1_range();
    let y2 = y * y;
    // m = 1 below θ_lo, m = 0 above θ_hi
    let theta_lo = sym.inverse_clipped(y2 * dmin * dmin);
    if phi.convexity() == Convexity::Affine {
        return Ok(theta_lo);
    }
    let theta_hi = if dmax.is_finite() {
        sym.inverse_clipped(y2 * dmax * dmax)
    } else {
        PI
    };
    let convex = phi.convexity() == Convexity::StrictlyConvex;
    let rule = QuadratureRule::gauss_legendre(THETA_NODES)?;
    let mut err = None;
    let middle = rule.integrate_composite(theta_lo, theta_hi, THETA_PANELS, |theta| {
        let c = sym.e(theta).max(0.0).sqrt() / y;
        match phi.deriv1_inverse(c) {
            Ok(x) => {
                if convex {
                    1.0 - x
                } else {
                    x
                }
            }
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok((theta_lo + middle).clamp(0.0, PI))
}

fn strictly_convex_version(phi: &Reparametrization) -> Result<Reparametrization> {
    match phi.convexity() {
        Convexity::StrictlyConvex => Ok(phi.clone()),
        Convexity::StrictlyConcave => Ok(phi.mirror()),
        Convexity::Affine => Err(Error::domain(format!(
            "{} is affine; the two-branch form needs strict convexity or concavity",
            phi.label()
        ))),
    }
}

/// `arccos((6 - 2s²) / (6 + s²))` in the cancellation-free form `2 atan(s√3 / √(12 - s²))`.
fn theta_of(s: f64) -> f64 {
    let s2 = s * s;
    if s2 >= 12.0 {
        PI
    } else {
        2.0 * (s * 3f64.sqrt()).atan2((12.0 - s2).sqrt())
    }
}

fn p1_rule() -> QuadratureRule {
    QuadratureRule::gauss_legendre(10).expect("order 10 is valid")
}

/// Two-branch form of `Ψ` for `p = 1`. Concave maps are replaced by their mirror
/// image, which has the same `Ψ`.
pub fn psi_sqrt_p1_closed(phi: &Reparametrization, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!("y = {y} must be non-negative")));
    }
    let phi = strictly_convex_version(phi)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let d0 = phi.deriv1(0.0);
    let d1 = phi.deriv1(1.0);
    if y * d0 >= SQRT12 {
        return Ok(PI);
    }
    let t = if y * d1 <= SQRT12 {
        1.0
    } else {
        phi.deriv1_inverse(SQRT12 / y)?
    };
    // x = t (1 - u²) removes the square-root behaviour at x = t.
    let rule = p1_rule();
    let integral = integrate_adaptive(&rule, 0.0, 1.0, 1e-15, 60, |u| {
        let x = t * (1.0 - u * u);
        2.0 * t * u * theta_of(y * phi.deriv1(x))
    })?;
    Ok(integral + PI * (1.0 - t))
}

/// Analytic `Ψ′(y)` for `p = 1`, on either side of the branch point `√12 / max φ′`.
pub fn psi_prime_p1(phi: &Reparametrization, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::domain(format!("y = {y} must be non-negative")));
    }
    let phi = strictly_convex_version(phi)?;
    let d0 = phi.deriv1(0.0);
    let d1 = phi.deriv1(1.0);
    let branch = SQRT12 / d1;
    if (y - branch).abs() <= 1e-14 * branch {
        return Err(Error::domain(format!(
            "y = {y} is the branch point sqrt(12)/phi'(1); only one-sided derivatives exist"
        )));
    }
    if y * d0 >= SQRT12 {
        return Ok(0.0);
    }
    let rule = p1_rule();
    if y < branch {
        // x = 1 - u² keeps the integrand bounded as y approaches the branch point.
        return integrate_adaptive(&rule, 0.0, 1.0, 1e-15, 60, |u| {
            let x = 1.0 - u * u;
            let d = phi.deriv1(x);
            let s = y * d;
            let w = s / SQRT12;
            2.0 * u * d / (1.0 - w * w).sqrt() * 6.0 / (6.0 + s * s)
        });
    }
    // Change of variables z = (φ′)⁻¹(φ′(1) φ′(x) / φ′(t)) with φ′(t) = √12 / y.
    let r = SQRT12 / (y * d1);
    let z0 = phi.deriv1_inverse(d0 / r)?;
    let span = 1.0 - z0;
    let mut err = None;
    let integral = integrate_adaptive(&rule, 0.0, 1.0, 1e-15, 60, |u| {
        let z = 1.0 - span * u * u;
        let dz = phi.deriv1(z);
        let s = dz / d1;
        let x = match phi.deriv1_inverse(r * dz) {
            Ok(x) => x,
            Err(e) => {
                err.get_or_insert(e);
                return 0.0;
            }
        };
        let g = phi.deriv2(z) / phi.deriv2(x);
        let root = ((1.0 - s) * (1.0 + s)).max(0.0).sqrt();
        if root == 0.0 {
            // limit of 2 span u / √(1 - s²) as u → 0
            let lim = 2.0 * (span * d1 / (2.0 * phi.deriv2(1.0))).sqrt();
            return lim * dz * g / (1.0 + 2.0 * s * s);
        }
        2.0 * span * u * dz * g / root / (1.0 + 2.0 * s * s)
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(r * r * integral)
}

/// The monotone rearrangement `√ξ` of `√ω` together with `Ψ` and the slope `γ`.
#[derive(Debug, Clone)]
pub struct RearrangedSymbol {
    phi: Reparametrization,
    sym: EpSymbol,
    range_max: f64,
    gamma: f64,
}

impl RearrangedSymbol {
    pub fn phi(&self) -> &Reparametrization {
        &self.phi
    }

    pub fn symbol(&self) -> &EpSymbol {
        &self.sym
    }

    pub fn p(&self) -> usize {
        self.sym.p
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn psi(&self, y: f64) -> Result<f64> {
        psi_sqrt(&self.phi, &self.sym, y)
    }

    /// `√ξ(x)`, the `y` with `Ψ(y) = πx`, by bisection on `[0, range_max]`.
    pub fn xi_sqrt(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::domain(format!("x = {x} outside [0, 1]")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        if x == 1.0 {
            return Ok(self.range_max);
        }
        let target = PI * x;
        let (mut lo, mut hi) = (0.0, self.range_max);
        for _ in 0..BISECTION_CAP {
            if hi - lo <= BISECTION_TOL {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            if self.psi(mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoConvergence {
            what: "inversion of the measure function".into(),
            iterations: BISECTION_CAP,
        })
    }
}

/// Builds the rearrangement and its slope at the origin.
pub fn rearrange(phi: &Reparametrization, sym: &EpSymbol) -> Result<RearrangedSymbol> {
    let range_max = range_max(phi, sym);
    if !(range_max.is_finite() && range_max > 0.0) {
        return Err(Error::domain(format!(
            "{} has no finite positive symbol range",
            phi.label()
        )));
    }
    let mut rs = RearrangedSymbol {
        phi: phi.clone(),
        sym: sym.clone(),
        range_max,
        gamma: f64::NAN,
    };
    rs.gamma = slope_at_origin(&rs)?;
    Ok(rs)
}

fn slope_at_origin(rs: &RearrangedSymbol) -> Result<f64> {
    if rs.sym.p == 1 && rs.phi.convexity() != Convexity::Affine {
        return Ok(PI / psi_prime_p1(&rs.phi, 0.0)?);
    }
    let steps = [1e-3, 5e-4, 2.5e-4];
    let mut d = [0.0; 3];
    for (di, &h) in d.iter_mut().zip(&steps) {
        *di = rs.psi(h)? / h;
    }
    let r1 = [2.0 * d[1] - d[0], 2.0 * d[2] - d[1]];
    let r2 = (4.0 * r1[1] - r1[0]) / 3.0;
    let spread = (r2 - d[2]).abs();
    if !(r2.is_finite() && r2 > 0.0 && spread <= 0.5 * d[2]) {
        return Err(Error::NoConvergence {
            what: format!("extrapolation of the slope of the measure function at 0 (estimate {r2})"),
            iterations: steps.len(),
        });
    }
    Ok(PI / r2)
}

/// `γ` with `√ξ(x) ~ γx` as `x → 0⁺`, i.e. `π / Ψ′(0⁺)`.
pub fn gamma_slope(rs: &RearrangedSymbol) -> f64 {
    rs.gamma
}
