//! Admissible reparametrizations `φ: [0, 1] → [0, 1]` with `φ(0) = 0`, `φ(1) = 1`,
//! `φ′ > 0` and `φ″` of one sign, together with the families used in the experiments.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const INVERSE_BISECTION_STEPS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convexity {
    StrictlyConvex,
    StrictlyConcave,
    Affine,
}

impl fmt::Display for Convexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Convexity::StrictlyConvex => "strictly-convex",
            Convexity::StrictlyConcave => "strictly-concave",
            Convexity::Affine => "affine",
        };
        f.write_str(s)
    }
}

/// A reparametrization with its first two derivatives and the inverse of `φ′`.
#[derive(Clone)]
pub struct Reparametrization {
    value: RealFn,
    deriv1: RealFn,
    deriv2: RealFn,
    deriv1_inverse: Option<RealFn>,
    convexity: Convexity,
    label: String,
}

impl fmt::Debug for Reparametrization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Reparametrization")
            .field("label", &self.label)
            .field("convexity", &self.convexity)
            .finish_non_exhaustive()
    }
}

impl Reparametrization {
    /// Builds a map from its parts. When `deriv1_inverse` is `None` and the map is
    /// not affine, the inverse of `φ′` is computed by bisection on `[0, 1]`.
    pub fn new<V, D1, D2>(
        label: impl Into<String>,
        convexity: Convexity,
        value: V,
        deriv1: D1,
        deriv2: D2,
        deriv1_inverse: Option<RealFn>,
    ) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        D1: Fn(f64) -> f64 + Send + Sync + 'static,
        D2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let deriv1: RealFn = Arc::new(deriv1);
        let deriv1_inverse = match (deriv1_inverse, convexity) {
            (Some(inv), _) => Some(inv),
            (None, Convexity::Affine) => None,
            (None, c) => Some(bisection_inverse(deriv1.clone(), c)),
        };
        Reparametrization {
            value: Arc::new(value),
            deriv1,
            deriv2: Arc::new(deriv2),
            deriv1_inverse,
            convexity,
            label: label.into(),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        (self.deriv1)(x)
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        (self.deriv2)(x)
    }

    /// The `x ∈ [0, 1]` with `φ′(x) = v`; values of `v` outside the range of `φ′`
    /// map to the nearer endpoint.
    pub fn deriv1_inverse(&self, v: f64) -> Result<f64> {
        match &self.deriv1_inverse {
            Some(inv) => {
                let x = inv(v);
                if x.is_nan() {
                    return Err(Error::domain(format!(
                        "inverse of the derivative of {} undefined at {v}",
                        self.label
                    )));
                }
                Ok(x.clamp(0.0, 1.0))
            }
            None => Err(Error::domain(format!(
                "{} has constant derivative; its inverse is undefined",
                self.label
            ))),
        }
    }

    pub fn has_deriv1_inverse(&self) -> bool {
        self.deriv1_inverse.is_some()
    }

    pub fn convexity(&self) -> Convexity {
        self.convexity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `(min φ′, max φ′)` over `[0, 1]`, attained at the endpoints since `φ′` is monotone.
    pub fn deriv1_range(&self) -> (f64, f64) {
        let a = self.deriv1(0.0);
        let b = self.deriv1(1.0);
        (a.min(b), a.max(b))
    }

    /// `x ↦ 1 − φ(1 − x)`: same distribution of `φ′`, opposite convexity.
    pub fn mirror(&self) -> Reparametrization {
        let v = self.value.clone();
        let d1 = self.deriv1.clone();
        let d2 = self.deriv2.clone();
        let inv = self.deriv1_inverse.clone().map(|inv| {
            let f: RealFn = Arc::new(move |y| 1.0 - inv(y));
            f
        });
        let convexity = match self.convexity {
            Convexity::StrictlyConvex => Convexity::StrictlyConcave,
            Convexity::StrictlyConcave => Convexity::StrictlyConvex,
            Convexity::Affine => Convexity::Affine,
        };
        Reparametrization {
            value: Arc::new(move |x| 1.0 - v(1.0 - x)),
            deriv1: Arc::new(move |x| d1(1.0 - x)),
            deriv2: Arc::new(move |x| -d2(1.0 - x)),
            deriv1_inverse: inv,
            convexity,
            label: format!("mirror({})", self.label),
        }
    }
}

fn bisection_inverse(deriv1: RealFn, convexity: Convexity) -> RealFn {
    let increasing = convexity == Convexity::StrictlyConvex;
    Arc::new(move |v| {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..INVERSE_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            let below = deriv1(mid) < v;
            if below == increasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    })
}

/// `φ₁(x) = ln(x + 1) / ln 2`.
pub fn make_phi1() -> Reparametrization {
    let l2 = std::f64::consts::LN_2;
    Reparametrization::new(
        "phi1",
        Convexity::StrictlyConcave,
        move |x: f64| x.ln_1p() / l2,
        move |x| 1.0 / ((x + 1.0) * l2),
        move |x| -1.0 / ((x + 1.0) * (x + 1.0) * l2),
        Some(Arc::new(move |v| 1.0 / (v * l2) - 1.0)),
    )
}

/// `φ₂(x) = (eˣ − 1) / (e − 1)`.
pub fn make_phi2() -> Reparametrization {
    let em1 = std::f64::consts::E - 1.0;
    Reparametrization::new(
        "phi2",
        Convexity::StrictlyConvex,
        move |x: f64| x.exp_m1() / em1,
        move |x: f64| x.exp() / em1,
        move |x: f64| x.exp() / em1,
        Some(Arc::new(move |v: f64| (v * em1).ln())),
    )
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::domain(format!("theta must be a positive number, got {theta}")));
    }
    Ok(())
}

/// `φ₃(x) = √((2θ + 1)x + θ²) − θ`.
pub fn make_phi3(theta: f64) -> Result<Reparametrization> {
    check_theta(theta)?;
    let a = 2.0 * theta + 1.0;
    let t2 = theta * theta;
    Ok(Reparametrization::new(
        format!("phi3:theta={theta}"),
        Convexity::StrictlyConcave,
        move |x: f64| a * x / ((a * x + t2).sqrt() + theta),
        move |x: f64| a / (2.0 * (a * x + t2).sqrt()),
        move |x: f64| -a * a / (4.0 * (a * x + t2).powf(1.5)),
        Some(Arc::new(move |v: f64| {
            let s = a / (2.0 * v);
            (s * s - t2) / a
        })),
    ))
}

/// `Φ_p = φ₃^{1/p}`. For `p > 1` the derivative is unbounded at `x = 0`.
pub fn make_big_phi(p: usize, theta: f64) -> Result<Reparametrization> {
    if p < 1 {
        return Err(Error::domain(format!("exponent degree must be >= 1, got {p}")));
    }
    check_theta(theta)?;
    let a = 2.0 * theta + 1.0;
    let t2 = theta * theta;
    let r = 1.0 / p as f64;
    let f = move |x: f64| a * x / ((a * x + t2).sqrt() + theta);
    let f1 = move |x: f64| a / (2.0 * (a * x + t2).sqrt());
    let f2 = move |x: f64| -a * a / (4.0 * (a * x + t2).powf(1.5));
    Ok(Reparametrization::new(
        format!("Phi:p={p},theta={theta}"),
        Convexity::StrictlyConcave,
        move |x| f(x).powf(r),
        move |x| r * f(x).powf(r - 1.0) * f1(x),
        move |x| {
            let fx = f(x);
            let d = f1(x);
            r * ((r - 1.0) * fx.powf(r - 2.0) * d * d + fx.powf(r - 1.0) * f2(x))
        },
        None,
    ))
}

/// Convex family `e^{ax+b} − e^b + (γ − a e^b)x` with `b` chosen so that `φ(1) = 1`;
/// it satisfies `φ′(0) = γ`.
pub fn make_exp_family(a: f64, gamma: f64) -> Result<Reparametrization> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    // e^a - a - 1, accurate for small a
    let q = a.exp_m1() - a;
    let b = -(q / (1.0 - gamma)).ln();
    let eb = b.exp();
    let c = gamma - a * eb;
    Ok(Reparametrization::new(
        format!("expfam:a={a},gamma={gamma}"),
        Convexity::StrictlyConvex,
        move |x: f64| eb * (a * x).exp_m1() + c * x,
        move |x: f64| a * (a * x + b).exp() + c,
        move |x: f64| a * a * (a * x + b).exp(),
        Some(Arc::new(move |v: f64| (((v - c) / a).ln() - b) / a)),
    ))
}

/// Open interval of `γ` values reachable by the concave log family.
pub fn log_family_gamma_range() -> (f64, f64) {
    (1.0 - (std::f64::consts::LN_2 - 0.5), 1.0)
}

fn log_family_gap(xs: f64) -> f64 {
    1.0 - (xs.ln_1p() - xs / (1.0 + xs))
}

/// Concave family `ln(ax + b) − ln b + (γ − a/(a + b))x` with `b = a / x*`, where
/// `x*` makes `φ(1) = 1`; it satisfies `φ′(1) = γ`.
pub fn make_log_family(a: f64, gamma: f64) -> Result<Reparametrization> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!("a must be positive, got {a}")));
    }
    let (lo_g, hi_g) = log_family_gamma_range();
    if !(gamma > lo_g && gamma < hi_g) {
        return Err(Error::domain(format!(
            "gamma = {gamma} is outside the admissible interval ({lo_g:.6}, {hi_g}) for the log family"
        )));
    }
    // log_family_gap decreases from 1 at x* = 0 to lo_g at x* = 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if log_family_gap(mid) > gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xs = 0.5 * (lo + hi);
    let b = a / xs;
    let c = gamma - a / (a + b);
    Ok(Reparametrization::new(
        format!("logfam:a={a},gamma={gamma}"),
        Convexity::StrictlyConcave,
        move |x: f64| (a * x / b).ln_1p() + c * x,
        move |x: f64| a / (a * x + b) + c,
        move |x: f64| -a * a / ((a * x + b) * (a * x + b)),
        Some(Arc::new(move |v: f64| (a / (v - c) - b) / a)),
    ))
}

/// `φ(x) = x`. Affine, so it lies outside the admissible class; used as an oracle.
pub fn make_identity() -> Reparametrization {
    Reparametrization::new("identity", Convexity::Affine, |x| x, |_| 1.0, |_| 0.0, None)
}

/// Outcome of one validation check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Probe point with the largest violation, if any probe was evaluated.
    pub worst_point: Option<f64>,
    /// Size of that violation (or the offending value).
    pub worst_value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub label: String,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.label)?;
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            write!(f, "  {status} {}: {}", c.name, c.detail)?;
            if let Some(x) = c.worst_point {
                write!(f, " (worst at x = {x:.6}, {:.3e})", c.worst_value)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

pub const DEFAULT_PROBE_POINTS: usize = 1001;

pub fn validate(phi: &Reparametrization) -> ValidationReport {
    validate_with(phi, DEFAULT_PROBE_POINTS)
}

/// Quasi-random interior points from the golden-ratio sequence.
fn scattered_points(count: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    let g = 0.618_033_988_749_894_9_f64;
    (1..=count).map(move |k| lo + (hi - lo) * (k as f64 * g).fract())
}

/// Checks the admissibility conditions on a uniform probe grid of `points` nodes.
pub fn validate_with(phi: &Reparametrization, points: usize) -> ValidationReport {
    let points = points.max(2);
    let grid: Vec<f64> = (0..points).map(|i| i as f64 / (points - 1) as f64).collect();
    let mut checks = Vec::new();

    let e0 = phi.value(0.0).abs();
    let e1 = (phi.value(1.0) - 1.0).abs();
    let (wp, wv) = if e0 >= e1 { (0.0, e0) } else { (1.0, e1) };
    checks.push(Check {
        name: "endpoints",
        passed: e0 < 1e-12 && e1 < 1e-12,
        worst_point: Some(wp),
        worst_value: wv,
        detail: format!("phi(0) = {:.3e}, phi(1) = {:.15}", phi.value(0.0), phi.value(1.0)),
    });

    let mut worst: Option<(f64, f64)> = None;
    for &x in &grid {
        let d = phi.deriv1(x);
        if !(d > 0.0) && worst.map_or(true, |(_, w)| d < w) {
            worst = Some((x, d));
        }
    }
    checks.push(Check {
        name: "positive-derivative",
        passed: worst.is_none(),
        worst_point: worst.map(|w| w.0),
        worst_value: worst.map_or(0.0, |w| w.1),
        detail: match worst {
            None => "phi' > 0 on the probe grid".into(),
            Some(_) => "phi' is not positive everywhere".into(),
        },
    });

    let mut worst: Option<(f64, f64)> = None;
    for &x in &grid {
        let d = phi.deriv1(x);
        if !d.is_finite() {
            worst = Some((x, d));
            break;
        }
    }
    checks.push(Check {
        name: "finite-derivative",
        passed: worst.is_none(),
        worst_point: worst.map(|w| w.0),
        worst_value: worst.map_or(0.0, |w| w.1),
        detail: match worst {
            None => "phi' is finite on the probe grid".into(),
            Some(_) => "phi' is unbounded".into(),
        },
    });

    let convexity_check = match phi.convexity() {
        Convexity::Affine => Check {
            name: "convexity",
            passed: false,
            worst_point: None,
            worst_value: 0.0,
            detail: "affine: phi'' = 0, outside the admissible class".into(),
        },
        c => {
            let want = if c == Convexity::StrictlyConvex { 1.0 } else { -1.0 };
            let mut worst: Option<(f64, f64)> = None;
            for &x in &grid {
                let d2 = phi.deriv2(x);
                if !(d2 * want > 0.0) {
                    worst = Some((x, d2));
                    break;
                }
            }
            Check {
                name: "convexity",
                passed: worst.is_none(),
                worst_point: worst.map(|w| w.0),
                worst_value: worst.map_or(0.0, |w| w.1),
                detail: match worst {
                    None => format!("{c}: phi'' has constant sign"),
                    Some(_) => format!("declared {c} but phi'' changes sign"),
                },
            }
        }
    };
    checks.push(convexity_check);

    let mut worst = (0.0, 0.0);
    for x in scattered_points(100, 0.01, 0.99) {
        let h = 1e-6;
        let fd1 = (phi.value(x + h) - phi.value(x - h)) / (2.0 * h);
        let fd2 = (phi.deriv1(x + h) - phi.deriv1(x - h)) / (2.0 * h);
        let e1 = (fd1 - phi.deriv1(x)).abs() / phi.deriv1(x).abs().max(1.0);
        let e2 = (fd2 - phi.deriv2(x)).abs() / phi.deriv2(x).abs().max(1.0);
        let e = e1.max(e2);
        if !(e <= worst.1) {
            worst = (x, e);
        }
    }
    checks.push(Check {
        name: "derivative-consistency",
        passed: worst.1 < 1e-5,
        worst_point: Some(worst.0),
        worst_value: worst.1,
        detail: "phi', phi'' against central differences".into(),
    });

    if phi.has_deriv1_inverse() {
        let mut worst = (0.0, 0.0);
        for x in scattered_points(100, 0.0, 1.0) {
            let e = match phi.deriv1_inverse(phi.deriv1(x)) {
                Ok(y) => (y - x).abs(),
                Err(_) => f64::INFINITY,
            };
            if !(e <= worst.1) {
                worst = (x, e);
            }
        }
        checks.push(Check {
            name: "inverse-round-trip",
            passed: worst.1 < 1e-10,
            worst_point: Some(worst.0),
            worst_value: worst.1,
            detail: "(phi')^-1(phi'(x)) = x".into(),
        });
    }

    ValidationReport {
        label: phi.label().to_string(),
        checks,
    }
}

/// Parses `name[:key=value,...]`, e.g. `phi3:theta=0.01` or `expfam:a=1,gamma=0.5`.
pub fn parse_phi(spec: &str) -> Result<Reparametrization> {
    let spec = spec.trim();
    let (name, rest) = match spec.split_once(':') {
        Some((n, r)) => (n.trim(), r.trim()),
        None => (spec, ""),
    };
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    if !rest.is_empty() {
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value in '{item}'")))?;
            let k = k.trim();
            if pairs.iter().any(|(seen, _)| *seen == k) {
                return Err(Error::Parse(format!("duplicate key '{k}' in '{spec}'")));
            }
            pairs.push((k, v.trim()));
        }
    }
    let allowed: &[&str] = match name {
        "phi1" | "phi2" | "identity" => &[],
        "phi3" => &["theta"],
        "Phi" => &["p", "theta"],
        "expfam" | "logfam" => &["a", "gamma"],
        _ => return Err(Error::Parse(format!("unknown reparametrization '{name}'"))),
    };
    if let Some((k, _)) = pairs.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(Error::Parse(format!("unknown key '{k}' for '{name}'")));
    }
    let real = |key: &str| -> Result<f64> {
        let (_, v) = pairs
            .iter()
            .find(|(k, _)| *k == key)
            .ok_or_else(|| Error::Parse(format!("missing key '{key}' for '{name}'")))?;
        v.parse::<f64>()
            .map_err(|_| Error::Parse(format!("'{v}' is not a number (key '{key}')")))
    };
    match name {
        "phi1" => Ok(make_phi1()),
        "phi2" => Ok(make_phi2()),
        "identity" => Ok(make_identity()),
        "phi3" => make_phi3(real("theta")?),
        "Phi" => {
            let (_, v) = pairs
                .iter()
                .find(|(k, _)| *k == "p")
                .ok_or_else(|| Error::Parse("missing key 'p' for 'Phi'".into()))?;
            let p = v
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("'{v}' is not a non-negative integer (key 'p')")))?;
            make_big_phi(p, real("theta")?)
        }
        "expfam" => make_exp_family(real("a")?, real("gamma")?),
        "logfam" => make_log_family(real("a")?, real("gamma")?),
        _ => unreachable!(),
    }
}
