//! Independent oracles and property checks shared by the integration tests.
#![allow(dead_code)]

use iga_gap_core::assembly::{
    assemble_mass, assemble_mass_full, assemble_stiffness, QuadratureConfig, SymmetricBandedMatrix,
};
use iga_gap_core::bspline::{basis_eval, open_uniform_knots};
use iga_gap_core::reparam::{make_identity, make_phi1, make_phi2, make_phi3, Reparametrization};
use iga_gap_core::symbol::{EpSymbol, RearrangedSymbol};

pub const PI: f64 = std::f64::consts::PI;

/// Eigenvalues of the linear-spline pencil on the identity map:
/// `(6/h²)(1 - cos kπh)/(2 + cos kπh)`, `k = 1..n-1`.
pub fn linear_identity_eigenvalues(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (1..n)
        .map(|k| {
            let c = (k as f64 * PI * h).cos();
            6.0 / (h * h) * (1.0 - c) / (2.0 + c)
        })
        .collect()
}

/// Exhaustive scan for the minimum consecutive difference of `√values` and the
/// smallest 1-based index attaining it.
pub fn brute_force_gap(values: &[f64]) -> (f64, usize) {
    let roots: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    let gaps: Vec<f64> = (1..roots.len()).map(|k| roots[k] - roots[k - 1]).collect();
    let min = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let first = gaps.iter().position(|&g| g == min).unwrap() + 1;
    (min, first)
}

/// Number of eigenvalues of `K u = λ M u` below `sigma`, by Sylvester's law of
/// inertia on a dense `LDLᵀ` of `K - σM`.
pub fn count_below(k: &SymmetricBandedMatrix, m: &SymmetricBandedMatrix, sigma: f64) -> usize {
    let n = k.order();
    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| k.get(i, j) - sigma * m.get(i, j)).collect())
        .collect();
    let mut negatives = 0;
    for j in 0..n {
        let d = a[j][j];
        if d < 0.0 {
            negatives += 1;
        }
        for i in (j + 1)..n {
            let l = a[i][j] / d;
            if l == 0.0 {
                continue;
            }
            for c in (j + 1)..=i {
                a[i][c] -= l * a[c][j];
            }
        }
    }
    negatives
}

/// Dense Cholesky; `Err(pivot)` on the first non-positive pivot.
pub fn dense_cholesky_ok(m: &SymmetricBandedMatrix) -> Result<(), usize> {
    let n = m.order();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for c in 0..j {
                s -= l[i][c] * l[j][c];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(i);
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Ok(())
}

/// `(√e_p)⁻¹(s)` by bisection, clipped at `π`.
pub fn sqrt_e_inverse(sym: &EpSymbol, s: f64) -> f64 {
    if s * s >= sym.e(PI) {
        return PI;
    }
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sym.e(mid).sqrt() < s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `Ψ(y) = ∫₀¹ |{θ : √e_p(θ) ≤ y φ′(x)}| dx`, the same area sliced along `x`.
///
/// The integrand has a square-root kink where `y φ′(x)` reaches `√e_p(π)`; the
/// interval is split there and each side is integrated in `u` with `x = s + (t - s)u²`.
pub fn psi_by_x_slices(phi: &Reparametrization, sym: &EpSymbol, y: f64) -> f64 {
    let top = sym.e(PI).sqrt();
    let clipped = |x: f64| y * phi.deriv1(x) >= top;
    let mut pieces = vec![(0.0, 1.0)];
    if clipped(0.0) != clipped(1.0) {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if clipped(mid) == clipped(0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = 0.5 * (lo + hi);
        pieces = vec![(s, 0.0), (s, 1.0)];
    }
    let f = |x: f64| sqrt_e_inverse(sym, y * phi.deriv1(x));
    let panels = 200;
    let (nodes, weights) = gauss5();
    let mut total = 0.0;
    for (s, t) in pieces {
        let len = t - s;
        for i in 0..panels {
            let a = i as f64 / panels as f64;
            let b = (i + 1) as f64 / panels as f64;
            for (z, w) in nodes.iter().zip(&weights) {
                let u = 0.5 * (a + b) + 0.5 * (b - a) * z;
                total += 0.5 * (b - a) * w * f(s + len * u * u) * 2.0 * len.abs() * u;
            }
        }
    }
    total
}

fn gauss5() -> ([f64; 5], [f64; 5]) {
    let a = 0.538_469_310_105_683_1;
    let b = 0.906_179_845_938_664;
    let wa = 0.478_628_670_499_366_5;
    let wb = 0.236_926_885_056_189_08;
    ([-b, -a, 0.0, a, b], [wb, wa, 0.568_888_888_888_888_9, wa, wb])
}

/// The small property grid: `p ∈ {1..4}`, `n ∈ {8, 16, 32}`.
pub fn small_grid() -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for p in 1..=4 {
        for n in [8, 16, 32] {
            v.push((p, n));
        }
    }
    v
}

pub fn test_maps() -> Vec<Reparametrization> {
    vec![make_identity(), make_phi1(), make_phi2(), make_phi3(0.01).unwrap()]
}

/// Outcome of a deterministic property check: `Err` carries a description of the
/// first violation.
pub type Check = Result<(), String>;

pub fn check_partition_of_unity() -> Check {
    for (p, n) in small_grid() {
        let kv = open_uniform_knots(p, n).unwrap();
        for i in 0..=200 {
            let t = i as f64 / 200.0;
            let s: f64 = (0..kv.num_basis()).map(|j| basis_eval(&kv, j, t).unwrap()).sum();
            if (s - 1.0).abs() > 1e-13 {
                return Err(format!("p={p} n={n} t={t}: sum of basis = {s}"));
            }
        }
    }
    for p in 1..=4 {
        for phi in test_maps() {
            let m = assemble_mass_full(&phi, p, 8, &QuadratureConfig::default()).unwrap();
            let total: f64 = (0..m.order())
                .flat_map(|i| (0..m.order()).map(move |j| (i, j)))
                .map(|(i, j)| m.get(i, j))
                .sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(format!("p={p} {}: full mass sums to {total}", phi.label()));
            }
        }
    }
    Ok(())
}

fn for_each_pencil(
    mut f: impl FnMut(usize, usize, &Reparametrization, &SymmetricBandedMatrix, &SymmetricBandedMatrix) -> Check,
) -> Check {
    let q = QuadratureConfig::default();
    for (p, n) in small_grid() {
        for phi in test_maps() {
            let m = assemble_mass(&phi, p, n, &q).map_err(|e| e.to_string())?;
            let k = assemble_stiffness(&phi, p, n, &q).map_err(|e| e.to_string())?;
            f(p, n, &phi, &m, &k)?;
        }
    }
    Ok(())
}

pub fn check_band_structure() -> Check {
    for_each_pencil(|p, n, phi, m, k| {
        if m.order() != n + p - 2 || m.bandwidth() != p {
            return Err(format!("p={p} n={n}: wrong shape"));
        }
        for a in [m, k] {
            for i in 0..a.order() {
                for j in 0..a.order() {
                    if i.abs_diff(j) > p && a.get(i, j) != 0.0 {
                        return Err(format!("p={p} n={n} {}: entry ({i},{j}) outside band", phi.label()));
                    }
                    if a.get(i, j) != a.get(j, i) {
                        return Err(format!("p={p} n={n} {}: asymmetric at ({i},{j})", phi.label()));
                    }
                }
            }
        }
        Ok(())
    })
}

pub fn check_spd() -> Check {
    for_each_pencil(|p, n, phi, m, k| {
        for (name, a) in [("mass", m), ("stiffness", k)] {
            if let Err(pivot) = dense_cholesky_ok(a) {
                return Err(format!("p={p} n={n} {}: {name} not SPD at pivot {pivot}", phi.label()));
            }
        }
        Ok(())
    })
}

pub fn check_quadrature_doubling() -> Check {
    let q = QuadratureConfig::default();
    for (p, n) in small_grid() {
        for phi in test_maps() {
            let q2 = q.doubled(p);
            let pairs = [
                (assemble_mass(&phi, p, n, &q), assemble_mass(&phi, p, n, &q2)),
                (assemble_stiffness(&phi, p, n, &q), assemble_stiffness(&phi, p, n, &q2)),
            ];
            for (a, b) in pairs {
                let (a, b) = (a.map_err(|e| e.to_string())?, b.map_err(|e| e.to_string())?);
                for i in 0..a.order() {
                    for j in i.saturating_sub(p)..=i {
                        let (x, y) = (a.get(i, j), b.get(i, j));
                        if (x - y).abs() > 1e-12 * x.abs() {
                            return Err(format!(
                                "p={p} n={n} {}: entry ({i},{j}) moved from {x} to {y}",
                                phi.label()
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn check_round_trip(rs: &RearrangedSymbol, points: usize) -> Check {
    for i in 1..points {
        let x = i as f64 / points as f64;
        let y = rs.xi_sqrt(x).map_err(|e| e.to_string())?;
        let back = rs.psi(y).map_err(|e| e.to_string())?;
        if (back - PI * x).abs() > 1e-8 {
            return Err(format!("{} p={}: Ψ(√ξ({x})) = {back}", rs.phi().label(), rs.p()));
        }
    }
    let top = rs.xi_sqrt(1.0).map_err(|e| e.to_string())?;
    if (top - rs.range_max()).abs() > 1e-8 || rs.xi_sqrt(0.0).unwrap() != 0.0 {
        return Err(format!("{} p={}: endpoint values wrong", rs.phi().label(), rs.p()));
    }
    Ok(())
}

pub fn check_rearrangement_round_trip() -> Check {
    use iga_gap_core::symbol::rearrange;
    for p in 1..=4 {
        let sym = EpSymbol::new(p).unwrap();
        for phi in [make_phi1(), make_phi2(), make_phi3(0.01).unwrap()] {
            let rs = rearrange(&phi, &sym).map_err(|e| e.to_string())?;
            check_round_trip(&rs, 50)?;
        }
    }
    Ok(())
}

pub fn check_gap_oracle() -> Check {
    use iga_gap_core::eigensolve::generalized_eig;
    use iga_gap_core::spectral_analysis::{compute_gap, DEFAULT_OUTLIER_TOL};
    use iga_gap_core::symbol::rearrange;
    let mut cache = std::collections::HashMap::new();
    for_each_pencil(|p, n, phi, m, k| {
        if phi.label() == "identity" {
            return Ok(());
        }
        let rs = cache
            .entry((p, phi.label().to_string()))
            .or_insert_with(|| rearrange(phi, &EpSymbol::new(p).unwrap()).unwrap())
            .clone();
        let mut s = generalized_eig(k, m, false).map_err(|e| e.to_string())?;
        s.p = p;
        s.n = n;
        let g = compute_gap(&s, &rs, DEFAULT_OUTLIER_TOL).map_err(|e| e.to_string())?;
        let (d, m_of_n) = brute_force_gap(&s.eigenvalues);
        if g.delta != d || g.m_of_n != m_of_n {
            return Err(format!(
                "p={p} n={n} {}: gap ({}, {}) vs brute force ({d}, {m_of_n})",
                phi.label(),
                g.delta,
                g.m_of_n
            ));
        }
        if g.delta_out < g.delta {
            return Err(format!("p={p} n={n}: restricted gap below full gap"));
        }
        Ok(())
    })
}
