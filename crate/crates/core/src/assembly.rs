//! Mass and stiffness matrices of the reparametrized Galerkin discretization on the
//! Dirichlet-interior B-spline basis `N_1, ..., N_{n+p-2}`.

use std::fmt;

use crate::bspline::{open_uniform_knots, KnotVector};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_adaptive_vec, QuadratureRule};
use crate::reparam::Reparametrization;

/// Symmetric matrix with `a[i][j] = 0` for `|i - j| > bandwidth`; only the lower band is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricBandedMatrix {
    order: usize,
    bandwidth: usize,
    // row i, offset d = i - j in 0..=bandwidth, at i * (bandwidth + 1) + d
    data: Vec<f64>,
}

impl SymmetricBandedMatrix {
    pub fn zeros(order: usize, bandwidth: usize) -> Self {
        SymmetricBandedMatrix {
            order,
            bandwidth,
            data: vec![0.0; order * (bandwidth + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if r >= self.order || r - c > self.bandwidth {
            None
        } else {
            Some(r * (self.bandwidth + 1) + (r - c))
        }
    }

    /// Entry `(i, j)`, zero outside the band. Panics if an index is out of range.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.order && j < self.order, "index ({i}, {j}) out of range");
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Sets entry `(i, j)` and its mirror. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let s = self.slot(i, j).expect("entry outside the band");
        self.data[s] += value;
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.order);
        let bw = self.bandwidth;
        let mut y = vec![0.0; self.order];
        for i in 0..self.order {
            for j in i.saturating_sub(bw)..=i {
                let a = self.data[i * (bw + 1) + (i - j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.order.saturating_sub(1));
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Plain-text form: `symband N bandwidth`, then `i j value` for each stored
    /// lower-band entry with 1-based indices.
    pub fn to_text(&self) -> String {
        self.to_string()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 || parts[0] != "symband" {
            return Err(Error::Parse(format!("bad matrix header '{header}'")));
        }
        let order: usize = parts[1]
            .parse()
            .map_err(|_| Error::Parse(format!("bad order '{}'", parts[1])))?;
        let bandwidth: usize = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("bad bandwidth '{}'", parts[2])))?;
        let mut m = SymmetricBandedMatrix::zeros(order, bandwidth);
        for line in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(Error::Parse(format!("bad matrix line '{line}'")));
            }
            let i: usize = f[0].parse().map_err(|_| Error::Parse(format!("bad row in '{line}'")))?;
            let j: usize = f[1].parse().map_err(|_| Error::Parse(format!("bad column in '{line}'")))?;
            let v: f64 = f[2].parse().map_err(|_| Error::Parse(format!("bad value in '{line}'")))?;
            if i == 0 || j == 0 || i > order || j > order || i.abs_diff(j) > bandwidth {
                return Err(Error::Parse(format!("entry ({i}, {j}) outside the band")));
            }
            m.set(i - 1, j - 1, v);
        }
        Ok(m)
    }
}

impl fmt::Display for SymmetricBandedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "symband {} {}", self.order, self.bandwidth)?;
        for i in 0..self.order {
            for j in i.saturating_sub(self.bandwidth)..=i {
                writeln!(f, "{} {} {}", i + 1, j + 1, self.get(i, j))?;
            }
        }
        Ok(())
    }
}

/// Per-span quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per span; `None` means `p + 5`.
    pub nodes: Option<usize>,
    /// Bisection stops once the refinement changes a block by less than
    /// `rel_tol` times the block's magnitude.
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            nodes: None,
            rel_tol: 1e-13,
            max_depth: 400,
        }
    }
}

impl QuadratureConfig {
    /// Same tolerances with twice the number of base nodes.
    pub fn doubled(&self, p: usize) -> Self {
        QuadratureConfig {
            nodes: Some(2 * self.nodes.unwrap_or(p + 5)),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Form {
    Mass,
    Stiffness,
}

fn check_sizes(p: usize, n: usize) -> Result<()> {
    if p < 1 {
        return Err(Error::domain(format!("degree must be >= 1, got {p}")));
    }
    if n < p + 1 {
        return Err(Error::domain(format!("need n >= p + 1 spans, got p = {p}, n = {n}")));
    }
    Ok(())
}

fn assemble(
    phi: &Reparametrization,
    p: usize,
    n: usize,
    quad: &QuadratureConfig,
    form: Form,
    interior: bool,
) -> Result<SymmetricBandedMatrix> {
    check_sizes(p, n)?;
    let kv: KnotVector = open_uniform_knots(p, n)?;
    let rule = QuadratureRule::gauss_legendre(quad.nodes.unwrap_or(p + 5))?;
    let total = kv.num_basis();
    let (order, first) = if interior { (total - 2, 1) } else { (total, 0) };
    let mut m = SymmetricBandedMatrix::zeros(order, p);
    let q = p + 1;
    let mut vals = vec![0.0; q];
    let mut ders = vec![0.0; q];
    let mut block = vec![0.0; q * q];
    let mut probe = vec![0.0; q * q];

    for s in 0..n {
        let k = p + s;
        let a = kv.knots()[k];
        let b = kv.knots()[k + 1];
        let mut integrand = |x: f64, out: &mut [f64]| {
            kv.nonzero_basis(k, x, &mut vals, &mut ders);
            let d = phi.deriv1(x);
            let (w, f) = match form {
                Form::Mass => (d, &vals),
                Form::Stiffness => (1.0 / d, &ders),
            };
            for r in 0..q {
                let wr = w * f[r];
                for c in 0..=r {
                    out[r * q + c] = wr * f[c];
                }
            }
        };
        probe.iter_mut().for_each(|v| *v = 0.0);
        for (x, wq) in rule.mapped(a, b) {
            integrand(x, &mut block);
            for (pv, bv) in probe.iter_mut().zip(&block) {
                *pv += wq * bv;
            }
        }
        let scale = probe.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = quad.rel_tol * scale.max(f64::MIN_POSITIVE);
        block.iter_mut().for_each(|v| *v = 0.0);
        let mut acc = vec![0.0; q * q];
        integrate_adaptive_vec(&rule, a, b, tol, quad.max_depth, &mut integrand, &mut acc)?;
        for r in 0..q {
            let gr = s + r;
            if gr < first || gr - first >= order {
                continue;
            }
            for c in 0..=r {
                let gc = s + c;
                if gc < first || gc - first >= order {
                    continue;
                }
                m.add(gr - first, gc - first, acc[r * q + c]);
            }
        }
    }
    Ok(m)
}

/// `M_ij = ∫₀¹ |φ′| N_i N_j dx` over the interior basis.
pub fn assemble_mass(
    phi: &Reparametrization,
    p: usize,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<SymmetricBandedMatrix> {
    assemble(phi, p, n, quad, Form::Mass, true)
}

/// `K_ij = ∫₀¹ N_i′ N_j′ / |φ′| dx` over the interior basis.
pub fn assemble_stiffness(
    phi: &Reparametrization,
    p: usize,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<SymmetricBandedMatrix> {
    assemble(phi, p, n, quad, Form::Stiffness, true)
}

/// Mass matrix over the full basis `N_0, ..., N_{n+p-1}`, boundary functions included.
pub fn assemble_mass_full(
    phi: &Reparametrization,
    p: usize,
    n: usize,
    quad: &QuadratureConfig,
) -> Result<SymmetricBandedMatrix> {
    assemble(phi, p, n, quad, Form::Mass, false)
}
