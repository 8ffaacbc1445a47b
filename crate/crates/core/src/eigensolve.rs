//! Symmetric-definite generalized eigenproblem `K u = λ M u`.
//!
//! `M = L Lᵀ` (banded Cholesky), then the dense standard problem for
//! `L⁻¹ K L⁻ᵀ` by Householder tridiagonalization and implicit QL.

use crate::assembly::{assemble_mass, assemble_stiffness, QuadratureConfig, SymmetricBandedMatrix};
use crate::error::{Error, Result};
use crate::reparam::Reparametrization;

const MAX_QL_ITERATIONS: usize = 30;

/// Eigenvalues of the pencil `(K, M)` in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub p: usize,
    pub n: usize,
    pub phi_label: String,
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[k]` belongs to `eigenvalues[k]`; columns are M-orthonormal.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `λ_k / n²`.
    pub fn normalized(&self) -> Vec<f64> {
        let n2 = (self.n * self.n) as f64;
        self.eigenvalues.iter().map(|l| l / n2).collect()
    }

    /// `√(λ_k / n²)`, the quantities compared with the rearranged symbol.
    pub fn sqrt_normalized(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.eigenvalues.iter().map(|l| l.max(0.0).sqrt() / n).collect()
    }
}

/// Lower Cholesky factor stored by rows: `l[i * (bw + 1) + d] = L[i][i - d]`.
struct BandCholesky {
    order: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    fn factor(m: &SymmetricBandedMatrix) -> Result<Self> {
        let n = m.order();
        let bw = m.bandwidth();
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let mut s = m.get(i, j);
                let klo = lo.max(j.saturating_sub(bw));
                for k in klo..j {
                    s -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if j == i {
                    if !(s > 0.0) {
                        return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                    }
                    l[i * w] = s.sqrt();
                } else {
                    l[i * w + (i - j)] = s / l[j * w];
                }
            }
        }
        Ok(BandCholesky { order: n, bw, l })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + (i - j)]
    }

    /// Solves `L x = b` in place.
    fn solve_lower(&self, b: &mut [f64]) {
        for i in 0..self.order {
            let mut s = b[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.at(i, k) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }

    /// Solves `Lᵀ x = b` in place.
    fn solve_upper(&self, b: &mut [f64]) {
        for i in (0..self.order).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + 1 + self.bw).min(self.order) {
                s -= self.at(k, i) * b[k];
            }
            b[i] = s / self.at(i, i);
        }
    }
}

/// Eigenvalues (and optionally M-orthonormal eigenvectors) of `K u = λ M u`.
///
/// The returned `Spectrum` has `p` set to the bandwidth and `n = N - p + 2`,
/// matching matrices produced by the assembly routines; `phi_label` is empty.
pub fn generalized_eig(
    k: &SymmetricBandedMatrix,
    m: &SymmetricBandedMatrix,
    want_vectors: bool,
) -> Result<Spectrum> {
    if k.order() != m.order() {
        return Err(Error::domain(format!(
            "pencil order mismatch: K is {}, M is {}",
            k.order(),
            m.order()
        )));
    }
    let n = k.order();
    let chol = BandCholesky::factor(m)?;
    let bw = k.bandwidth();

    // Row c of `a` is L⁻¹ K e_c; as a row-major matrix that is (L⁻¹ K)ᵀ = K L⁻ᵀ.
    let mut a: Vec<Vec<f64>> = Vec::with_capacity(n);
    for c in 0..n {
        let mut col = vec![0.0; n];
        for r in c.saturating_sub(bw)..(c + bw + 1).min(n) {
            col[r] = k.get(r, c);
        }
        chol.solve_lower(&mut col);
        a.push(col);
    }
    // Row-oriented forward substitution: a ← L⁻¹ a = L⁻¹ K L⁻ᵀ.
    for i in 0..n {
        let (done, rest) = a.split_at_mut(i);
        let row = &mut rest[0];
        for kk in i.saturating_sub(chol.bw)..i {
            let lik = chol.at(i, kk);
            for (x, y) in row.iter_mut().zip(&done[kk]) {
                *x -= lik * y;
            }
        }
        let inv = 1.0 / chol.at(i, i);
        row.iter_mut().for_each(|x| *x *= inv);
    }
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }

    let (values, vectors) = symmetric_eig(a, want_vectors)?;
    let vectors = vectors.map(|mut vs| {
        for v in vs.iter_mut() {
            chol.solve_upper(v);
        }
        vs
    });
    let p = m.bandwidth();
    Ok(Spectrum {
        p,
        n: (n + 2).saturating_sub(p),
        phi_label: String::new(),
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// Assembles the pencil for `(φ, p, n)` and solves it.
pub fn solve_reparametrized(
    phi: &Reparametrization,
    p: usize,
    n: usize,
    quad: &QuadratureConfig,
    want_vectors: bool,
) -> Result<Spectrum> {
    let m = assemble_mass(phi, p, n, quad)?;
    let k = assemble_stiffness(phi, p, n, quad)?;
    let mut s = generalized_eig(&k, &m, want_vectors)?;
    s.p = p;
    s.n = n;
    s.phi_label = phi.label().to_string();
    Ok(s)
}

/// Dense symmetric eigenproblem. `a` holds the full symmetric matrix by rows.
/// Returns ascending eigenvalues and, if requested, the orthonormal eigenvectors
/// as rows.
pub fn symmetric_eig(mut a: Vec<Vec<f64>>, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let n = a.len();
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(Vec::new)));
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut a, &mut d, &mut e, want_vectors);
    let mut z = if want_vectors { Some(a) } else { None };
    tridiagonal_ql(&mut d, &mut e, z.as_deref_mut())?;

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = idx.iter().map(|&i| d[i]).collect();
    let vectors = z.map(|rows| {
        let mut rows: Vec<Option<Vec<f64>>> = rows.into_iter().map(Some).collect();
        idx.iter().map(|&i| rows[i].take().unwrap()).collect()
    });
    Ok((values, vectors))
}

/// Householder reduction to tridiagonal form. Works on the transpose of the
/// classical column-oriented scheme so that inner loops run along rows.
/// On return `d` is the diagonal, `e[1..]` the subdiagonal, and (when
/// `accumulate`) row `j` of `a` holds column `j` of the orthogonal transform.
fn tridiagonalize(a: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let n = a.len();
    for j in 0..n {
        d[j] = a[j][n - 1];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = a[j][i - 1];
                a[j][i] = 0.0;
                a[i][j] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].iter_mut().for_each(|x| *x = 0.0);
            for j in 0..i {
                let f = d[j];
                a[i][j] = f;
                let row = &a[j];
                let mut g = e[j] + row[j] * f;
                for k in (j + 1)..i {
                    g += row[k] * d[k];
                    e[k] += row[k] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let row = &mut a[j];
                for k in j..i {
                    row[k] -= f * e[k] + g * d[k];
                }
                d[j] = row[i - 1];
                row[i] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            a[i][n - 1] = a[i][i];
            a[i][i] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = a[i + 1][k] / h;
                }
                for j in 0..=i {
                    let (lo, hi) = a.split_at_mut(i + 1);
                    let src = &hi[0];
                    let dst = &mut lo[j];
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += src[k] * dst[k];
                    }
                    for k in 0..=i {
                        dst[k] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                a[i + 1][k] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = a[j][n - 1];
            a[j][n - 1] = 0.0;
        }
        a[n - 1][n - 1] = 1.0;
    } else {
        for j in 0..n {
            d[j] = a[j][j];
        }
    }
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`; rotations are applied to the rows of `z`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [Vec<f64>]>) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence {
                        what: format!("QL iteration for eigenvalue {l}"),
                        iterations: MAX_QL_ITERATIONS,
                    });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut(i + 1);
                        let zi = &mut lo[i];
                        let zi1 = &mut hi[0];
                        for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
