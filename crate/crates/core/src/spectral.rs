//! Dense symmetric eigendecomposition and heat-kernel diffusion wavelets.
//!
//! The eigensolver is the classic two-phase method: Householder reduction to
//! tridiagonal form followed by implicit QL iterations with Wilkinson-style
//! shifts, accumulating the orthogonal transform as it goes. It is O(N³) and
//! deterministic, which is all the wavelet computation needs for graphs of up
//! to about a thousand nodes.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Graph, SymmetricMatrix};

/// QL iterations allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 100;

/// `M = U diag(λ) Uᵀ` with eigenvalues ascending and column `i` of `U` paired with `λ_i`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

impl EigenDecomposition {
    /// `U f(Λ) Uᵀ` for a spectral filter `f`; the result is symmetrized exactly.
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.eigenvectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        let mut out = scaled * self.eigenvectors.transpose();
        symmetrize(&mut out);
        out
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.spectral_map(|x| x)
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in j + 1..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Eigendecomposition of a real symmetric matrix.
///
/// Fails with [`Error::Numeric`] if an eigenvalue does not converge within the
/// iteration cap, or with [`Error::Input`] for non-finite entries.
pub fn symmetric_eigendecomposition(m: &SymmetricMatrix) -> Result<EigenDecomposition> {
    if !m.is_finite() {
        return Err(Error::input("matrix has non-finite entries"));
    }
    let n = m.order();
    let mut v = m.to_dense();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        tridiagonalize(&mut v, &mut d, &mut e);
        tridiagonal_ql(&mut v, &mut d, &mut e)?;
    }
    Ok(EigenDecomposition {
        eigenvalues: DVector::from_vec(d),
        eigenvectors: v,
    })
}

/// Householder reduction of the symmetric matrix held in `v` (lower triangle is
/// read) to tridiagonal form. On return `d` is the diagonal, `e[1..]` the
/// sub-diagonal and `v` the accumulated orthogonal transform.
fn tridiagonalize(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let scale: f64 = d[..i].iter().map(|x| x.abs()).sum();
        let mut h = 0.0;
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in j + 1..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate the Householder reflections
    for i in 0..n - 1 {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on the tridiagonal `(d, e)`, rotating the columns of `v` along.
/// Eigenvalues end up ascending in `d` with matching columns in `v`.
fn tridiagonal_ql(v: &mut DMatrix<f64>, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n && e[m].abs() > eps * tst1 {
            m += 1;
        }
        // e[n-1] is zero, so m < n always holds here
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::Numeric {
                        message: format!("eigenvalue {l} did not converge in {MAX_QL_ITERATIONS} QL iterations"),
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[l + 2..] {
                    *x -= h;
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
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    rotate_columns(v, i, c, s);
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

    // selection sort keeps the column swaps minimal and the order deterministic
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        for j in i + 1..n {
            if d[j] < d[k] {
                k = j;
            }
        }
        if k != i {
            d.swap(i, k);
            v.swap_columns(i, k);
        }
    }
    Ok(())
}

#[inline]
fn rotate_columns(v: &mut DMatrix<f64>, i: usize, c: f64, s: f64) {
    let n = v.nrows();
    let (left, right) = v.as_mut_slice().split_at_mut((i + 1) * n);
    let col_i = &mut left[i * n..];
    let col_next = &mut right[..n];
    for (a, b) in col_i.iter_mut().zip(col_next.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

/// Heat-kernel wavelet coefficients `Ψ = exp(-τL)`.
///
/// Column `i` describes how much heat injected across the graph arrives at node
/// `i`; entry `(j, i)` is the share coming from node `j`.
#[derive(Debug, Clone)]
pub struct WaveletMatrix {
    tau: f64,
    coefficients: DMatrix<f64>,
}

impl WaveletMatrix {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn order(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.coefficients[(j, i)]
    }

    /// The energy distribution arriving at node `i`.
    pub fn column(&self, i: usize) -> &[f64] {
        let n = self.order();
        &self.coefficients.as_slice()[i * n..(i + 1) * n]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.coefficients
    }
}

/// `Ψ = U diag(e^{-τλ_1}, …, e^{-τλ_N}) Uᵀ` for the Laplacian of `g`.
pub fn heat_wavelets(g: &Graph, tau: f64) -> Result<WaveletMatrix> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::input(format!("wavelet scale must be positive, got {tau}")));
    }
    let eig = symmetric_eigendecomposition(&g.laplacian())?;
    Ok(WaveletMatrix {
        tau,
        coefficients: eig.spectral_map(|lambda| (-tau * lambda).exp()),
    })
}

/// `exp(t·M)` by scaling and squaring a truncated Taylor series.
///
/// Shares no code with the eigensolver; it exists to cross-check [`heat_wavelets`].
pub fn matrix_exponential_oracle(m: &SymmetricMatrix, t: f64) -> DMatrix<f64> {
    let n = m.order();
    let a = m.to_dense() * t;
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let a = a * scale;

    let mut result = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=30 {
        term = &term * &a / k as f64;
        result += &term;
        if term.amax() < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}
