//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! the implicit QL iteration with Wilkinson-style shifts. Hermitian matrices
//! go through their real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`,
//! whose spectrum is that of `H` with every eigenvalue doubled.

use num_complex::Complex64;

use super::matrix::{inner, CMatrix, ZERO};
use super::LinalgError;

/// Real symmetric eigendecomposition. `vectors` is row-major with the
/// eigenvector for `values[k]` stored in column `k`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<f64>>,
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigenvalues (ascending) of the symmetric `n × n` row-major matrix `a`.
/// Only the lower triangle is read.
pub fn sym_eigvals(n: usize, a: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Ok(sym_eigen(n, a, false)?.values)
}

pub fn sym_eigen(n: usize, a: &[f64], want_vectors: bool) -> Result<SymEigen, LinalgError> {
    assert_eq!(a.len(), n * n, "symmetric eigensolver: buffer length");
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: want_vectors.then(Vec::new),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            v[i * n + j] = a[i * n + j];
            v[j * n + i] = a[i * n + j];
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(n, &mut v, &mut d, &mut e, want_vectors);
    ql_implicit(n, &mut v, &mut d, &mut e, want_vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = want_vectors.then(|| {
        let mut out = vec![0.0; n * n];
        for (new, &old) in order.iter().enumerate() {
            for r in 0..n {
                out[r * n + new] = v[r * n + old];
            }
        }
        out
    });
    Ok(SymEigen { values, vectors })
}

/// Householder reduction to tridiagonal form. On exit `d` holds the diagonal,
/// `e[1..]` the subdiagonal and, when requested, `v` the accumulated
/// orthogonal transform.
fn tridiagonalize(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    let idx = |i: usize, j: usize| i * n + j;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
                v[idx(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
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
                    v[idx(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    if accumulate {
        for i in 0..n - 1 {
            v[idx(n - 1, i)] = v[idx(i, i)];
            v[idx(i, i)] = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v[idx(k, i + 1)] / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v[idx(k, i + 1)] * v[idx(k, j)];
                    }
                    for k in 0..=i {
                        v[idx(k, j)] -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v[idx(k, i + 1)] = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v[idx(n - 1, j)];
            v[idx(n - 1, j)] = 0.0;
        }
        v[idx(n - 1, n - 1)] = 1.0;
    } else {
        // The diagonal sits in the last row of `v` whether or not the
        // transform is accumulated.
        for i in 0..n - 1 {
            v[idx(n - 1, i)] = v[idx(i, i)];
        }
        for j in 0..n {
            d[j] = v[idx(n - 1, j)];
        }
    }
    e[0] = 0.0;
}

fn ql_implicit(
    n: usize,
    v: &mut [f64],
    d: &mut [f64],
    e: &mut [f64],
    accumulate: bool,
) -> Result<(), LinalgError> {
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
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_SWEEPS_PER_EIGENVALUE {
                    return Err(LinalgError::NoConvergence { order: n });
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
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s: f64 = 0.0;
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
                    if accumulate {
                        for k in 0..n {
                            let hk = v[k * n + i + 1];
                            v[k * n + i + 1] = s * v[k * n + i] + c * hk;
                            v[k * n + i] = c * v[k * n + i] - s * hk;
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

/// Row-major real embedding `[[Re H, -Im H], [Im H, Re H]]` of a square
/// complex matrix.
pub fn real_embedding(h: &CMatrix) -> Vec<f64> {
    let n = h.rows();
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            out[i * m + j] = z.re;
            out[(i + n) * m + j + n] = z.re;
            out[(i + n) * m + j] = z.im;
            out[i * m + j + n] = -z.im;
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn herm_eigvals(h: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    let n = h.rows();
    let doubled = sym_eigvals(2 * n, &real_embedding(h))?;
    Ok(pair_up(&doubled))
}

fn pair_up(doubled: &[f64]) -> Vec<f64> {
    doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Hermitian eigendecomposition: ascending eigenvalues and a unitary whose
/// columns are the matching eigenvectors.
pub fn herm_eigh(h: &CMatrix) -> Result<(Vec<f64>, CMatrix), LinalgError> {
    let n = h.rows();
    let m = 2 * n;
    let eig = sym_eigen(m, &real_embedding(h), true)?;
    let vecs = eig.vectors.expect("requested");

    // Each real eigenvector (u; v) of the embedding is a complex eigenvector
    // u + i v of H; the pairs x and Jx collapse onto one complex direction.
    // Pivoted Gram-Schmidt keeps n independent ones.
    let mut candidates: Vec<Vec<Complex64>> = (0..m)
        .map(|k| {
            (0..n)
                .map(|r| Complex64::new(vecs[r * m + k], vecs[(r + n) * m + k]))
                .collect()
        })
        .collect();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.iter().map(|z| z.norm_sqr()).sum::<f64>()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(LinalgError::NoConvergence { order: n })?;
        let mut q = candidates.swap_remove(best);
        let norm = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            return Err(LinalgError::NoConvergence { order: n });
        }
        for z in q.iter_mut() {
            *z /= norm;
        }
        for c in candidates.iter_mut() {
            let proj = inner(&q, c);
            for (ci, qi) in c.iter_mut().zip(&q) {
                *ci -= proj * qi;
            }
        }
        basis.push(q);
    }

    let mut pairs: Vec<(f64, Vec<Complex64>)> = basis
        .into_iter()
        .map(|q| {
            let hq = h.mul_vec(&q).expect("square");
            (inner(&q, &hq).re, q)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut u = CMatrix::zeros(n, n);
    for (k, (_, q)) in pairs.iter().enumerate() {
        for r in 0..n {
            u[(r, k)] = q[r];
        }
    }
    let values = pairs.into_iter().map(|(l, _)| l).collect();
    Ok((values, u))
}

/// `U diag(values) U†`.
pub fn reconstruct(values: &[f64], u: &CMatrix) -> CMatrix {
    let n = u.rows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..values.len() {
        for i in 0..n {
            let a = u[(i, k)] * values[k];
            if a == ZERO {
                continue;
            }
            for j in 0..n {
                out[(i, j)] += a * u[(j, k)].conj();
            }
        }
    }
    out
}
