//! Dense vector and symmetric-matrix primitives shared by the oracles and
//! the solver loop.
//!
//! Ambient points are flat `f64` slices. SDP instances store a full n×n
//! symmetric matrix row-major, so the Frobenius inner product coincides with
//! the plain Euclidean dot product of the flattened storage.

use alloc::vec;
use alloc::vec::Vec;
use num_traits::Float;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// y += alpha * x
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(x: &mut [f64], alpha: f64) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// out = M x for a symmetric n×n matrix stored row-major in `m`.
pub fn sym_matvec(m: &[f64], n: usize, x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(x.len(), n);
    debug_assert_eq!(out.len(), n);
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        out[i] = dot(row, x);
    }
}

pub fn trace(m: &[f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    (0..n).map(|i| m[i * n + i]).sum()
}

/// m += w * v vᵀ
pub fn rank1_update(m: &mut [f64], n: usize, w: f64, v: &[f64]) {
    debug_assert_eq!(m.len(), n * n);
    debug_assert_eq!(v.len(), n);
    for i in 0..n {
        let wvi = w * v[i];
        let row = &mut m[i * n..(i + 1) * n];
        for (entry, vj) in row.iter_mut().zip(v) {
            *entry += wvi * vj;
        }
    }
}

/// Replaces `m` by its symmetric part (M + Mᵀ)/2 and returns the largest
/// entrywise asymmetry |m_ij - m_ji| seen before symmetrization.
pub fn symmetrize(m: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(m.len(), n * n);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = m[i * n + j];
            let b = m[j * n + i];
            worst = worst.max((a - b).abs());
            let avg = 0.5 * (a + b);
            m[i * n + j] = avg;
            m[j * n + i] = avg;
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("tridiagonal QL iteration failed to converge")]
    NoConvergence,
}

/// Eigendecomposition of a symmetric tridiagonal matrix by implicit QL with
/// Wilkinson shifts. `diag` has length n, `off` length n-1. Returns the
/// (unsorted) eigenvalues and the eigenvector matrix stored column-major,
/// column j belonging to eigenvalue j.
pub fn tridiag_eigen(diag: &[f64], off: &[f64]) -> Result<(Vec<f64>, Vec<f64>), LinalgError> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    debug_assert_eq!(off.len(), n - 1);
    let mut d = diag.to_vec();
    let mut e = vec![0.0f64; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = vec![0.0f64; n * n];
    for i in 0..n {
        z[i + i * n] = 1.0;
    }
    for l in 0..n {
        let mut sweeps = 0usize;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > 64 {
                return Err(LinalgError::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0f64;
            let mut c = 1.0f64;
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k + (i + 1) * n];
                    z[k + (i + 1) * n] = s * z[k + i * n] + c * f;
                    z[k + i * n] = c * z[k + i * n] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}
