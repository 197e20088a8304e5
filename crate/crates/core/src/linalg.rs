//! Dense complex linear algebra helpers shared by the fiber, fusion and GNS
//! modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0f64, |acc, s| acc.max(*s))
}

/// Entrywise maximum modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag_real(values: &[f64]) -> CMatrix {
    let mut m = CMatrix::zeros(values.len(), values.len());
    for (i, v) in values.iter().enumerate() {
        m[(i, i)] = c(*v);
    }
    m
}

/// Largest eigenvalue of the real symmetric tridiagonal matrix with the given
/// diagonal and squared off-diagonal moduli, by Sturm-sequence bisection.
pub fn tridiagonal_max_eigenvalue(diag: &[f64], off_sq: &[f64]) -> f64 {
    let n = diag.len();
    if n == 0 {
        return 0.0;
    }
    debug_assert_eq!(off_sq.len() + 1, n);
    // Gershgorin interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off_sq[i - 1].sqrt() } else { 0.0 };
        let right = if i + 1 < n { off_sq[i].sqrt() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    let scale = hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE);
    // Number of eigenvalues strictly greater than x.
    let count_above = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..n {
            let prev = if i > 0 { off_sq[i - 1] / d } else { 0.0 };
            d = diag[i] - x - prev;
            if d == 0.0 {
                d = -f64::EPSILON * scale;
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * scale || mid <= lo || mid >= hi {
            break;
        }
        if count_above(mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Spectral norm of an `n x n` matrix with nonzero entries only on the
/// diagonal and one adjacent diagonal: `B e_k = d_k e_k + e_k' e_{k+1}` for
/// the lower case. Works through the tridiagonal matrix `B^* B`.
pub fn bidiagonal_norm(diag: &[Complex64], sub: &[Complex64]) -> f64 {
    let n = diag.len();
    if n == 0 {
        return 0.0;
    }
    debug_assert_eq!(sub.len() + 1, n);
    let mut t_diag = vec![0.0; n];
    let mut t_off = vec![0.0; n.saturating_sub(1)];
    for k in 0..n {
        let below = if k + 1 < n { sub[k].norm_sqr() } else { 0.0 };
        t_diag[k] = diag[k].norm_sqr() + below;
        if k + 1 < n {
            t_off[k] = (diag[k + 1].conj() * sub[k]).norm_sqr();
        }
    }
    tridiagonal_max_eigenvalue(&t_diag, &t_off).max(0.0).sqrt()
}
