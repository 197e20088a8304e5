//! Geometry of the field: the fibers `H_q` as integer lattices, the partial
//! automorphism `theta` and its iterated domains, and the coordinate
//! functions evaluated on lattice points.
//!
//! A point of `H_q` (`0 < q < 1`) is stored by its integer indices `(n, k)`
//! with `n >= 1` and `0 <= k <= n - 1`. The real coordinates are derived on
//! demand:
//!
//! ```text
//! t = q^n,    a = q^(k + (1 - n)/2)
//! ```
//!
//! so that `t` runs over `(0, q]_q` and `a` over `[sqrt(t/q), sqrt(q/t)]_q`.
//! The shift `theta: (q, t, a) -> (q, t, q a)` becomes `k -> k + 1`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("deformation parameter q = {0} is outside (0,1); the q = 1 fiber is continuous")]
    InvalidQ(f64),
    #[error("invalid lattice index (n = {n}, k = {k}); need n >= 1 and 0 <= k <= n - 1")]
    InvalidIndex { n: u32, k: u32 },
    #[error("invalid lower cutoff t_min = {0}; need t_min > 0")]
    InvalidCutoff(f64),
}

/// Checks `0 < q < 1`.
pub fn check_q(q: f64) -> Result<(), LatticeError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(LatticeError::InvalidQ(q))
    }
}

/// A lattice point `(q; n, k)` of the fiber `H_q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QPoint {
    q: f64,
    n: u32,
    k: u32,
}

impl QPoint {
    pub fn new(q: f64, n: u32, k: u32) -> Result<Self, LatticeError> {
        check_q(q)?;
        if n == 0 || k >= n {
            return Err(LatticeError::InvalidIndex { n, k });
        }
        Ok(Self { q, n, k })
    }

    /// Construction without validation, for callers iterating known ranges.
    pub(crate) fn new_unchecked(q: f64, n: u32, k: u32) -> Self {
        debug_assert!(n >= 1 && k < n);
        Self { q, n, k }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Block index.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Position inside the block.
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn t(&self) -> f64 {
        self.q.powi(self.n as i32)
    }

    pub fn a(&self) -> f64 {
        self.a_squared().sqrt()
    }

    /// `a^2 = q^(2k + 1 - n)`, an integer power.
    pub fn a_squared(&self) -> f64 {
        self.q.powi(2 * self.k as i32 + 1 - self.n as i32)
    }

    pub fn coordinates(&self) -> CoordinateValues {
        let t = self.t();
        CoordinateValues {
            q: self.q,
            omega: t + 1.0 / t,
            a: self.a(),
            point: *self,
        }
    }
}

/// Values of the coordinate functions at a lattice point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateValues {
    pub q: f64,
    pub omega: f64,
    pub a: f64,
    point: QPoint,
}

impl CoordinateValues {
    /// Value of `|N^k|^2` at the point.
    pub fn norm_nk_sq(&self, k: u32) -> f64 {
        norm_nk_sq(&self.point, k)
    }

    /// Value of `|(N^*)^k|^2` at the point.
    pub fn norm_nstar_k_sq(&self, k: u32) -> f64 {
        norm_nstar_k_sq(&self.point, k)
    }
}

/// All points with `q^n >= t_min`, in lexicographic `(n, k)` order.
pub fn enumerate_fiber(q: f64, t_min: f64) -> Result<Vec<QPoint>, LatticeError> {
    check_q(q)?;
    if !(t_min > 0.0) {
        return Err(LatticeError::InvalidCutoff(t_min));
    }
    let mut points = Vec::new();
    let mut n = 1u32;
    while q.powi(n as i32) >= t_min {
        points.extend((0..n).map(|k| QPoint::new_unchecked(q, n, k)));
        n += 1;
    }
    Ok(points)
}

/// Largest block index `n` with `q^n >= t_min`, or 0 if there is none.
pub fn max_block_above(q: f64, t_min: f64) -> u32 {
    let mut n = 0u32;
    while q.powi(n as i32 + 1) >= t_min {
        n += 1;
    }
    n
}

/// Applies `theta^power`. Returns `None` when the image leaves the lattice.
pub fn theta(p: &QPoint, power: i64) -> Option<QPoint> {
    let k = p.k as i64 + power;
    if k < 0 || k >= p.n as i64 {
        None
    } else {
        Some(QPoint::new_unchecked(p.q, p.n, k as u32))
    }
}

/// Membership of `p` in `H^(k)`, the domain of `theta^k`.
pub fn in_domain(p: &QPoint, k: i64) -> bool {
    let idx = p.k as i64;
    let top = p.n as i64 - 1;
    match k.signum() {
        0 => true,
        1 => idx <= top - k,
        _ => idx >= -k,
    }
}

// Omega - q^(2j - n) - q^(n - 2j) at block n, written in factored form so
// that the zero at j = 0 and j = n is exact.
fn casimir_gap(q: f64, n: u32, j: i32) -> f64 {
    let n = n as i32;
    (q.powi(-n) - q.powi(n - 2 * j)) * (1.0 - q.powi(2 * j))
}

/// `prod_{l=0}^{k-1} (Omega - q^(2l+1) a^2 - q^(-2l-1) a^(-2))`.
///
/// The factor for `l` equals `Omega - q^(2j-n) - q^(n-2j)` with
/// `j = p.k + l + 1`; it vanishes for `j = n` and is strictly positive for
/// `j < n`, so the product is positive exactly on `H^(k)`.
pub fn norm_nk_sq(p: &QPoint, k: u32) -> f64 {
    (0..k as i32)
        .map(|l| casimir_gap(p.q, p.n, p.k as i32 + l + 1))
        .product()
}

/// `prod_{l=0}^{k-1} (Omega - q^(-2l-1) a^2 - q^(2l+1) a^(-2))`.
pub fn norm_nstar_k_sq(p: &QPoint, k: u32) -> f64 {
    (0..k as i32)
        .map(|l| casimir_gap(p.q, p.n, p.k as i32 - l))
        .product()
}

/// `|N|` at `p`, the nonnegative root of [`norm_nk_sq`] with `k = 1`.
pub fn abs_n(p: &QPoint) -> f64 {
    norm_nk_sq(p, 1).max(0.0).sqrt()
}

/// `|N|^2` evaluated on raw coordinates `(q, t, a)`, valid also at `q = 1`.
pub fn abs_n_sq_coords(q: f64, t: f64, a: f64) -> f64 {
    t + 1.0 / t - q * a * a - 1.0 / (q * a * a)
}
