use num_complex::Complex64;

use crate::linalg::{self, CMatrix};
use crate::qlattice::{check_q, LatticeError, QPoint};

/// An element of the truncated fiber algebra `c_0-(+)_{n <= N_max} B(C^n)`:
/// one complex `n x n` matrix per block.
///
/// Blocks beyond `n_max` are zero. Sums and products of operators with
/// different `n_max` are taken with zero padding.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    q: f64,
    blocks: Vec<CMatrix>,
}

impl BlockOperator {
    pub fn zeros(q: f64, n_max: usize) -> Self {
        Self {
            q,
            blocks: (1..=n_max).map(|n| CMatrix::zeros(n, n)).collect(),
        }
    }

    /// Unit of the truncated algebra: identity in every block `n <= n_max`.
    pub fn identity(q: f64, n_max: usize) -> Self {
        Self {
            q,
            blocks: (1..=n_max).map(linalg::identity).collect(),
        }
    }

    /// Builds from explicit blocks; block `i` must be `(i+1) x (i+1)`.
    pub fn from_blocks(q: f64, blocks: Vec<CMatrix>) -> Self {
        for (i, b) in blocks.iter().enumerate() {
            assert_eq!(b.shape(), (i + 1, i + 1), "block {} has wrong shape", i + 1);
        }
        Self { q, blocks }
    }

    /// The matrix unit `e_{k,l}^{(n)}`.
    pub fn matrix_unit(q: f64, n_max: usize, n: usize, k: usize, l: usize) -> Self {
        assert!(n >= 1 && n <= n_max && k < n && l < n);
        let mut x = Self::zeros(q, n_max);
        x.blocks[n - 1][(k, l)] = Complex64::new(1.0, 0.0);
        x
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len()
    }

    /// Block `n` (1-based), or `None` beyond the truncation.
    pub fn block(&self, n: usize) -> Option<&CMatrix> {
        if n == 0 {
            None
        } else {
            self.blocks.get(n - 1)
        }
    }

    pub fn block_mut(&mut self, n: usize) -> Option<&mut CMatrix> {
        if n == 0 {
            None
        } else {
            self.blocks.get_mut(n - 1)
        }
    }

    /// Block `n`, or a zero matrix when `n > n_max`.
    pub fn block_or_zero(&self, n: usize) -> CMatrix {
        self.block(n).cloned().unwrap_or_else(|| CMatrix::zeros(n, n))
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    /// Largest block index carrying a nonzero entry.
    pub fn support_bound(&self) -> usize {
        self.blocks
            .iter()
            .rposition(|b| b.iter().any(|z| z.norm() != 0.0))
            .map_or(0, |i| i + 1)
    }

    /// Same element with `n_max` changed; extra blocks are zero, dropped
    /// blocks are discarded.
    pub fn resized(&self, n_max: usize) -> Self {
        Self {
            q: self.q,
            blocks: (1..=n_max).map(|n| self.block_or_zero(n)).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            q: self.q,
            blocks: self.blocks.iter().map(|b| b.adjoint()).collect(),
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Self {
        assert_same_q(self.q, other.q);
        let n_max = self.n_max().max(other.n_max());
        Self {
            q: self.q,
            blocks: (1..=n_max)
                .map(|n| f(&self.block_or_zero(n), &other.block_or_zero(n)))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            q: self.q,
            blocks: self.blocks.iter().map(|b| b * s).collect(),
        }
    }

    /// Commutator `[x, y] = xy - yx`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Diagonal part: the conditional expectation onto the diagonal algebra.
    pub fn diagonal_part(&self) -> Self {
        Self {
            q: self.q,
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let mut d = CMatrix::zeros(b.nrows(), b.ncols());
                    for i in 0..b.nrows() {
                        d[(i, i)] = b[(i, i)];
                    }
                    d
                })
                .collect(),
        }
    }

    /// Inverse, block by block; `None` if a block is singular.
    pub fn try_inverse(&self) -> Option<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.clone().try_inverse())
            .collect::<Option<Vec<_>>>()?;
        Some(Self { q: self.q, blocks })
    }

    /// Operator norm: the maximum over blocks of the largest singular value.
    pub fn norm(&self) -> f64 {
        operator_norm(self)
    }

    /// Maximum over blocks of the entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().fold(0.0, |acc, b| acc.max(linalg::max_abs(b)))
    }
}

pub(crate) fn assert_same_q(a: f64, b: f64) {
    assert!(
        (a - b).abs() <= 1e-15 * a.abs().max(1.0),
        "operators live over different fibers: q = {a} vs q = {b}"
    );
}

/// `sup` over blocks of the spectral norm; exact for support-bounded
/// elements.
pub fn operator_norm(x: &BlockOperator) -> f64 {
    x.blocks
        .iter()
        .map(linalg::spectral_norm)
        .fold(0.0, f64::max)
}

/// Diagonal representation of a lattice function: block `n` carries
/// `f(n, k)` at position `(k, k)`.
pub fn rep_diag(
    f: impl Fn(&QPoint) -> Complex64,
    q: f64,
    n_max: usize,
) -> Result<BlockOperator, LatticeError> {
    check_q(q)?;
    let blocks = (1..=n_max)
        .map(|n| {
            let mut b = CMatrix::zeros(n, n);
            for k in 0..n {
                b[(k, k)] = f(&QPoint::new_unchecked(q, n as u32, k as u32));
            }
            b
        })
        .collect();
    Ok(BlockOperator { q, blocks })
}

/// The shift `S: e_k^(n) -> e_{k+1}^(n)`, killing the top rung `k = n-1`.
pub fn shift_s(q: f64, n_max: usize) -> Result<BlockOperator, LatticeError> {
    check_q(q)?;
    let blocks = (1..=n_max)
        .map(|n| {
            let mut b = CMatrix::zeros(n, n);
            for k in 0..n.saturating_sub(1) {
                b[(k + 1, k)] = Complex64::new(1.0, 0.0);
            }
            b
        })
        .collect();
    Ok(BlockOperator { q, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn rep_diag_examples() {
        let one = rep_diag(|_| c(1.0), 0.5, 3).unwrap();
        assert_eq!(one, BlockOperator::identity(0.5, 3));

        let dirac = rep_diag(|p| c(if (p.n(), p.k()) == (2, 0) { 1.0 } else { 0.0 }), 0.5, 3).unwrap();
        assert_eq!(dirac, BlockOperator::matrix_unit(0.5, 3, 2, 0, 0));

        let a = rep_diag(|p| c(p.a()), 0.5, 2).unwrap();
        assert!((a.block(1).unwrap()[(0, 0)].re - 1.0).abs() < 1e-15);
        let b2 = a.block(2).unwrap();
        assert!((b2[(0, 0)].re - 2f64.sqrt()).abs() < 1e-15);
        assert!((b2[(1, 1)].re - 2f64.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(b2[(0, 1)], c(0.0));
    }

    #[test]
    fn shift_examples() {
        let s1 = shift_s(0.5, 1).unwrap();
        assert_eq!(s1.block(1).unwrap()[(0, 0)], c(0.0));
        let s2 = shift_s(0.5, 2).unwrap();
        let b = s2.block(2).unwrap();
        assert_eq!(b, &CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(1.0), c(0.0)]));

        // S*S plus the projection onto the top rung is the identity.
        let s = shift_s(0.7, 6).unwrap();
        let top = rep_diag(|p| c(if p.k() + 1 == p.n() { 1.0 } else { 0.0 }), 0.7, 6).unwrap();
        let lhs = s.adjoint().mul(&s).add(&top);
        assert_eq!(lhs, BlockOperator::identity(0.7, 6));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(BlockOperator::identity(0.5, 4).norm(), 1.0);
        let mut x = BlockOperator::zeros(0.5, 2);
        *x.block_mut(2).unwrap() = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(1.0), c(1.0)]);
        assert!((x.norm() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
        assert_eq!(BlockOperator::zeros(0.5, 3).norm(), 0.0);
    }

    #[test]
    fn padding_semantics() {
        let x = BlockOperator::identity(0.5, 2);
        let y = BlockOperator::identity(0.5, 4);
        let s = x.add(&y);
        assert_eq!(s.n_max(), 4);
        assert_eq!(s.block(4).unwrap()[(0, 0)], c(1.0));
        assert_eq!(s.block(1).unwrap()[(0, 0)], c(2.0));
        assert_eq!(x.mul(&y).support_bound(), 2);
        assert_eq!(x.resized(1).n_max(), 1);
    }

    #[test]
    fn conditional_expectation_is_contractive_projection() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let blocks = (1..=5)
                .map(|n| CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))))
                .collect();
            let x = BlockOperator::from_blocks(0.5, blocks);
            let e = x.diagonal_part();
            assert_eq!(e.diagonal_part(), e);
            assert!(e.norm() <= x.norm() + 1e-12);
            // Positivity: E(x* x) has nonnegative diagonal.
            let pos = x.adjoint().mul(&x).diagonal_part();
            for b in pos.blocks() {
                for i in 0..b.nrows() {
                    assert!(b[(i, i)].re >= 0.0 && b[(i, i)].im.abs() < 1e-14);
                }
            }
        }
    }
}
