use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;

use super::block::{assert_same_q, BlockOperator};
use super::FiberError;
use crate::linalg::{self, CMatrix};
use crate::qlattice::{check_q, in_domain, QPoint};

/// A finite sum `sum_k s^k f_k` in the algebraic crossed product, with each
/// `f_k` a finitely supported function on `H_q^(k)`.
///
/// Entries are keyed by `(degree, n, k)`; absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedElement {
    q: f64,
    entries: BTreeMap<(i32, u32, u32), Complex64>,
}

impl GradedElement {
    pub fn zero(q: f64) -> Result<Self, FiberError> {
        check_q(q)?;
        Ok(Self {
            q,
            entries: BTreeMap::new(),
        })
    }

    /// `value * s^degree delta_(n,k)`.
    pub fn dirac(q: f64, degree: i32, n: u32, k: u32, value: Complex64) -> Result<Self, FiberError> {
        let mut x = Self::zero(q)?;
        x.insert(degree, n, k, value)?;
        Ok(x)
    }

    /// `s^degree f` with `f` sampled on the given points; points outside
    /// `H^(degree)` are skipped.
    pub fn from_samples<'a>(
        q: f64,
        degree: i32,
        points: impl IntoIterator<Item = &'a QPoint>,
        f: impl Fn(&QPoint) -> Complex64,
    ) -> Result<Self, FiberError> {
        let mut x = Self::zero(q)?;
        for p in points {
            if in_domain(p, degree as i64) {
                x.insert(degree, p.n(), p.k(), f(p))?;
            }
        }
        Ok(x)
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Adds `value` to the degree-`degree` component at `(n, k)`.
    pub fn insert(&mut self, degree: i32, n: u32, k: u32, value: Complex64) -> Result<(), FiberError> {
        let p = QPoint::new(self.q, n, k)?;
        if !in_domain(&p, degree as i64) {
            return Err(FiberError::OutOfDomain { degree, n, k });
        }
        if value != Complex64::new(0.0, 0.0) {
            *self.entries.entry((degree, n, k)).or_default() += value;
        }
        Ok(())
    }

    pub fn get(&self, degree: i32, n: u32, k: u32) -> Complex64 {
        self.entries.get(&(degree, n, k)).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((i32, u32, u32), Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn degrees(&self) -> BTreeSet<i32> {
        self.entries.keys().map(|k| k.0).collect()
    }

    /// Largest block index in the support (0 for the zero element).
    pub fn max_block(&self) -> u32 {
        self.entries.keys().map(|k| k.1).max().unwrap_or(0)
    }

    fn from_map(q: f64, entries: BTreeMap<(i32, u32, u32), Complex64>) -> Self {
        let entries = entries
            .into_iter()
            .filter(|(_, v)| *v != Complex64::new(0.0, 0.0))
            .collect();
        Self { q, entries }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_same_q(self.q, other.q);
        let mut map = self.entries.clone();
        for (k, v) in &other.entries {
            *map.entry(*k).or_default() += v;
        }
        Self::from_map(self.q, map)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_map(self.q, self.entries.iter().map(|(k, v)| (*k, v * s)).collect())
    }

    /// `(s^k f)^* = s^-k theta^-k(conj f)`.
    pub fn star(&self) -> Self {
        let map = self
            .entries
            .iter()
            .map(|(&(deg, n, k), v)| ((-deg, n, (k as i32 + deg) as u32), v.conj()))
            .collect();
        Self::from_map(self.q, map)
    }

    /// `(s^k f)(s^l g) = s^(k+l) theta^l(f theta^-l(g))`, evaluated pointwise:
    /// the product is supported on `p` with value `f(theta^l p) g(p)`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_same_q(self.q, other.q);
        let left_degrees = self.degrees();
        let mut map: BTreeMap<(i32, u32, u32), Complex64> = BTreeMap::new();
        for (&(l, n, j), g) in &other.entries {
            let shifted = j as i64 + l as i64;
            if shifted < 0 || shifted >= n as i64 {
                continue;
            }
            for &k in &left_degrees {
                if let Some(f) = self.entries.get(&(k, n, shifted as u32)) {
                    debug_assert!(in_domain(&QPoint::new_unchecked(self.q, n, j), (k + l) as i64));
                    *map.entry((k + l, n, j)).or_default() += f * g;
                }
            }
        }
        Self::from_map(self.q, map)
    }

    /// Dual circle action: multiplies the degree-`k` component by `z^k`.
    pub fn dual_action(&self, z: Complex64) -> Self {
        let map = self
            .entries
            .iter()
            .map(|(&(deg, n, k), v)| ((deg, n, k), v * z.powi(deg)))
            .collect();
        Self::from_map(self.q, map)
    }

    /// Conditional expectation: the degree-0 component.
    pub fn cond_expectation(&self) -> Self {
        Self::from_map(
            self.q,
            self.entries
                .iter()
                .filter(|(k, _)| k.0 == 0)
                .map(|(k, v)| (*k, *v))
                .collect(),
        )
    }

    /// Maximum modulus of the difference of lattice values.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .entries
            .values()
            .fold(0.0, |acc, v| acc.max(v.norm()))
    }
}

/// Block-matrix image `sum_k S^k rep_diag(f_k)`.
pub fn rep_graded(x: &GradedElement, n_max: usize) -> Result<BlockOperator, FiberError> {
    let bound = x.max_block() as usize;
    if bound > n_max {
        return Err(FiberError::Truncation { block: bound, n_max });
    }
    let mut out = BlockOperator::zeros(x.q, n_max);
    for ((deg, n, k), v) in x.entries() {
        let b = out.block_mut(n as usize).expect("block within bound");
        b[((k as i32 + deg) as usize, k as usize)] += v;
    }
    Ok(out)
}

/// Operator norm of the block image of `x` without materializing full
/// blocks: each block is restricted to the window of indices it touches.
/// Elements whose degrees lie in `{0, 1}` or `{-1, 0}` give bidiagonal
/// windows, handled in linear time; other elements fall back to a dense SVD
/// of the window.
pub fn graded_norm(x: &GradedElement) -> f64 {
    let degrees = x.degrees();
    let bidiagonal = degrees.iter().all(|d| *d == 0 || *d == 1) || degrees.iter().all(|d| *d == 0 || *d == -1);
    let mut by_block: BTreeMap<u32, Vec<(i32, u32, Complex64)>> = BTreeMap::new();
    for ((deg, n, k), v) in x.entries() {
        by_block.entry(n).or_default().push((deg, k, v));
    }
    by_block
        .values()
        .map(|entries| {
            let lo = entries.iter().map(|(d, k, _)| (*k as i32).min(*k as i32 + d)).min().unwrap();
            let hi = entries.iter().map(|(d, k, _)| (*k as i32).max(*k as i32 + d)).max().unwrap();
            let size = (hi - lo + 1) as usize;
            if bidiagonal {
                let mut diag = vec![Complex64::default(); size];
                let mut off = vec![Complex64::default(); size.saturating_sub(1)];
                for (d, k, v) in entries {
                    let i = (*k as i32 - lo) as usize;
                    match d {
                        0 => diag[i] = *v,
                        1 => off[i] = *v,
                        // (row k-1, col k) of B is (row k, col k-1) of B^T.
                        _ => off[i - 1] = *v,
                    }
                }
                linalg::bidiagonal_norm(&diag, &off)
            } else {
                let mut m = CMatrix::zeros(size, size);
                for (d, k, v) in entries {
                    m[((*k as i32 + d - lo) as usize, (*k as i32 - lo) as usize)] += v;
                }
                linalg::spectral_norm(&m)
            }
        })
        .fold(0.0, f64::max)
}
