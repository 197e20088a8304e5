//! Comultiplication on the block model through the Clebsch-Gordan
//! decomposition `n (x) m = (+)_r r`, `r = n + m - 2c - 1`,
//! `c = 0..min(n, m) - 1`.
//!
//! Tensor indices follow `kron` order: `e_p (x) e_j` is coordinate
//! `p * m + j`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fiber::{a_block, a_inv_block, n_block, BlockOperator};
use crate::linalg::{self, c, CMatrix};
use crate::qlattice::{abs_n, check_q, LatticeError, QPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("highest-weight kernel for r = {r} in {n} (x) {m} is not one-dimensional (singular values {singular_values:?})")]
    Decomposition {
        n: usize,
        m: usize,
        r: usize,
        singular_values: Vec<f64>,
    },
    #[error("operator has no block {r} (truncated at {n_max})")]
    BlockMissing { r: usize, n_max: usize },
}

/// `Delta(A)`, `Delta(N)` and `Delta(Omega)` on `C^n (x) C^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaGenerators {
    pub a: CMatrix,
    pub n: CMatrix,
    pub omega: CMatrix,
}

/// `Delta A = A (x) A`, `Delta N = A (x) N + N (x) A^-1`,
/// `Delta Omega = (Delta N)^* Delta N + q (Delta A)^2 + q^-1 (Delta A)^-2`.
pub fn delta_generators(q: f64, n: usize, m: usize) -> Result<DeltaGenerators, LatticeError> {
    check_q(q)?;
    let da = linalg::kron(&a_block(q, n), &a_block(q, m));
    let da_inv = linalg::kron(&a_inv_block(q, n), &a_inv_block(q, m));
    let dn = linalg::kron(&a_block(q, n), &n_block(q, m)) + linalg::kron(&n_block(q, n), &a_inv_block(q, m));
    let omega = dn.adjoint() * &dn + &da * &da * c(q) + &da_inv * &da_inv * c(1.0 / q);
    Ok(DeltaGenerators { a: da, n: dn, omega })
}

/// One irreducible summand of `n (x) m`.
#[derive(Debug, Clone, PartialEq)]
pub struct CgCopy {
    /// Position in the fusion list, `r = n + m - 2 copy - 1`.
    pub copy: usize,
    pub r: usize,
    /// `ladder[l]` is the unit vector `xi_(r,l)`.
    pub ladder: Vec<DVector<Complex64>>,
}

impl CgCopy {
    /// `n m x r` matrix whose columns are the ladder vectors.
    pub fn isometry(&self) -> CMatrix {
        CMatrix::from_columns(&self.ladder)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgDecomposition {
    pub q: f64,
    pub n: usize,
    pub m: usize,
    pub copies: Vec<CgCopy>,
}

impl CgDecomposition {
    /// `[n + m - 1, n + m - 3, ..., |n - m| + 1]`.
    pub fn fusion_list(&self) -> Vec<usize> {
        self.copies.iter().map(|c| c.r).collect()
    }

    pub fn copy_of(&self, r: usize) -> Option<&CgCopy> {
        self.copies.iter().find(|c| c.r == r)
    }

    /// Unitary with the ladders of all copies as columns, copies in fusion
    /// order.
    pub fn unitary(&self) -> CMatrix {
        let cols: Vec<DVector<Complex64>> = self.copies.iter().flat_map(|c| c.ladder.iter().cloned()).collect();
        CMatrix::from_columns(&cols)
    }

    /// `f_(r,l)(p)`: the coefficient of `e_p (x) e_(l + copy - p)` in
    /// `xi_(r,l)`, or `None` outside the weight space.
    pub fn coefficient(&self, r: usize, l: usize, p: usize) -> Option<Complex64> {
        let cp = self.copy_of(r)?;
        let j = (l + cp.copy).checked_sub(p)?;
        if p >= self.n || j >= self.m || l >= r {
            return None;
        }
        Some(cp.ladder[l][p * self.m + j])
    }
}

/// Fusion list of `n (x) m`.
pub fn fusion_rule(n: usize, m: usize) -> Vec<usize> {
    (0..n.min(m)).map(|c| n + m - 2 * c - 1).collect()
}

/// Coordinates `p * m + j` of the weight space `p + j = s`.
fn weight_space(n: usize, m: usize, s: usize) -> Vec<(usize, usize)> {
    (0..n)
        .filter_map(|p| s.checked_sub(p).filter(|j| *j < m).map(|j| (p, j)))
        .collect()
}

const KERNEL_REL_TOL: f64 = 1e-9;
const KERNEL_MARGIN: f64 = 1e3;

/// Clebsch-Gordan vectors by highest-weight kernels and lowering.
///
/// For copy `c`, the top vector spans the kernel of `Delta N` restricted to
/// the weight space `p + j = n + m - c - 2`; it is normalized, its phase is
/// fixed by making the lowest-`p` nonzero coefficient real positive, and the
/// ladder follows from `xi_(r,l-1) = (Delta N)^* xi_(r,l) / |N|(r, l-1)`
/// without renormalizing. The lower half of each ladder is computed by the
/// equivalent raising `xi_(r,l+1) = Delta N xi_(r,l) / |N|(r, l)` from the
/// lowest-weight vector, which keeps the small coefficients accurate at
/// small `q`.
pub fn cg_decompose(q: f64, n: usize, m: usize) -> Result<CgDecomposition, FusionError> {
    check_q(q)?;
    assert!(n >= 1 && m >= 1, "blocks are 1-based");
    let dg = delta_generators(q, n, m)?;
    let dn_adj = dg.n.adjoint();
    let mut copies = Vec::with_capacity(n.min(m));
    for (copy, r) in fusion_rule(n, m).into_iter().enumerate() {
        let s = n + m - copy - 2;
        let src = weight_space(n, m, s);
        let kernel = kernel_vector(&restrict(&dg.n, m, &src, &weight_space(n, m, s + 1))).map_err(|singular_values| {
            FusionError::Decomposition {
                n,
                m,
                r,
                singular_values,
            }
        })?;
        let top = fix_phase(embed(&kernel, &src, n, m).normalize(), &src, m);
        let rung = |l: usize| abs_n(&QPoint::new_unchecked(q, r as u32, l as u32));

        // Upper half by lowering from the top.
        let half = r / 2;
        let mut ladder = vec![DVector::<Complex64>::zeros(n * m); r];
        ladder[r - 1] = top;
        for l in (half..r - 1).rev() {
            ladder[l] = &dn_adj * &ladder[l + 1] / c(rung(l));
        }
        // Lower half by raising from the lowest-weight vector, the kernel of
        // (Delta N)^* on the weight space `copy`, phase-matched to the
        // lowered ladder. Each direction loses accuracy far from its
        // starting point, so the two halves meet in the middle.
        if half > 0 {
            let mut lowered = ladder[half].clone();
            for l in (0..half).rev() {
                lowered = &dn_adj * &lowered / c(rung(l));
            }
            let low_src = weight_space(n, m, copy);
            let below = copy.checked_sub(1).map_or_else(Vec::new, |w| weight_space(n, m, w));
            let bottom = match kernel_by_recurrence(&restrict(&dn_adj, m, &low_src, &below)) {
                Some(k) => {
                    let b = embed(&k, &low_src, n, m);
                    let overlap = b.dotc(&lowered);
                    b * (overlap / overlap.norm())
                }
                None => lowered,
            };
            ladder[0] = bottom;
            for l in 1..half {
                ladder[l] = &dg.n * &ladder[l - 1] / c(rung(l - 1));
            }
        }
        copies.push(CgCopy { copy, r, ladder });
    }
    Ok(CgDecomposition { q, n, m, copies })
}

/// `op` restricted to the coordinates `src`, landing in `dst`; padded with
/// zero rows to at least square.
fn restrict(op: &CMatrix, m: usize, src: &[(usize, usize)], dst: &[(usize, usize)]) -> CMatrix {
    let mut out = CMatrix::zeros(src.len().max(dst.len()), src.len());
    for (col, &(p, j)) in src.iter().enumerate() {
        for (row, &(p2, j2)) in dst.iter().enumerate() {
            out[(row, col)] = op[(p2 * m + j2, p * m + j)];
        }
    }
    out
}

/// Places the weight-space coordinates of `v` into `C^n (x) C^m`.
fn embed(v: &DVector<Complex64>, support: &[(usize, usize)], n: usize, m: usize) -> DVector<Complex64> {
    let mut out = DVector::<Complex64>::zeros(n * m);
    for (i, &(p, j)) in support.iter().enumerate() {
        out[p * m + j] = v[i];
    }
    out
}

/// Unit vector spanning the kernel of `m`, or the singular values when the
/// kernel is not cleanly one-dimensional.
fn kernel_vector(m: &CMatrix) -> Result<DVector<Complex64>, Vec<f64>> {
    let d = m.ncols();
    if d == 1 {
        // A single column: its own kernel iff it vanishes.
        return if linalg::max_abs(m) == 0.0 {
            Ok(DVector::from_element(1, c(1.0)))
        } else {
            Err(vec![linalg::max_abs(m)])
        };
    }
    let svd = m.clone().svd(false, true);
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let v_t = svd.v_t.expect("requested");
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|a, b| sv[*a].total_cmp(&sv[*b]));
    let smax = sv[order[sv.len() - 1]];
    let (smin, second) = (sv[order[0]], sv[order[1]]);
    let zero_cut = KERNEL_REL_TOL * smax;
    if !(smin <= zero_cut && second > zero_cut && second >= KERNEL_MARGIN * smin) {
        return Err(sv);
    }
    let row = v_t.row(order[0]);
    let from_svd = DVector::from_iterator(d, row.iter().map(|z| z.conj()));
    Ok(kernel_by_recurrence(m).unwrap_or(from_svd))
}

/// The kernel vector solved column by column: consecutive coordinates of a
/// weight space meet in a single row of `Delta N`, so
/// `v_i = -v_(i-1) m[row, i-1] / m[row, i]`. Unlike the SVD this keeps full
/// relative accuracy when the entries span many orders of magnitude.
/// Returns `None` if a pivot vanishes or the result is not a kernel vector.
fn kernel_by_recurrence(m: &CMatrix) -> Option<DVector<Complex64>> {
    let d = m.ncols();
    let mut v = DVector::from_element(d, c(1.0));
    for i in 1..d {
        let row = (0..m.nrows()).max_by(|&a, &b| {
            let ka = m[(a, i - 1)].norm().min(m[(a, i)].norm());
            let kb = m[(b, i - 1)].norm().min(m[(b, i)].norm());
            ka.total_cmp(&kb)
        })?;
        if m[(row, i)].norm() == 0.0 || m[(row, i - 1)].norm() == 0.0 {
            return None;
        }
        v[i] = -v[i - 1] * m[(row, i - 1)] / m[(row, i)];
    }
    let v = v.normalize();
    let scale = linalg::spectral_norm(m);
    let residual = (m * &v).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    (residual <= 1e-12 * scale).then_some(v)
}

fn fix_phase(v: DVector<Complex64>, support: &[(usize, usize)], m: usize) -> DVector<Complex64> {
    let scale = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    let lead = support
        .iter()
        .map(|&(p, j)| v[p * m + j])
        .find(|z| z.norm() > 1e-12 * scale)
        .expect("nonzero vector");
    let phase = lead.conj() / lead.norm();
    v * phase
}

type CacheKey = (u64, usize, usize);

/// Shared cache of decompositions keyed by `(q, n, m)`.
#[derive(Debug, Default)]
pub struct CgCache {
    map: RwLock<HashMap<CacheKey, Arc<CgDecomposition>>>,
}

impl CgCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide cache used by [`delta_apply`] and the GNS module.
    pub fn global() -> &'static CgCache {
        static CACHE: OnceLock<CgCache> = OnceLock::new();
        CACHE.get_or_init(CgCache::new)
    }

    pub fn get(&self, q: f64, n: usize, m: usize) -> Result<Arc<CgDecomposition>, FusionError> {
        let key = (q.to_bits(), n, m);
        if let Some(hit) = self.map.read().unwrap().get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(cg_decompose(q, n, m)?);
        Ok(self.map.write().unwrap().entry(key).or_insert(fresh).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `(pi_n (x) pi_m) Delta(x) = sum_copies U_r x^(r) U_r^*`. Blocks beyond
/// the truncation of `x` count as zero.
pub fn delta_apply(x: &BlockOperator, n: usize, m: usize) -> Result<CMatrix, FusionError> {
    let cg = CgCache::global().get(x.q(), n, m)?;
    let mut out = CMatrix::zeros(n * m, n * m);
    for cp in &cg.copies {
        if let Some(b) = x.block(cp.r) {
            if linalg::max_abs(b) == 0.0 {
                continue;
            }
            let u = cp.isometry();
            out += &u * b * u.adjoint();
        }
    }
    Ok(out)
}

/// As [`delta_apply`], but missing blocks are an error.
pub fn delta_apply_checked(x: &BlockOperator, n: usize, m: usize) -> Result<CMatrix, FusionError> {
    if let Some(r) = fusion_rule(n, m).into_iter().find(|r| *r > x.n_max()) {
        return Err(FusionError::BlockMissing { r, n_max: x.n_max() });
    }
    delta_apply(x, n, m)
}

/// Residual of `(id (x) Delta)(T) = T_12 T_13` on `C^n (x) C^m`.
///
/// The left side comes from [`delta_apply`] of the generators, the right side
/// from the explicit product
/// `[[A (x) A, A (x) N + N (x) A^-1], [0, A^-1 (x) A^-1]]`. The largest
/// entrywise spectral-norm difference is returned, relative to
/// `max(1, |rhs entry|)`.
pub fn verify_t12t13(q: f64, n: usize, m: usize) -> Result<f64, FusionError> {
    check_q(q)?;
    let gen = |block: fn(f64, usize) -> CMatrix| BlockOperator::from_blocks(q, (1..n + m).map(|r| block(q, r)).collect());
    let lhs = [
        [delta_apply(&gen(a_block), n, m)?, delta_apply(&gen(n_block), n, m)?],
        [CMatrix::zeros(n * m, n * m), delta_apply(&gen(a_inv_block), n, m)?],
    ];
    let (an, am) = (a_block(q, n), a_block(q, m));
    let (ain, aim) = (a_inv_block(q, n), a_inv_block(q, m));
    let (nn, nm) = (n_block(q, n), n_block(q, m));
    // T_12 T_13 entry (i, k) = sum_j T_ij (x) T_jk.
    let t = |i: usize, j: usize, left: bool| -> CMatrix {
        let (a, ai, nn) = if left { (&an, &ain, &nn) } else { (&am, &aim, &nm) };
        match (i, j) {
            (0, 0) => a.clone(),
            (0, 1) => nn.clone(),
            (1, 0) => CMatrix::zeros(a.nrows(), a.ncols()),
            _ => ai.clone(),
        }
    };
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for k in 0..2 {
            let mut rhs = CMatrix::zeros(n * m, n * m);
            for j in 0..2 {
                rhs += linalg::kron(&t(i, j, true), &t(j, k, false));
            }
            let diff = linalg::spectral_norm(&(&lhs[i][k] - &rhs));
            worst = worst.max(diff / linalg::spectral_norm(&rhs).max(1.0));
        }
    }
    Ok(worst)
}

/// Residual of coassociativity on `C^n (x) C^m (x) C^p`:
///
/// ```text
/// (Delta (x) id) Delta(x) = (U_nm (x) 1) [(+)_r Delta_(r,p)(x)] (U_nm (x) 1)^*
/// (id (x) Delta) Delta(x) = (1 (x) U_mp) [(+)_r' Delta_(n,r')(x)] (1 (x) U_mp)^*
/// ```
///
/// relative to `max(1, |x|)`.
pub fn verify_coassociativity(x: &BlockOperator, n: usize, m: usize, p: usize) -> Result<f64, FusionError> {
    let q = x.q();
    let cache = CgCache::global();
    let dim = n * m * p;

    let nm = cache.get(q, n, m)?;
    let mut inner = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for cp in &nm.copies {
        let d = delta_apply(x, cp.r, p)?;
        inner.view_mut((offset, offset), (cp.r * p, cp.r * p)).copy_from(&d);
        offset += cp.r * p;
    }
    let u = linalg::kron(&nm.unitary(), &linalg::identity(p));
    let left = &u * inner * u.adjoint();

    let mp = cache.get(q, m, p)?;
    let mut inner = CMatrix::zeros(dim, dim);
    let mut offset = 0;
    for cp in &mp.copies {
        let r = cp.r;
        let d = delta_apply(x, n, r)?;
        for i in 0..n {
            for l in 0..r {
                for i2 in 0..n {
                    for l2 in 0..r {
                        inner[(i * m * p + offset + l, i2 * m * p + offset + l2)] = d[(i * r + l, i2 * r + l2)];
                    }
                }
            }
        }
        offset += r;
    }
    let u = linalg::kron(&linalg::identity(n), &mp.unitary());
    let right = &u * inner * u.adjoint();

    Ok(linalg::spectral_norm(&(left - right)) / x.norm().max(1.0))
}

/// Block pairs `(n, m)` on which `Delta(f)(1 (x) g)` can be nonzero, for `f`
/// supported in blocks `r` with `q^r > eps` and `g` in blocks `m <= m_max`
/// with `q^m > eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct BisimpSupport {
    pub pairs: Vec<(usize, usize)>,
    /// Every contributing `n` is below this (`2 log_q(eps)`).
    pub n_bound: f64,
}

pub fn bisimp_support(q: f64, eps: f64, m_max: usize) -> Result<BisimpSupport, LatticeError> {
    check_q(q)?;
    let n_bound = 2.0 * eps.ln() / q.ln();
    let f_blocks: Vec<usize> = (1..).take_while(|r| q.powi(*r as i32) > eps).collect();
    let g_blocks: Vec<usize> = (1..=m_max).filter(|m| q.powi(*m as i32) > eps).collect();
    let mut pairs = Vec::new();
    if let Some(&r_max) = f_blocks.last() {
        for &m in &g_blocks {
            // Some r in fusion(n, m) has r <= r_max iff |n - m| + 1 <= r_max.
            for n in 1..m + r_max {
                if n.abs_diff(m) < r_max {
                    pairs.push((n, m));
                }
            }
        }
    }
    Ok(BisimpSupport { pairs, n_bound })
}

/// Largest entry of `Delta(f)(1 (x) g)` on block pairs outside `support`,
/// scanning all `n, m <= scan`.
pub fn bisimp_outside_mass(
    f: &BlockOperator,
    g: &BlockOperator,
    support: &BisimpSupport,
    scan: usize,
) -> Result<f64, FusionError> {
    let mut worst: f64 = 0.0;
    for n in 1..=scan {
        for m in 1..=scan {
            if support.pairs.contains(&(n, m)) {
                continue;
            }
            let d = delta_apply(f, n, m)?;
            let prod = d * linalg::kron(&linalg::identity(n), &g.block_or_zero(m));
            worst = worst.max(linalg::max_abs(&prod));
        }
    }
    Ok(worst)
}

/// One row of the coefficient table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CgRow {
    pub q: f64,
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub l: usize,
    pub p: usize,
    pub real: f64,
    pub imag: f64,
}

/// All coefficients `f_(r,l)(p)` of a decomposition, in `(r desc, l, p)`
/// order.
pub fn cg_rows(cg: &CgDecomposition) -> Vec<CgRow> {
    let mut rows = Vec::new();
    for cp in &cg.copies {
        for l in 0..cp.r {
            for p in 0..cg.n {
                if let Some(z) = cg.coefficient(cp.r, l, p) {
                    rows.push(CgRow {
                        q: cg.q,
                        n: cg.n,
                        m: cg.m,
                        r: cp.r,
                        l,
                        p,
                        real: z.re,
                        imag: z.im,
                    });
                }
            }
        }
    }
    rows
}
