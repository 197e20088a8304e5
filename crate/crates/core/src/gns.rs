//! GNS spaces of the Haar functional and the multiplicative unitary
//! `V(x (x) y) = Delta(x)(1 (x) y)`.
//!
//! Vectors are finitely supported coefficient maps over matrix units
//! `e_(row,col)^(n)`; the inner product is the Haar functional of `x^* y`,
//! i.e. `sum w(n, col) conj(x) y`. `V` is applied leg by leg to such maps and
//! is never materialized as a matrix.
//!
//! Leg conventions on the three-fold space: `V_12` acts on legs 0 and 1,
//! `V_23` on legs 1 and 2, and `V_13` on legs 0 and 2 with leg 1 untouched
//! (the flip of factors is applied on indices).

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::fiber::BlockOperator;
use crate::fusion::{fusion_rule, CgCache, CgDecomposition, FusionError};
use crate::haar::{haar_functional, HaarWeights};
use crate::linalg::CMatrix;
use crate::qlattice::LatticeError;

/// Coordinates of one algebra element in the GNS space.
#[derive(Debug, Clone, PartialEq)]
pub struct GnsVector {
    q: f64,
    entries: BTreeMap<(u32, u32, u32), Complex64>,
}

impl GnsVector {
    pub fn zero(q: f64) -> Self {
        Self {
            q,
            entries: BTreeMap::new(),
        }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Nonzero coefficients keyed by `(n, row, col)`.
    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32, u32), Complex64)> + '_ {
        self.entries.iter().map(|(k, v)| (*k, *v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64, LatticeError> {
        let w = HaarWeights::new(self.q)?;
        Ok(self
            .entries
            .iter()
            .filter_map(|(k, x)| other.entries.get(k).map(|y| x.conj() * y * w.weight(k.0, k.2)))
            .sum())
    }

    pub fn norm_sq(&self) -> Result<f64, LatticeError> {
        Ok(self.inner(self)?.re)
    }
}

/// `Lambda(x)`: the coefficients of `x` as a GNS vector.
pub fn gns_embed(x: &BlockOperator) -> GnsVector {
    let mut entries = BTreeMap::new();
    for (i, b) in x.blocks().iter().enumerate() {
        for row in 0..b.nrows() {
            for col in 0..b.ncols() {
                let v = b[(row, col)];
                if v != Complex64::default() {
                    entries.insert((i as u32 + 1, row as u32, col as u32), v);
                }
            }
        }
    }
    GnsVector { q: x.q(), entries }
}

/// Keys `(blocks, rows, cols)` of a `D`-fold matrix unit.
pub type TensorKey<const D: usize> = ([u32; D], [u32; D], [u32; D]);

/// A finitely supported vector in the `D`-fold tensor power of the GNS
/// space, with product weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorVector<const D: usize> {
    q: f64,
    entries: BTreeMap<TensorKey<D>, Complex64>,
}

pub type TensorGnsVector = TensorVector<2>;

impl<const D: usize> TensorVector<D> {
    pub fn zero(q: f64) -> Self {
        Self {
            q,
            entries: BTreeMap::new(),
        }
    }

    /// The elementary tensor of matrix units `e_(rows[i], cols[i])^(blocks[i])`.
    pub fn unit(q: f64, key: TensorKey<D>) -> Self {
        let mut v = Self::zero(q);
        v.entries.insert(key, Complex64::new(1.0, 0.0));
        v
    }

    /// `x_0 (x) ... (x) x_(D-1)`.
    pub fn product(factors: [&GnsVector; D]) -> Self {
        let q = factors[0].q;
        let mut entries: BTreeMap<TensorKey<D>, Complex64> = BTreeMap::new();
        entries.insert(([0; D], [0; D], [0; D]), Complex64::new(1.0, 0.0));
        for (leg, f) in factors.iter().enumerate() {
            let mut next = BTreeMap::new();
            for (key, v) in &entries {
                for ((n, r, c), x) in f.entries() {
                    let mut k = *key;
                    k.0[leg] = n;
                    k.1[leg] = r;
                    k.2[leg] = c;
                    next.insert(k, v * x);
                }
            }
            entries = next;
        }
        Self { q, entries }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &TensorKey<D>) -> Complex64 {
        self.entries.get(key).copied().unwrap_or_default()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&TensorKey<D>, &Complex64)> {
        self.entries.iter()
    }

    pub fn add_to(&mut self, key: TensorKey<D>, v: Complex64) {
        *self.entries.entry(key).or_default() += v;
    }

    /// Product weight `prod_i w(blocks[i], cols[i])`.
    pub fn weight(w: &HaarWeights, key: &TensorKey<D>) -> f64 {
        (0..D).map(|i| w.weight(key.0[i], key.2[i])).product()
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64, LatticeError> {
        let w = HaarWeights::new(self.q)?;
        let (small, large, flip) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let s: Complex64 = small
            .entries
            .iter()
            .filter_map(|(k, x)| large.entries.get(k).map(|y| x.conj() * y * Self::weight(&w, k)))
            .sum();
        Ok(if flip { s.conj() } else { s })
    }

    pub fn norm(&self) -> Result<f64, LatticeError> {
        Ok(self.inner(self)?.re.max(0.0).sqrt())
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_to(*k, -v);
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            q: self.q,
            entries: self.entries.iter().map(|(k, v)| (*k, v * s)).collect(),
        }
    }
}

/// The multiplicative unitary at a fixed `q`, applied through the cached
/// Clebsch-Gordan data.
#[derive(Debug, Clone)]
pub struct MultiplicativeUnitary {
    q: f64,
    cache: &'static CgCache,
}

impl MultiplicativeUnitary {
    pub fn new(q: f64) -> Result<Self, LatticeError> {
        crate::qlattice::check_q(q)?;
        Ok(Self {
            q,
            cache: CgCache::global(),
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `V` on legs `(a, b)`: the unit `e_(ij)^(r) (x) e_(d'd)^(m)` goes to
    /// `sum_n' sum xi_i[al, be] conj(xi_j[ga, d']) e_(al,ga)^(n') (x) e_(be,d)^(m)`
    /// with `xi` the ladder of the copy of `r` in `n' (x) m`.
    pub fn apply_legs<const D: usize>(
        &self,
        w: &TensorVector<D>,
        a: usize,
        b: usize,
    ) -> Result<TensorVector<D>, FusionError> {
        assert!(a < D && b < D && a != b);
        let mut out = TensorVector::zero(self.q);
        let mut decomps: HashMap<(usize, usize), Arc<CgDecomposition>> = HashMap::new();
        for (key, v) in &w.entries {
            let (r, i, j) = (key.0[a] as usize, key.1[a] as usize, key.2[a] as usize);
            let (m, d_row, d_col) = (key.0[b] as usize, key.1[b], key.2[b]);
            for n2 in (r.abs_diff(m) + 1..r + m).step_by(2) {
                let cg = match decomps.get(&(n2, m)) {
                    Some(cg) => cg.clone(),
                    None => {
                        let cg = self.cache.get(self.q, n2, m)?;
                        decomps.insert((n2, m), cg.clone());
                        cg
                    }
                };
                let cp = cg.copy_of(r).expect("fusion rule");
                let gamma = match (j + cp.copy).checked_sub(d_row as usize) {
                    Some(g) if g < n2 => g,
                    _ => continue,
                };
                let right = cp.ladder[j][gamma * m + d_row as usize].conj() * v;
                if right == Complex64::default() {
                    continue;
                }
                let level = i + cp.copy;
                for alpha in level.saturating_sub(m - 1)..=level.min(n2 - 1) {
                    let beta = level - alpha;
                    let left = cp.ladder[i][alpha * m + beta];
                    let mut k = *key;
                    k.0[a] = n2 as u32;
                    k.1[a] = alpha as u32;
                    k.2[a] = gamma as u32;
                    k.1[b] = beta as u32;
                    k.2[b] = d_col;
                    out.add_to(k, left * right);
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, w: &TensorGnsVector) -> Result<TensorGnsVector, FusionError> {
        self.apply_legs(w, 0, 1)
    }

    /// `V^* w` for `w` in the two-fold space, by pairing against the images
    /// of every domain unit that can reach the support of `w`.
    pub fn adjoint_apply(&self, w: &TensorGnsVector) -> Result<TensorGnsVector, FusionError> {
        let weights = HaarWeights::new(self.q)?;
        let mut candidates: Vec<TensorKey<2>> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for key in w.entries.keys() {
            let (n2, m, d_col) = (key.0[0] as usize, key.0[1] as usize, key.2[1]);
            for r in fusion_rule(n2, m) {
                for i in 0..r as u32 {
                    for j in 0..r as u32 {
                        for d_row in 0..m as u32 {
                            let k = ([r as u32, m as u32], [i, d_row], [j, d_col]);
                            if seen.insert(k) {
                                candidates.push(k);
                            }
                        }
                    }
                }
            }
        }
        let mut out = TensorVector::zero(self.q);
        for k in candidates {
            let image = self.apply(&TensorVector::unit(self.q, k))?;
            let coeff = image.inner(w)?;
            if coeff != Complex64::default() {
                out.add_to(k, coeff / TensorVector::<2>::weight(&weights, &k));
            }
        }
        Ok(out)
    }
}

/// `V(Lambda(x) (x) Lambda(y)) = Lambda(Delta(x)(1 (x) y))`.
pub fn mult_unitary_apply(x: &BlockOperator, y: &BlockOperator) -> Result<TensorGnsVector, FusionError> {
    let v = MultiplicativeUnitary::new(x.q())?;
    v.apply(&TensorVector::product([&gns_embed(x), &gns_embed(y)]))
}

/// `(psi' (x) id)(w)`: the Haar functional on the first leg, leaving a
/// block operator on the second.
pub fn partial_haar(w: &TensorGnsVector, n_max: usize) -> Result<BlockOperator, LatticeError> {
    let weights = HaarWeights::new(w.q)?;
    let mut out = BlockOperator::zeros(w.q, n_max);
    for (key, v) in &w.entries {
        if key.1[0] != key.2[0] {
            continue;
        }
        let b = out
            .block_mut(key.0[1] as usize)
            .expect("second leg within n_max");
        b[(key.1[1] as usize, key.2[1] as usize)] += v * weights.weight(key.0[0], key.1[0]);
    }
    Ok(out)
}

/// `|(psi' (x) id)(Delta(f)(1 (x) g)) - psi'(f) g|`, relative to
/// `max(1, |psi'(f) g|)`.
pub fn verify_invariance(f: &BlockOperator, g: &BlockOperator) -> Result<f64, FusionError> {
    let w = mult_unitary_apply(f, g)?;
    let lhs = partial_haar(&w, g.n_max())?;
    let rhs = g.scale(haar_functional(f)?);
    Ok(lhs.sub(&rhs).norm() / rhs.norm().max(1.0))
}

/// A seed for the pentagon check: three matrix units `(block, row, col)`.
pub type Seed = [(u32, u32, u32); 3];

/// All triples of matrix units with blocks `<= block_bound`.
pub fn matrix_unit_seeds(block_bound: u32) -> Vec<Seed> {
    let units: Vec<(u32, u32, u32)> = (1..=block_bound)
        .flat_map(|n| (0..n).flat_map(move |r| (0..n).map(move |c| (n, r, c))))
        .collect();
    let mut seeds = Vec::with_capacity(units.len().pow(3));
    for &x in &units {
        for &y in &units {
            for &z in &units {
                seeds.push([x, y, z]);
            }
        }
    }
    seeds
}

fn seed_vector(q: f64, s: &Seed) -> TensorVector<3> {
    TensorVector::unit(
        q,
        ([s[0].0, s[1].0, s[2].0], [s[0].1, s[1].1, s[2].1], [s[0].2, s[1].2, s[2].2]),
    )
}

/// Which operator identity a pentagon run satisfied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PentagonOrder {
    /// `V_12 V_13 V_23 = V_23 V_12`.
    Standard,
    /// `V_23 V_13 V_12 = V_12 V_23`.
    Reversed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PentagonResult {
    pub standard: f64,
    pub reversed: f64,
}

impl PentagonResult {
    pub fn residual(&self) -> f64 {
        self.standard.min(self.reversed)
    }

    pub fn held(&self) -> PentagonOrder {
        if self.standard <= self.reversed {
            PentagonOrder::Standard
        } else {
            PentagonOrder::Reversed
        }
    }
}

/// Both pentagon words applied to every seed; residuals are
/// `|lhs - rhs| / |seed|`, maximized over seeds.
pub fn verify_pentagon(q: f64, seeds: &[Seed]) -> Result<PentagonResult, FusionError> {
    let v = MultiplicativeUnitary::new(q)?;
    let per_seed = seeds
        .par_iter()
        .map(|s| -> Result<(f64, f64), FusionError> {
            let w = seed_vector(q, s);
            let scale = w.norm()?;
            let v12 = |x: &TensorVector<3>| v.apply_legs(x, 0, 1);
            let v13 = |x: &TensorVector<3>| v.apply_legs(x, 0, 2);
            let v23 = |x: &TensorVector<3>| v.apply_legs(x, 1, 2);
            let std_l = v12(&v13(&v23(&w)?)?)?;
            let std_r = v23(&v12(&w)?)?;
            let rev_l = v23(&v13(&v12(&w)?)?)?;
            let rev_r = v12(&v23(&w)?)?;
            Ok((std_l.sub(&std_r).norm()? / scale, rev_l.sub(&rev_r).norm()? / scale))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_seed.iter().fold(
        PentagonResult {
            standard: 0.0,
            reversed: 0.0,
        },
        |acc, (s, r)| PentagonResult {
            standard: acc.standard.max(*s),
            reversed: acc.reversed.max(*r),
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitarityResult {
    /// `max |<V u, V u'> - <u, u'>| / (|u| |u'|)` over domain units.
    pub isometry: f64,
    /// `max |V V^* w - w| / |w|` over target units.
    pub coisometry: f64,
}

/// Isometry and co-isometry of `V` on the span of matrix-unit pairs with
/// blocks `<= block_bound`.
pub fn verify_unitarity(q: f64, block_bound: u32) -> Result<UnitarityResult, FusionError> {
    let v = MultiplicativeUnitary::new(q)?;
    let units: Vec<TensorKey<2>> = matrix_unit_seeds(block_bound)
        .into_iter()
        .filter(|s| s[2] == (1, 0, 0))
        .map(|s| ([s[0].0, s[1].0], [s[0].1, s[1].1], [s[0].2, s[1].2]))
        .collect();
    let basis: Vec<TensorGnsVector> = units.iter().map(|k| TensorVector::unit(q, *k)).collect();
    let images = basis.iter().map(|u| v.apply(u)).collect::<Result<Vec<_>, _>>()?;
    let norms = basis.iter().map(|u| u.norm()).collect::<Result<Vec<_>, _>>()?;
    let isometry = (0..basis.len())
        .into_par_iter()
        .map(|i| -> Result<f64, LatticeError> {
            let mut worst: f64 = 0.0;
            for j in i..basis.len() {
                let d = images[i].inner(&images[j])? - basis[i].inner(&basis[j])?;
                worst = worst.max(d.norm() / (norms[i] * norms[j]));
            }
            Ok(worst)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let coisometry = basis
        .par_iter()
        .zip(norms.par_iter())
        .map(|(w, n)| -> Result<f64, FusionError> {
            let back = v.apply(&v.adjoint_apply(w)?)?;
            Ok(back.sub(w).norm()? / n)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(UnitarityResult { isometry, coisometry })
}

/// Block pairs `(n, m)` carrying a nonzero coefficient of `w`.
pub fn block_pairs(w: &TensorGnsVector) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> = w
        .entries
        .iter()
        .filter(|(_, v)| v.norm() > 0.0)
        .map(|(k, _)| (k.0[0], k.0[1]))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Dense Gram matrix `<u_i, u_j>` of a family of GNS vectors.
pub fn gram_matrix(vectors: &[GnsVector]) -> Result<CMatrix, LatticeError> {
    let n = vectors.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = vectors[i].inner(&vectors[j])?;
        }
    }
    Ok(g)
}
