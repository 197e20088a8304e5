use std::collections::BTreeMap;

use num_complex::Complex64;

use super::graded::GradedElement;
use super::FiberError;
use crate::haar::HaarWeights;
use crate::linalg::{self, CMatrix};

/// Matrix of `pi(x)` on a truncated `L^2` space of functions on the lattice
/// times the circle, in the orthonormal basis `delta_p Z^m / sqrt(w(p))`
/// with `|m| <= cutoff`.
///
/// The operator never mixes blocks, so it is stored one block `n` at a time
/// over the index set `(k, m)`.
#[derive(Debug, Clone)]
pub struct L2Operator {
    q: f64,
    cutoff: u32,
    blocks: BTreeMap<u32, CMatrix>,
}

impl L2Operator {
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    /// Matrix on block `n`, indexed by `k * (2 cutoff + 1) + (m + cutoff)`.
    pub fn block(&self, n: u32) -> Option<&CMatrix> {
        self.blocks.get(&n)
    }

    pub fn norm(&self) -> f64 {
        self.blocks.values().map(linalg::spectral_norm).fold(0.0, f64::max)
    }
}

/// The representation `pi(f) h = f h`, `pi(s g) h = q^-1 Z theta^-1(g h)`
/// on the weighted `L^2` space, truncated to Fourier modes `|m| <= cutoff`.
///
/// On `delta_p Z^m` the degree-`j` part acts as
/// `q^-j g(p) delta_(theta^j p) Z^(m+j)`; the `q^-j` makes `pi` a
/// *-representation for the weights `w(theta p) = q^2 w(p)`. The matrix is
/// assembled in the unnormalized basis and then conjugated by `W^(1/2)`.
///
/// Since `pi(x)` preserves `m - k`, the truncated norm equals the true norm
/// once `cutoff + 1 >= n` for every block `n` in the support.
pub fn rep_l2(x: &GradedElement, cutoff: u32) -> Result<L2Operator, FiberError> {
    if let Some(d) = x.degrees().into_iter().find(|d| d.unsigned_abs() > cutoff) {
        return Err(FiberError::Cutoff { degree: d, cutoff });
    }
    let q = x.q();
    let weights = HaarWeights::new(q)?;
    let modes = 2 * cutoff as usize + 1;
    let c = cutoff as i64;
    let mut blocks: BTreeMap<u32, CMatrix> = BTreeMap::new();
    for ((deg, n, k), v) in x.entries() {
        let size = n as usize * modes;
        let b = blocks.entry(n).or_insert_with(|| CMatrix::zeros(size, size));
        let target = k as i64 + deg as i64;
        for m in -c..=c {
            let m2 = m + deg as i64;
            if m2.abs() > c {
                continue;
            }
            let col = k as usize * modes + (m + c) as usize;
            let row = target as usize * modes + (m2 + c) as usize;
            b[(row, col)] += v * Complex64::new(q.powi(-deg), 0.0);
        }
    }
    // Conjugate by W^(1/2): entry (row, col) picks up sqrt(w(row) / w(col)).
    for (&n, b) in blocks.iter_mut() {
        let sqrt_w: Vec<f64> = (0..n).map(|k| weights.weight(n, k).sqrt()).collect();
        for row in 0..b.nrows() {
            for col in 0..b.ncols() {
                if b[(row, col)] != Complex64::default() {
                    b[(row, col)] *= sqrt_w[row / modes] / sqrt_w[col / modes];
                }
            }
        }
    }
    Ok(L2Operator { q, cutoff, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fiber::{graded_norm, rep_graded};
    use crate::linalg::c;

    #[test]
    fn dirac_has_unit_norm() {
        let x = GradedElement::dirac(0.5, 0, 3, 1, c(1.0)).unwrap();
        assert!((rep_l2(&x, 2).unwrap().norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degree_one_shifts_fourier_and_lattice_index() {
        let q = 0.6;
        let x = GradedElement::dirac(q, 1, 2, 0, c(1.0)).unwrap();
        let op = rep_l2(&x, 1).unwrap();
        let b = op.block(2).unwrap();
        // delta_(2,0) Z^0 goes to delta_(2,1) Z^1 with unit coefficient
        // in the orthonormal basis.
        let col = 1; // k = 0, m = 0
        let row = 3 + 2; // k = 1, m = 1
        assert!((b[(row, col)] - c(1.0)).norm() < 1e-14);
        assert!(rep_l2(&x, 0).is_err());
    }

    #[test]
    fn star_maps_to_adjoint() {
        let q = 0.45;
        let x = GradedElement::dirac(q, 1, 3, 0, Complex64::new(0.3, 0.8))
            .unwrap()
            .add(&GradedElement::dirac(q, 0, 3, 2, c(-1.2)).unwrap());
        let a = rep_l2(&x, 3).unwrap();
        let b = rep_l2(&x.star(), 3).unwrap();
        let diff = a.block(3).unwrap().adjoint() - b.block(3).unwrap();
        assert!(linalg::max_abs(&diff) < 1e-14);
        assert!((a.norm() - graded_norm(&x)).abs() < 1e-12);
        assert!((a.norm() - rep_graded(&x, 3).unwrap().norm()).abs() < 1e-12);
    }
}
