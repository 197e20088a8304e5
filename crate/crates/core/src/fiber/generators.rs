use num_complex::Complex64;

use super::block::{rep_diag, shift_s, BlockOperator};
use super::FiberError;
use crate::linalg::{c, CMatrix};
use crate::qlattice::{abs_n, check_q, QPoint};

/// The generators of the fiber algebra, truncated at `n_max`.
#[derive(Debug, Clone)]
pub struct Generators {
    pub n: BlockOperator,
    pub a: BlockOperator,
    pub a_inv: BlockOperator,
    pub q_op: BlockOperator,
    pub omega: BlockOperator,
}

/// `A = rep_diag(a)`, `Q = q 1`, `Omega = rep_diag(t + 1/t)` and
/// `N = S rep_diag(|N|)`.
pub fn generators(q: f64, n_max: usize) -> Result<Generators, FiberError> {
    check_q(q)?;
    let a = rep_diag(|p| c(p.a()), q, n_max)?;
    let a_inv = rep_diag(|p| c(1.0 / p.a()), q, n_max)?;
    let omega = rep_diag(|p| c(p.t() + 1.0 / p.t()), q, n_max)?;
    let abs = rep_diag(|p| c(abs_n(p)), q, n_max)?;
    let n = shift_s(q, n_max)?.mul(&abs);
    let q_op = BlockOperator::identity(q, n_max).scale(c(q));
    Ok(Generators {
        n,
        a,
        a_inv,
        q_op,
        omega,
    })
}

/// Block `n` of `A`: `diag(q^(k + (1-n)/2))`.
pub fn a_block(q: f64, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(QPoint::new_unchecked(q, n as u32, i as u32).a())
        } else {
            Complex64::default()
        }
    })
}

/// Block `n` of `A^-1`.
pub fn a_inv_block(q: f64, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c(1.0 / QPoint::new_unchecked(q, n as u32, i as u32).a())
        } else {
            Complex64::default()
        }
    })
}

/// Block `n` of `N`: `e_k -> |N|(n, k) e_(k+1)`.
pub fn n_block(q: f64, n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n.saturating_sub(1) {
        m[(k + 1, k)] = c(abs_n(&QPoint::new_unchecked(q, n as u32, k as u32)));
    }
    m
}

/// Residuals of the defining relations, each measured blockwise relative to
/// the size of the terms involved (`max(1, |A_n| |N_n|)` and
/// `max(1, |N_n|^2)` respectively).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationResiduals {
    /// `AN - qNA`.
    pub commutation: f64,
    /// `[N, N*] - (q - q^-1)(A^2 - A^-2)`.
    pub self_commutator: f64,
    /// `N*N + qA^2 + q^-1 A^-2 - Omega`.
    pub casimir: f64,
}

impl RelationResiduals {
    pub fn max(&self) -> f64 {
        self.commutation.max(self.self_commutator).max(self.casimir)
    }
}

pub fn relation_residuals(g: &Generators) -> RelationResiduals {
    let q = g.q_op.q();
    let an = g.a.mul(&g.n).sub(&g.n.mul(&g.a).scale(c(q)));
    let nn = g.n.commutator(&g.n.adjoint());
    let a2 = g.a.mul(&g.a);
    let a_inv2 = g.a_inv.mul(&g.a_inv);
    let rhs = a2.sub(&a_inv2).scale(c(q - 1.0 / q));
    let comm = nn.sub(&rhs);
    let casimir = g
        .n
        .adjoint()
        .mul(&g.n)
        .add(&a2.scale(c(q)))
        .add(&a_inv2.scale(c(1.0 / q)))
        .sub(&g.omega);

    let mut out = RelationResiduals {
        commutation: 0.0,
        self_commutator: 0.0,
        casimir: 0.0,
    };
    for n in 1..=g.n.n_max() {
        let norm = |x: &BlockOperator| crate::linalg::spectral_norm(x.block(n).unwrap());
        let n_norm = norm(&g.n);
        let a_norm = norm(&g.a);
        out.commutation = out.commutation.max(norm(&an) / (a_norm * n_norm).max(1.0));
        out.self_commutator = out.self_commutator.max(norm(&comm) / (n_norm * n_norm).max(1.0));
        out.casimir = out.casimir.max(norm(&casimir) / norm(&g.omega).max(1.0));
    }
    out
}

/// A 2x2 matrix with entries in the truncated fiber algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixOverFiber {
    pub entries: [[BlockOperator; 2]; 2],
}

impl MatrixOverFiber {
    pub fn entry(&self, i: usize, j: usize) -> &BlockOperator {
        &self.entries[i][j]
    }

    /// Transpose with each entry replaced by its adjoint.
    pub fn adjoint(&self) -> Self {
        let e = &self.entries;
        Self {
            entries: [
                [e[0][0].adjoint(), e[1][0].adjoint()],
                [e[0][1].adjoint(), e[1][1].adjoint()],
            ],
        }
    }
}

/// `T = [[A, N], [0, A^-1]]`.
pub fn build_t(q: f64, n_max: usize) -> Result<MatrixOverFiber, FiberError> {
    let g = generators(q, n_max)?;
    Ok(MatrixOverFiber {
        entries: [[g.a, g.n], [BlockOperator::zeros(q, n_max), g.a_inv]],
    })
}
