//! Concrete finite models of the fiber algebras at `0 < q < 1`.
//!
//! [`BlockOperator`] is the block-matrix picture `c_0-(+) B(C^n)` truncated
//! at `n_max`; [`GradedElement`] is the crossed-product picture
//! `sum_k s^k f_k`. [`rep_graded`] maps the second into the first, and
//! [`rep_l2`] gives an independent Hilbert-space model used to cross-check
//! norms.

mod block;
mod generators;
mod graded;
mod l2;
mod section;

use thiserror::Error;

use crate::qlattice::LatticeError;

pub use block::{operator_norm, rep_diag, shift_s, BlockOperator};
pub use generators::{
    a_block, a_inv_block, build_t, generators, n_block, relation_residuals, Generators, MatrixOverFiber,
    RelationResiduals,
};
pub use graded::{graded_norm, rep_graded, GradedElement};
pub use l2::{rep_l2, L2Operator};
pub use section::{continuity_scan, ContinuityRow, Section};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FiberError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("element reaches block {block} but the truncation keeps only n <= {n_max}")]
    Truncation { block: usize, n_max: usize },
    #[error("element has degree {degree} but the Fourier cutoff is {cutoff}")]
    Cutoff { degree: i32, cutoff: u32 },
    #[error("point (n = {n}, k = {k}) is outside the domain of theta^{degree}")]
    OutOfDomain { degree: i32, n: u32, k: u32 },
    #[error(transparent)]
    Classical(#[from] crate::classical::ClassicalError),
}
