//! Numerical model of the continuous field of quantum upper triangular
//! matrices over the parameter interval `(0,1]`.
//!
//! For `0 < q < 1` the fiber algebra is the discrete dual of quantum
//! `SU(2)`, realized here as a direct sum of matrix blocks `B(C^n)`. At
//! `q = 1` the fiber is commutative and is handled through functions and
//! sup-norms on the group of special upper triangular matrices with positive
//! diagonal.
//!
//! Module map:
//!
//! - [`qlattice`]: lattice points `(q; n, k)`, the partial shift `theta`,
//!   and the coordinate functions `Q`, `Omega`, `A`, `|N^k|`.
//! - [`fiber`]: block operators, graded crossed-product elements, the
//!   generators `N, A, Q, Omega, T`, the dual action and conditional
//!   expectation, and the alternative `L^2` representation.
//! - [`haar`]: Jackson integration, the functionals `psi_q`, `psi_1`,
//!   and the Haar functional on the block model.
//! - [`fusion`]: Clebsch-Gordan decomposition and the comultiplication.
//! - [`gns`]: GNS spaces, the multiplicative unitary and its pentagon
//!   equation.
//! - [`classical`]: the `q = 1` group and its sup-norm picture.

pub mod classical;
pub mod fiber;
pub mod fusion;
pub mod gns;
pub mod haar;
pub mod linalg;
pub mod qlattice;
pub mod quadrature;
pub mod report;

pub use num_complex::Complex64;

pub use classical::{ClassicalPoint, G1Element};
pub use fiber::{BlockOperator, GradedElement, MatrixOverFiber, Section};
pub use fusion::{CgCache, CgDecomposition};
pub use gns::{GnsVector, MultiplicativeUnitary, TensorGnsVector, TensorVector};
pub use haar::{HaarWeights, TestFunction};
pub use linalg::CMatrix;
pub use qlattice::{CoordinateValues, QPoint};
pub use report::CheckReport;

/// Default tolerance for equality of operators.
pub const DEFAULT_OPERATOR_TOL: f64 = 1e-10;
