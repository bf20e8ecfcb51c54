//! Dense complex linear algebra on small Hilbert spaces.
//!
//! Everything here is a pure function over immutable values. The composite
//! space convention is `A ⊗ B` with `A` the major (left) tensor factor.

mod hermitian;
mod matrix;
mod spectral;

pub use hermitian::{
    jordan_product, outer, DensityMatrix, EffectOperator, HermitianOperator, KetVector, Observable, Projector,
    STRUCTURAL_TOLERANCE,
};
pub use matrix::{ComplexMatrix, Subsystem};
pub use spectral::Eigen;

use num_complex::Complex64 as C64;

use crate::error::Result;

/// Tolerance used for spectral statements (reconstruction, orthonormality).
pub const SPECTRAL_TOLERANCE: f64 = 1e-9;

pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

pub fn mat_trace(m: &ComplexMatrix) -> Result<C64> {
    m.trace()
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    a.matmul(b)
}

pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

pub fn partial_trace(m: &ComplexMatrix, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<ComplexMatrix> {
    m.partial_trace(dim_a, dim_b, keep)
}

pub fn hermitian_eig(h: &HermitianOperator) -> Eigen {
    h.eig()
}
