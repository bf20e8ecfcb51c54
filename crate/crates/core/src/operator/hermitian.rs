use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;
use super::spectral::{self, Eigen};
use crate::error::{Error, Result};

/// Default tolerance for structural checks (Hermiticity, trace, idempotence).
pub const STRUCTURAL_TOLERANCE: f64 = 1e-10;

/// Anything that is, or wraps, a Hermitian operator.
pub trait Observable {
    fn operator(&self) -> &HermitianOperator;

    fn matrix(&self) -> &ComplexMatrix {
        self.operator().matrix()
    }

    fn dim(&self) -> usize {
        self.operator().dim()
    }
}

/// Square complex matrix that is Hermitian within `tolerance × (1 + max|M|)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, STRUCTURAL_TOLERANCE)
    }

    pub fn with_tolerance(matrix: ComplexMatrix, tolerance: f64) -> Result<Self> {
        matrix.square_dim()?;
        let residue = matrix.hermitian_residue();
        if residue > tolerance * (1.0 + matrix.max_abs()) {
            return Err(Error::NotHermitian { residue });
        }
        Ok(Self { matrix, tolerance })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim), tolerance: STRUCTURAL_TOLERANCE }
    }

    pub fn zero(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::zeros(dim, dim), tolerance: STRUCTURAL_TOLERANCE }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Real part of the trace; the imaginary part vanishes for Hermitian input.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().expect("square").re
    }

    /// `Tr(self · other)`, real for two Hermitian operators.
    pub fn expectation(&self, other: &HermitianOperator) -> Result<f64> {
        Ok(self.matrix.trace_product(&other.matrix)?.re)
    }

    pub fn eig(&self) -> Eigen {
        spectral::decompose(self)
    }

    /// Largest absolute eigenvalue.
    pub fn spectral_norm(&self) -> f64 {
        let eig = self.eig();
        eig.min().abs().max(eig.max().abs())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { matrix: self.matrix.scale_real(factor), tolerance: self.tolerance }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<Self> {
        Ok(Self { matrix: self.matrix.add(&other.matrix)?, tolerance: self.tolerance })
    }

    pub fn sub(&self, other: &HermitianOperator) -> Result<Self> {
        Ok(Self { matrix: self.matrix.sub(&other.matrix)?, tolerance: self.tolerance })
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self { matrix: self.matrix.kron(&other.matrix), tolerance: self.tolerance }
    }

    /// Symmetrized product `(AB + BA)/2`.
    pub fn jordan(&self, other: &HermitianOperator) -> Result<Self> {
        jordan_product(self, other)
    }

    /// Principal square root of a positive semidefinite operator; negative
    /// round-off eigenvalues are clamped to zero.
    pub fn sqrt_psd(&self) -> Result<Self> {
        let eig = self.eig();
        if eig.min() < -self.tolerance {
            return Err(Error::NotPositive(eig.min()));
        }
        let root = eig.reconstruct_with(|x| x.max(0.0).sqrt());
        Ok(Self { matrix: root.hermitian_part()?, tolerance: self.tolerance })
    }
}

impl Observable for HermitianOperator {
    fn operator(&self) -> &HermitianOperator {
        self
    }
}

/// `(AB + BA)/2` for two operators of the same dimension.
pub fn jordan_product(a: &HermitianOperator, b: &HermitianOperator) -> Result<HermitianOperator> {
    if a.dim() != b.dim() {
        return Err(Error::DimMismatch(format!("Jordan product of {}x{0} and {}x{1}", a.dim(), b.dim())));
    }
    let ab = a.matrix.matmul(&b.matrix)?;
    let ba = b.matrix.matmul(&a.matrix)?;
    Ok(HermitianOperator { matrix: ab.add(&ba)?.scale_real(0.5), tolerance: a.tolerance.max(b.tolerance) })
}

/// Unit-trace positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STRUCTURAL_TOLERANCE {
            return Err(Error::NotUnitTrace(tr));
        }
        let min = op.eig().min();
        if min < -STRUCTURAL_TOLERANCE {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    pub fn pure(ket: &KetVector) -> Self {
        Self { op: ket.projector().op }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).scale(1.0 / dim as f64) }
    }
}

impl Observable for DensityMatrix {
    fn operator(&self) -> &HermitianOperator {
        &self.op
    }
}

/// Idempotent Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector {
    op: HermitianOperator,
}

impl Projector {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let sq = op.matrix.matmul(&op.matrix)?;
        let residue = sq.max_abs_diff(&op.matrix);
        if residue > STRUCTURAL_TOLERANCE {
            return Err(Error::NotProjector(residue));
        }
        Ok(Self { op })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim) }
    }

    pub fn rank(&self) -> usize {
        self.op.trace().round().max(0.0) as usize
    }

    /// `self ⊗ 1_dim`.
    pub fn extend_right(&self, dim: usize) -> Self {
        Self { op: self.op.kron(&HermitianOperator::identity(dim)) }
    }

    /// `1_dim ⊗ self`.
    pub fn extend_left(&self, dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim).kron(&self.op) }
    }
}

impl Observable for Projector {
    fn operator(&self) -> &HermitianOperator {
        &self.op
    }
}

/// Hermitian operator with spectrum in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffectOperator {
    op: HermitianOperator,
}

impl EffectOperator {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        let eig = op.eig();
        let (min, max) = (eig.min(), eig.max());
        if min < -STRUCTURAL_TOLERANCE || max > 1.0 + STRUCTURAL_TOLERANCE {
            return Err(Error::NotEffect { min, max });
        }
        Ok(Self { op })
    }

    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        Self::new(HermitianOperator::new(matrix)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self { op: HermitianOperator::identity(dim) }
    }
}

impl Observable for EffectOperator {
    fn operator(&self) -> &HermitianOperator {
        &self.op
    }
}

impl From<Projector> for EffectOperator {
    fn from(p: Projector) -> Self {
        Self { op: p.op }
    }
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct KetVector {
    amplitudes: Vec<C64>,
}

impl KetVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::BadDimension("empty ket".into()));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > STRUCTURAL_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`, returning the ket and the original norm.
    pub fn normalize(amplitudes: Vec<C64>) -> Result<(Self, f64)> {
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = l2_norm(&amplitudes);
        if amplitudes.is_empty() || norm < 1e-300 {
            return Err(Error::NotNormalized(norm));
        }
        let ket = Self { amplitudes: amplitudes.into_iter().map(|z| z / norm).collect() };
        Ok((ket, norm))
    }

    pub(crate) fn from_normalized_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    /// Computational basis vector `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::BadDimension(format!("basis index {k} in dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes: amps })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    /// Complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|z| z.conj()).collect() }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &KetVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimMismatch(format!("inner product of dims {} and {}", self.dim(), other.dim())));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `self ⊗ other`, `self` major.
    pub fn kron(&self, other: &KetVector) -> Self {
        let amplitudes = self.amplitudes.iter().flat_map(|a| other.amplitudes.iter().map(move |b| a * b)).collect();
        Self { amplitudes }
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> Projector {
        let m = outer(self, self).expect("same dimension");
        Projector { op: HermitianOperator { matrix: m, tolerance: STRUCTURAL_TOLERANCE } }
    }
}

fn l2_norm(amps: &[C64]) -> f64 {
    amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|u⟩⟨v|`.
pub fn outer(u: &KetVector, v: &KetVector) -> Result<ComplexMatrix> {
    if u.dim() != v.dim() {
        return Err(Error::DimMismatch(format!("outer product of dims {} and {}", u.dim(), v.dim())));
    }
    let data = u.amplitudes.iter().flat_map(|a| v.amplitudes.iter().map(move |b| a * b.conj())).collect();
    ComplexMatrix::from_vec(u.dim(), v.dim(), data)
}
