//! Random instances for property checks and the `check` self-test.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, KetVector, Projector};
use crate::tomography::Pvm;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. complex Gaussian entries.
pub fn matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite Gaussian entries")
}

pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let m = matrix(dim, dim, rng);
    HermitianOperator::new(m.hermitian_part().expect("square")).expect("Hermitian by construction")
}

/// Haar-distributed pure state.
pub fn ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> KetVector {
    loop {
        let amps: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        if let Ok((ket, _)) = KetVector::normalize(amps) {
            return ket;
        }
    }
}

/// Full-rank mixed state `G G† / Tr(G G†)` from a Ginibre matrix.
pub fn density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityMatrix {
    let g = matrix(dim, dim, rng);
    let gg = g.matmul(&g.adjoint()).expect("square");
    let tr = gg.trace().expect("square").re;
    DensityMatrix::from_matrix(gg.scale_real(1.0 / tr).hermitian_part().expect("square"))
        .expect("Ginibre states are valid")
}

/// Orthonormal basis obtained by Gram-Schmidt on Gaussian vectors.
pub fn orthonormal_basis<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<KetVector> {
    let mut basis: Vec<KetVector> = Vec::with_capacity(dim);
    while basis.len() < dim {
        let mut v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        for b in &basis {
            let overlap: C64 = b.amplitudes().iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b.amplitudes()) {
                *vi -= overlap * bi;
            }
        }
        if let Ok((ket, norm)) = KetVector::normalize(v) {
            if norm > 1e-6 {
                basis.push(ket);
            }
        }
    }
    basis
}

/// Complete rank-1 projective measurement in a random basis.
pub fn rank_one_pvm<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Pvm {
    let outcomes: Vec<Projector> = orthonormal_basis(dim, rng).iter().map(KetVector::projector).collect();
    Pvm::unlabeled(outcomes).expect("orthonormal basis gives a complete PVM")
}
