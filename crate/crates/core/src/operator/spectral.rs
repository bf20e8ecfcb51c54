//! Hermitian eigendecomposition.
//!
//! The numerical kernel is nalgebra's symmetric (Hermitian) QR iteration.
//! This module fixes the output conventions: eigenvalues ascending, each
//! eigenvector phased so that its first non-negligible amplitude is real and
//! positive, and degenerate eigenvalues ordered by comparing the phased
//! eigenvectors lexicographically.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::hermitian::{HermitianOperator, KetVector};
use super::matrix::ComplexMatrix;

/// Eigenvalues closer than this (relative to the spectral scale) are treated
/// as degenerate for ordering purposes.
const TIE_TOLERANCE: f64 = 1e-12;

/// Amplitudes below this modulus are skipped when fixing the phase.
const PHASE_CUTOFF: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal, aligned with `values`.
    pub vectors: Vec<KetVector>,
}

impl Eigen {
    /// `Σ_k f(λ_k) |v_k⟩⟨v_k|`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d, d);
        for (&lambda, v) in self.values.iter().zip(&self.vectors) {
            let weight = f(lambda);
            let amps = v.amplitudes();
            for j in 0..d {
                let vj = amps[j] * weight;
                for k in 0..d {
                    out[(j, k)] += vj * amps[k].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}

fn phase_fix(mut amps: Vec<C64>) -> Vec<C64> {
    if let Some(first) = amps.iter().find(|z| z.norm() > PHASE_CUTOFF).copied() {
        let phase = first.conj() / first.norm();
        for z in &mut amps {
            *z *= phase;
        }
    }
    amps
}

fn lexicographic_desc(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > PHASE_CUTOFF {
                return q.partial_cmp(&p).unwrap_or(Ordering::Equal);
            }
        }
    }
    Ordering::Equal
}

pub(crate) fn decompose(h: &HermitianOperator) -> Eigen {
    let m = h.matrix();
    let d = m.rows();
    // nalgebra is column-major; symmetrize first so round-off asymmetry never
    // reaches the solver.
    let sym = m.hermitian_part().expect("Hermitian operators are square");
    let na = DMatrix::<C64>::from_fn(d, d, |r, c| sym[(r, c)]);
    let eig = na.symmetric_eigen();

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..d)
        .map(|k| {
            let col: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
            (eig.eigenvalues[k], phase_fix(col))
        })
        .collect();

    let scale = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
    pairs.sort_by(|a, b| {
        if (a.0 - b.0).abs() <= TIE_TOLERANCE * scale {
            lexicographic_desc(&a.1, &b.1)
        } else {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal)
        }
    });

    let (values, vectors) =
        pairs.into_iter().map(|(lambda, amps)| (lambda, KetVector::from_normalized_unchecked(amps))).unzip();
    Eigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let eig = HermitianOperator::new(ComplexMatrix::identity(2)).unwrap().eig();
        assert_eq!(eig.values.len(), 2);
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let inner = eig.vectors[0].inner(&eig.vectors[1]).unwrap();
        assert!(inner.norm() < 1e-14);
    }

    #[test]
    fn bell_operator_spectrum() {
        let x = ComplexMatrix::pauli_x();
        let y = ComplexMatrix::pauli_y();
        let pi = ComplexMatrix::identity(2).add(&x).unwrap().add(&y).unwrap().scale_real(0.25);
        let eig = HermitianOperator::new(pi).unwrap().eig();
        let s2 = 2f64.sqrt();
        assert!((eig.values[0] - (1.0 - s2) / 4.0).abs() < 1e-12);
        assert!((eig.values[1] - (1.0 + s2) / 4.0).abs() < 1e-12);
        assert!((eig.values[0] + 0.1035533906).abs() < 1e-10);
        assert!((eig.values[1] - 0.6035533906).abs() < 1e-10);
    }

    #[test]
    fn golden_ratio_like_spectrum() {
        // characteristic polynomial λ² − λ − ¼
        let m = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let eig = HermitianOperator::new(m.clone()).unwrap().eig();
        let s2 = 2f64.sqrt();
        assert!((eig.values[0] - (1.0 - s2) / 2.0).abs() < 1e-12);
        assert!((eig.values[1] - (1.0 + s2) / 2.0).abs() < 1e-12);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn phase_and_tie_convention() {
        // Degenerate diagonal: ties resolved so |0⟩ precedes |1⟩, phases real-positive.
        let m = ComplexMatrix::diagonal(&[C64::new(0.5, 0.0), C64::new(0.5, 0.0)]);
        let eig = HermitianOperator::new(m).unwrap().eig();
        let v0 = eig.vectors[0].amplitudes();
        assert!((v0[0].re - 1.0).abs() < 1e-12 && v0[0].im.abs() < 1e-15);
        let v1 = eig.vectors[1].amplitudes();
        assert!((v1[1].re - 1.0).abs() < 1e-12);

        // Non-degenerate: first nonzero amplitude is real and positive.
        let y = HermitianOperator::new(ComplexMatrix::pauli_y()).unwrap().eig();
        for v in &y.vectors {
            let first = v.amplitudes()[0];
            assert!(first.re > 0.0 && first.im.abs() < 1e-14);
        }
    }
}
