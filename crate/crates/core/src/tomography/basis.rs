use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator, STRUCTURAL_TOLERANCE};

/// Gram matrices with a condition number above this are treated as singular.
const MAX_CONDITION: f64 = 1e12;

/// `d²` linearly independent Hermitian operators: the identity followed by
/// `d² − 1` traceless ones.
#[derive(Clone, Debug)]
pub struct TomographyBasis {
    dim: usize,
    labels: Vec<String>,
    operators: Vec<HermitianOperator>,
    /// Hilbert-Schmidt inner products `Tr(S_j S_k)` of the full basis, row-major.
    gram: Vec<f64>,
    /// Inverse of the traceless block of `gram`, row-major.
    traceless_inverse: Vec<f64>,
}

impl TomographyBasis {
    /// Generalized Gell-Mann matrices. In dimension 2 these are the Pauli
    /// matrices, labelled `X`, `Y`, `Z`; otherwise labels are `S{j}{k}`
    /// (symmetric), `A{j}{k}` (antisymmetric) and `D{l}` (diagonal).
    pub fn gell_mann(dim: usize) -> Result<Self> {
        let (labels, operators): (Vec<_>, Vec<_>) = gell_mann_operators(dim)?.into_iter().unzip();
        let mut all_labels = vec!["I".to_string()];
        all_labels.extend(labels);
        let mut all_ops = vec![HermitianOperator::identity(dim)];
        all_ops.extend(operators);
        Self::from_operators(all_labels, all_ops)
    }

    pub fn pauli() -> Self {
        Self::gell_mann(2).expect("qubit basis")
    }

    /// Validates an explicit basis. The first operator must be the identity and
    /// the remaining `d² − 1` must be traceless.
    pub fn from_operators(labels: Vec<String>, operators: Vec<HermitianOperator>) -> Result<Self> {
        let dim = operators.first().map(HermitianOperator::dim).unwrap_or(0);
        if dim == 0 {
            return Err(Error::InvalidBasis("empty basis".into()));
        }
        if labels.len() != operators.len() {
            return Err(Error::InvalidBasis("label count differs from operator count".into()));
        }
        if operators.len() != dim * dim {
            return Err(Error::InvalidBasis(format!(
                "{} operators for dimension {dim}, need {}",
                operators.len(),
                dim * dim
            )));
        }
        if operators.iter().any(|op| op.dim() != dim) {
            return Err(Error::DimMismatch("basis operators differ in dimension".into()));
        }
        if operators[0].matrix().max_abs_diff(&ComplexMatrix::identity(dim)) > STRUCTURAL_TOLERANCE {
            return Err(Error::InvalidBasis("first operator must be the identity".into()));
        }
        for (label, op) in labels.iter().zip(&operators).skip(1) {
            if op.trace().abs() > STRUCTURAL_TOLERANCE {
                return Err(Error::InvalidBasis(format!("operator {label} is not traceless")));
            }
        }
        let n = operators.len();
        let mut gram = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                gram[j * n + k] = operators[j].expectation(&operators[k])?;
            }
        }

        let m = n - 1;
        let block = DMatrix::from_fn(m, m, |j, k| gram[(j + 1) * n + (k + 1)]);
        let traceless_inverse = if m == 0 {
            Vec::new()
        } else {
            let full = DMatrix::from_fn(n, n, |j, k| gram[j * n + k]);
            let sv = full.singular_values();
            let (smax, smin) = (sv.max(), sv.min());
            let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if !condition.is_finite() || condition > MAX_CONDITION {
                return Err(Error::SingularGram(condition));
            }
            let inv = block.try_inverse().ok_or(Error::SingularGram(f64::INFINITY))?;
            (0..m).flat_map(|j| (0..m).map(move |k| (j, k))).map(|(j, k)| inv[(j, k)]).collect()
        };

        Ok(Self { dim, labels, operators, gram, traceless_inverse })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn operators(&self) -> &[HermitianOperator] {
        &self.operators
    }

    /// Traceless part of the basis with its labels.
    pub fn probes(&self) -> impl Iterator<Item = (&str, &HermitianOperator)> {
        self.labels.iter().map(String::as_str).zip(&self.operators).skip(1)
    }

    pub fn gram(&self, j: usize, k: usize) -> f64 {
        self.gram[j * self.len() + k]
    }

    pub(crate) fn traceless_inverse(&self, j: usize, k: usize) -> f64 {
        self.traceless_inverse[j * (self.len() - 1) + k]
    }

    /// Largest spectral norm among the traceless operators.
    pub fn max_probe_norm(&self) -> f64 {
        self.probes().map(|(_, op)| op.spectral_norm()).fold(0.0, f64::max)
    }
}

fn gell_mann_operators(dim: usize) -> Result<Vec<(String, HermitianOperator)>> {
    if dim == 0 {
        return Err(Error::BadDimension("dimension must be positive".into()));
    }
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::with_capacity(dim * dim - 1);
    let qubit = dim == 2;
    for j in 0..dim {
        for k in j + 1..dim {
            let mut s = ComplexMatrix::zeros(dim, dim);
            s[(j, k)] = C64::new(1.0, 0.0);
            s[(k, j)] = C64::new(1.0, 0.0);
            let label = if qubit { "X".to_string() } else { format!("S{j}{k}") };
            out.push((label, HermitianOperator::new(s)?));
        }
    }
    for j in 0..dim {
        for k in j + 1..dim {
            let mut a = ComplexMatrix::zeros(dim, dim);
            a[(j, k)] = C64::new(0.0, -1.0);
            a[(k, j)] = C64::new(0.0, 1.0);
            let label = if qubit { "Y".to_string() } else { format!("A{j}{k}") };
            out.push((label, HermitianOperator::new(a)?));
        }
    }
    for l in 1..dim {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let diag: Vec<C64> = (0..dim)
            .map(|k| match k.cmp(&l) {
                std::cmp::Ordering::Less => C64::new(norm, 0.0),
                std::cmp::Ordering::Equal => C64::new(-(l as f64) * norm, 0.0),
                std::cmp::Ordering::Greater => zero,
            })
            .collect();
        let label = if qubit { "Z".to_string() } else { format!("D{l}") };
        out.push((label, HermitianOperator::new(ComplexMatrix::diagonal(&diag))?));
    }
    Ok(out)
}

/// The `index`-th (zero-based) traceless generalized Gell-Mann matrix.
pub fn gell_mann_matrix(dim: usize, index: usize) -> Result<HermitianOperator> {
    if dim < 2 {
        return Err(Error::BadDimension(format!("Gell-Mann matrices need dimension >= 2, got {dim}")));
    }
    let mut ops = gell_mann_operators(dim)?;
    if index >= ops.len() {
        return Err(Error::BadDimension(format!("Gell-Mann index {index} out of range for dimension {dim}")));
    }
    Ok(ops.swap_remove(index).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_basis_is_pauli() {
        let b = TomographyBasis::pauli();
        assert_eq!(b.labels(), &["I", "X", "Y", "Z"]);
        assert_eq!(b.operators()[1].matrix(), &ComplexMatrix::pauli_x());
        assert_eq!(b.operators()[2].matrix(), &ComplexMatrix::pauli_y());
        assert_eq!(b.operators()[3].matrix(), &ComplexMatrix::pauli_z());
        assert!((b.gram(1, 1) - 2.0).abs() < 1e-15);
        assert!(b.gram(1, 2).abs() < 1e-15);
    }

    #[test]
    fn gell_mann_is_orthogonal() {
        for d in 2..=5 {
            let b = TomographyBasis::gell_mann(d).unwrap();
            assert_eq!(b.len(), d * d);
            for j in 1..b.len() {
                for k in 1..b.len() {
                    let expected = if j == k { 2.0 } else { 0.0 };
                    assert!((b.gram(j, k) - expected).abs() < 1e-12, "d={d} ({j},{k})");
                }
            }
        }
    }

    #[test]
    fn rejects_dependent_operators() {
        let x = HermitianOperator::new(ComplexMatrix::pauli_x()).unwrap();
        let ops = vec![HermitianOperator::identity(2), x.clone(), x.clone(), x];
        let labels = ["I", "a", "b", "c"].map(String::from).to_vec();
        assert!(matches!(TomographyBasis::from_operators(labels, ops), Err(Error::SingularGram(_))));
    }

    #[test]
    fn rejects_non_traceless_and_wrong_count() {
        let ops = vec![HermitianOperator::identity(2), HermitianOperator::identity(2)];
        assert!(TomographyBasis::from_operators(vec!["I".into(), "J".into()], ops).is_err());
        let z = HermitianOperator::new(ComplexMatrix::pauli_z()).unwrap();
        let p0 = z.add(&HermitianOperator::identity(2)).unwrap();
        let ops = vec![
            HermitianOperator::identity(2),
            HermitianOperator::new(ComplexMatrix::pauli_x()).unwrap(),
            HermitianOperator::new(ComplexMatrix::pauli_y()).unwrap(),
            p0,
        ];
        let labels = ["I", "X", "Y", "P"].map(String::from).to_vec();
        assert!(matches!(TomographyBasis::from_operators(labels, ops), Err(Error::InvalidBasis(_))));
    }

    #[test]
    fn gell_mann_diagonal_norms() {
        // D_l has spectral norm sqrt(2l/(l+1)); probes in d=3 exceed 1.
        let b = TomographyBasis::gell_mann(3).unwrap();
        assert!((b.max_probe_norm() - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(gell_mann_matrix(3, 8).is_err());
        assert_eq!(gell_mann_matrix(2, 0).unwrap().matrix(), &ComplexMatrix::pauli_x());
    }
}
