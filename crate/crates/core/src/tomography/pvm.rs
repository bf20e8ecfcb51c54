use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, Observable, Projector, STRUCTURAL_TOLERANCE};

/// Complete set of mutually orthogonal, labelled projectors.
#[derive(Clone, Debug)]
pub struct Pvm {
    name: String,
    outcomes: Vec<(String, Projector)>,
}

impl Pvm {
    pub fn new(name: impl Into<String>, outcomes: Vec<(String, Projector)>) -> Result<Self> {
        let name = name.into();
        let dim = outcomes
            .first()
            .map(|(_, p)| p.dim())
            .ok_or_else(|| Error::IncompletePvm(format!("{name}: no outcomes")))?;
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (label, p) in &outcomes {
            if p.dim() != dim {
                return Err(Error::DimMismatch(format!("{name}: projector {label} has dimension {}", p.dim())));
            }
            total = total.add(p.matrix())?;
        }
        let residue = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if residue > STRUCTURAL_TOLERANCE {
            return Err(Error::IncompletePvm(format!("{name}: projectors sum to identity only within {residue:.3e}")));
        }
        for (j, (lj, pj)) in outcomes.iter().enumerate() {
            for (lk, pk) in outcomes.iter().skip(j + 1) {
                let overlap = pj.matrix().matmul(pk.matrix())?.max_abs();
                if overlap > STRUCTURAL_TOLERANCE {
                    return Err(Error::IncompletePvm(format!("{name}: {lj} and {lk} are not orthogonal")));
                }
            }
        }
        Ok(Self { name, outcomes })
    }

    /// Labels outcomes `f0`, `f1`, ...
    pub fn unlabeled(projectors: Vec<Projector>) -> Result<Self> {
        let outcomes = projectors.into_iter().enumerate().map(|(k, p)| (format!("f{k}"), p)).collect();
        Self::new("pvm", outcomes)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.outcomes[0].1.dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[(String, Projector)] {
        &self.outcomes
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.outcomes.iter().map(|(l, _)| l.as_str())
    }

    pub fn projector(&self, label: &str) -> Option<&Projector> {
        self.outcomes.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|(l, _)| l == label)
    }
}
