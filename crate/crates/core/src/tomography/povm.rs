use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, EffectOperator, HermitianOperator, STRUCTURAL_TOLERANCE};

use super::basis::TomographyBasis;

/// One outcome `E_m = w_m (1 + ε S_m)` of a weak measurement.
///
/// `probe` is the signed operator `S_m`; `label` names the basis operator it
/// measures and `sign` (±1) relates the two, so that `S_m = sign · S_label`.
#[derive(Clone, Debug)]
pub struct WeakOutcome {
    pub label: String,
    pub sign: f64,
    pub weight: f64,
    pub probe: HermitianOperator,
    effect: EffectOperator,
}

impl WeakOutcome {
    pub fn effect(&self) -> &EffectOperator {
        &self.effect
    }

    /// `+X`, `-X`, ...
    pub fn display_label(&self) -> String {
        format!("{}{}", if self.sign >= 0.0 { '+' } else { '-' }, self.label)
    }
}

#[derive(Clone, Debug)]
pub struct WeakPovm {
    dim: usize,
    strength: f64,
    outcomes: Vec<WeakOutcome>,
}

impl WeakPovm {
    /// Validates `‖ε S_m‖ ≤ 1` for every outcome and completeness
    /// `Σ_m w_m (1 + ε S_m) = 1`.
    pub fn new(strength: f64, outcomes: Vec<(String, f64, f64, HermitianOperator)>) -> Result<Self> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::InvalidPovm(format!("strength must be positive, got {strength}")));
        }
        let dim = outcomes.first().map(|o| o.3.dim()).ok_or_else(|| Error::InvalidPovm("no outcomes".into()))?;
        let mut built = Vec::with_capacity(outcomes.len());
        let mut total = ComplexMatrix::zeros(dim, dim);
        for (label, sign, weight, probe) in outcomes {
            if probe.dim() != dim {
                return Err(Error::DimMismatch(format!("probe {label} has dimension {}", probe.dim())));
            }
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(Error::InvalidPovm(format!("weight {weight} of {label} outside (0, 1]")));
            }
            let norm = strength * probe.spectral_norm();
            if norm > 1.0 + STRUCTURAL_TOLERANCE {
                return Err(Error::StrengthTooLarge { probe: label, norm });
            }
            let effect_op = HermitianOperator::identity(dim).add(&probe.scale(strength))?.scale(weight);
            total = total.add(effect_op.matrix())?;
            let effect = EffectOperator::new(effect_op)?;
            built.push(WeakOutcome { label, sign, weight, probe, effect });
        }
        let residue = total.max_abs_diff(&ComplexMatrix::identity(dim));
        if residue > STRUCTURAL_TOLERANCE {
            return Err(Error::InvalidPovm(format!("effects do not sum to the identity (residue {residue:.3e})")));
        }
        Ok(Self { dim, strength, outcomes: built })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn outcomes(&self) -> &[WeakOutcome] {
        &self.outcomes
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// Distinct probe labels in first-appearance order.
    pub fn probe_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for o in &self.outcomes {
            if !labels.contains(&o.label) {
                labels.push(o.label.clone());
            }
        }
        labels
    }
}

/// Paired `±ε S` outcomes for every traceless basis operator, all with weight
/// `1 / (2 (d² − 1))`.
pub fn build_weak_povm(basis: &TomographyBasis, strength: f64) -> Result<WeakPovm> {
    let n_probes = basis.len() - 1;
    if n_probes == 0 {
        return Err(Error::InvalidBasis("basis has no traceless operators".into()));
    }
    let weight = 1.0 / (2 * n_probes) as f64;
    let mut outcomes = Vec::with_capacity(2 * n_probes);
    for (label, op) in basis.probes() {
        outcomes.push((label.to_string(), 1.0, weight, op.clone()));
        outcomes.push((label.to_string(), -1.0, weight, op.scale(-1.0)));
    }
    WeakPovm::new(strength, outcomes)
}
