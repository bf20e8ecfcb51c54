//! Weak-measurement tomography and post-selected quasi-probabilities.
//!
//! A weak measurement with outcomes `E_m = w_m (1 + ε S_m)` followed by a
//! projective measurement `{Π_f}` has joint statistics
//! `p(m, f) = Tr{E_m · ½(ρ Π_f + Π_f ρ)}`. Dividing the symmetrized product by
//! `p(f) = Tr{ρ Π_f}` gives the conditional state `R_f`, a unit-trace
//! Hermitian operator that may have negative eigenvalues. The initial state is
//! always the mixture `ρ = Σ_f p(f) R_f`.

mod basis;
mod povm;
mod pvm;

pub use basis::{gell_mann_matrix, TomographyBasis};
pub use povm::{build_weak_povm, WeakOutcome, WeakPovm};
pub use pvm::Pvm;

use crate::error::{Error, Result};
use crate::operator::{
    jordan_product, ComplexMatrix, DensityMatrix, HermitianOperator, Observable, Projector, STRUCTURAL_TOLERANCE,
};

/// Post-selection probabilities at or below this leave `R_f` undefined.
pub const PROBABILITY_CUTOFF: f64 = 1e-12;

/// Expectation values keyed by probe label, in basis order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Expectations {
    entries: Vec<(String, f64)>,
}

impl Expectations {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        Self { entries }
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(l, v)| (l.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(String, f64)> for Expectations {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        Self { entries: iter.into_iter().collect() }
    }
}

/// Post-selected state `R_f`: unit trace, Hermitian, possibly non-positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalState {
    op: HermitianOperator,
    preparation_prob: f64,
}

impl ConditionalState {
    pub fn new(op: HermitianOperator, preparation_prob: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STRUCTURAL_TOLERANCE {
            return Err(Error::NotUnitTrace(tr));
        }
        if !(0.0..=1.0 + STRUCTURAL_TOLERANCE).contains(&preparation_prob) {
            return Err(Error::InvalidConfig(format!("preparation probability {preparation_prob} outside [0, 1]")));
        }
        Ok(Self { op, preparation_prob })
    }

    /// `p(f|i)`.
    pub fn preparation_prob(&self) -> f64 {
        self.preparation_prob
    }

    /// Ascending eigenvalues; negative entries signal quasi-probabilities.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.op.eig().values
    }
}

impl Observable for ConditionalState {
    fn operator(&self) -> &HermitianOperator {
        &self.op
    }
}

fn check_dims(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch(format!("{what}: dimensions {a} and {b}")));
    }
    Ok(())
}

/// `p(m) = Tr{ρ E_m}` for every outcome of the weak measurement.
pub fn outcome_probabilities(rho: &DensityMatrix, povm: &WeakPovm) -> Result<Vec<f64>> {
    check_dims("outcome probabilities", rho.dim(), povm.dim())?;
    povm.outcomes().iter().map(|o| rho.operator().expectation(o.effect().operator())).collect()
}

/// Inverts `p(m) = w_m (1 + ε ⟨S_m⟩)`. Outcomes sharing a probe label are
/// averaged after undoing their sign, which cancels the `±` pair's weight
/// calibration error.
pub fn reconstruct_expectations(probs: &[f64], povm: &WeakPovm) -> Result<Expectations> {
    if probs.len() != povm.len() {
        return Err(Error::DimMismatch(format!("{} probabilities for {} outcomes", probs.len(), povm.len())));
    }
    let eps = povm.strength();
    Ok(povm
        .probe_labels()
        .into_iter()
        .map(|label| {
            let (sum, n) = povm
                .outcomes()
                .iter()
                .zip(probs)
                .filter(|(o, _)| o.label == label)
                .fold((0.0, 0usize), |(s, n), (o, &p)| (s + o.sign * (p - o.weight) / (o.weight * eps), n + 1));
            (label, sum / n as f64)
        })
        .collect())
}

/// Solves the Gram system for `ρ = 1/d + Σ c_k S_k` given `⟨S_k⟩` for every
/// traceless basis operator. The result has unit trace but need not be
/// positive.
pub fn reconstruct_density(expectations: &Expectations, basis: &TomographyBasis) -> Result<HermitianOperator> {
    let d = basis.dim();
    let values: Vec<f64> = basis
        .probes()
        .map(|(label, _)| {
            expectations.get(label).ok_or_else(|| Error::UnknownLabel(format!("missing expectation for {label}")))
        })
        .collect::<Result<_>>()?;
    let m = values.len();
    let mut out = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
    for (j, (_, op)) in basis.probes().enumerate() {
        let coeff: f64 = (0..m).map(|k| basis.traceless_inverse(j, k) * values[k]).sum();
        out = out.add(&op.matrix().scale_real(coeff))?;
    }
    HermitianOperator::new(out.hermitian_part()?)
}

/// `p(m, f) = Tr{E_m · ½(ρ Π_f + Π_f ρ)}`.
pub fn joint_outcome_probability(
    rho: &DensityMatrix,
    effect: &impl Observable,
    final_outcome: &Projector,
) -> Result<f64> {
    check_dims("joint outcome probability", rho.dim(), effect.dim())?;
    check_dims("joint outcome probability", rho.dim(), final_outcome.dim())?;
    let j = jordan_product(rho.operator(), final_outcome.operator())?;
    effect.operator().expectation(&j)
}

/// `R_f = ½(ρ Π_f + Π_f ρ) / Tr{ρ Π_f}`.
pub fn conditional_state(rho: &DensityMatrix, final_outcome: &Projector) -> Result<ConditionalState> {
    conditional_state_labelled(rho, final_outcome, "")
}

fn conditional_state_labelled(rho: &DensityMatrix, final_outcome: &Projector, label: &str) -> Result<ConditionalState> {
    check_dims("conditional state", rho.dim(), final_outcome.dim())?;
    let p = rho.operator().expectation(final_outcome.operator())?;
    if p <= PROBABILITY_CUTOFF {
        return Err(Error::ZeroProbabilityOutcome { label: label.to_string(), prob: p });
    }
    let j = jordan_product(rho.operator(), final_outcome.operator())?;
    ConditionalState::new(j.scale(1.0 / p), p)
}

/// All `R_f` with `p(f) > cutoff`, labelled by outcome.
pub fn decompose(rho: &DensityMatrix, pvm: &Pvm) -> Result<Vec<(String, ConditionalState)>> {
    check_dims("decomposition", rho.dim(), pvm.dim())?;
    let mut out = Vec::with_capacity(pvm.len());
    for (label, projector) in pvm.outcomes() {
        match conditional_state_labelled(rho, projector, label) {
            Ok(state) => out.push((label.clone(), state)),
            Err(Error::ZeroProbabilityOutcome { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// `max |Σ_f p(f) R_f − ρ|`.
pub fn mixture_residual(rho: &DensityMatrix, parts: &[(String, ConditionalState)]) -> Result<f64> {
    let d = rho.dim();
    let mut total = ComplexMatrix::zeros(d, d);
    for (_, state) in parts {
        total = total.add(&state.matrix().scale_real(state.preparation_prob()))?;
    }
    Ok(total.max_abs_diff(rho.matrix()))
}

/// `p(g | i, f) = Tr{R_f Φ_g}`; may be negative or exceed one.
pub fn conditional_probability(cond: &ConditionalState, effect: &impl Observable) -> Result<f64> {
    check_dims("conditional probability", cond.dim(), effect.dim())?;
    cond.operator().expectation(effect.operator())
}

/// `p(f, g | i) = Tr{ρ · ½(Π_f Φ_g + Φ_g Π_f)}`.
///
/// `effect` is any Hermitian operator: the joint-outcome operators of two
/// incompatible binary measurements are themselves symmetrized products and
/// generally have eigenvalues outside `[0, 1]`.
pub fn joint_probability(rho: &DensityMatrix, final_outcome: &Projector, effect: &impl Observable) -> Result<f64> {
    check_dims("joint probability", rho.dim(), final_outcome.dim())?;
    check_dims("joint probability", rho.dim(), effect.dim())?;
    let j = jordan_product(final_outcome.operator(), effect.operator())?;
    rho.operator().expectation(&j)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64 as C64;

    use super::*;
    use crate::operator::{EffectOperator, KetVector};

    fn ket(amps: &[f64]) -> KetVector {
        KetVector::normalize(amps.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap().0
    }

    fn qubit_povm(eps: f64) -> WeakPovm {
        build_weak_povm(&TomographyBasis::pauli(), eps).unwrap()
    }

    fn index_of(povm: &WeakPovm, label: &str) -> usize {
        povm.outcomes().iter().position(|o| o.display_label() == label).unwrap()
    }

    #[test]
    fn outcome_probabilities_examples() {
        let povm = qubit_povm(0.1);
        let zero = DensityMatrix::pure(&ket(&[1.0, 0.0]));
        let p = outcome_probabilities(&zero, &povm).unwrap();
        assert!((p[index_of(&povm, "+Z")] - 1.1 / 6.0).abs() < 1e-15);
        assert!((p[index_of(&povm, "-Z")] - 0.15).abs() < 1e-15);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(p.iter().all(|&x| x >= 0.0));

        let mixed = DensityMatrix::maximally_mixed(2);
        for (pm, o) in outcome_probabilities(&mixed, &povm).unwrap().iter().zip(povm.outcomes()) {
            assert!((pm - o.weight).abs() < 1e-15);
        }
        assert!(outcome_probabilities(&DensityMatrix::maximally_mixed(3), &povm).is_err());
    }

    #[test]
    fn reconstruct_expectations_examples() {
        let povm = qubit_povm(0.1);
        let zero = DensityMatrix::pure(&ket(&[1.0, 0.0]));
        let e = reconstruct_expectations(&outcome_probabilities(&zero, &povm).unwrap(), &povm).unwrap();
        assert!((e.get("Z").unwrap() - 1.0).abs() < 1e-12);
        assert!(e.get("X").unwrap().abs() < 1e-12);
        assert!(e.get("Y").unwrap().abs() < 1e-12);

        let weights: Vec<f64> = povm.outcomes().iter().map(|o| o.weight).collect();
        let e = reconstruct_expectations(&weights, &povm).unwrap();
        assert!(e.iter().all(|(_, v)| v == 0.0));

        let plus = DensityMatrix::pure(&ket(&[1.0, 1.0]));
        let e = reconstruct_expectations(&outcome_probabilities(&plus, &povm).unwrap(), &povm).unwrap();
        assert!((e.get("X").unwrap() - 1.0).abs() < 1e-12);

        assert!(reconstruct_expectations(&[0.5, 0.5], &povm).is_err());
    }

    #[test]
    fn reconstruct_density_examples() {
        let basis = TomographyBasis::pauli();
        let e = Expectations::new(vec![("Z".into(), 1.0), ("X".into(), 0.0), ("Y".into(), 0.0)]);
        let rho = reconstruct_density(&e, &basis).unwrap();
        let p0 = KetVector::basis(2, 0).unwrap().projector();
        assert!(rho.matrix().max_abs_diff(p0.matrix()) < 1e-15);

        let zero = Expectations::new(vec![("Z".into(), 0.0), ("X".into(), 0.0), ("Y".into(), 0.0)]);
        let rho = reconstruct_density(&zero, &basis).unwrap();
        assert!(rho.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.5)) < 1e-15);

        let partial = Expectations::new(vec![("Z".into(), 1.0)]);
        assert!(matches!(reconstruct_density(&partial, &basis), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn joint_outcome_probability_examples() {
        let plus = DensityMatrix::pure(&ket(&[1.0, 1.0]));
        let p1 = KetVector::basis(2, 1).unwrap().projector();
        let half = EffectOperator::from_matrix(ComplexMatrix::identity(2).scale_real(0.5)).unwrap();
        assert!((joint_outcome_probability(&plus, &half, &p1).unwrap() - 0.25).abs() < 1e-15);

        let povm = qubit_povm(0.2);
        let probs = outcome_probabilities(&plus, &povm).unwrap();
        for (o, &pm) in povm.outcomes().iter().zip(&probs) {
            let with_identity = joint_outcome_probability(&plus, o.effect(), &Projector::identity(2)).unwrap();
            assert!((with_identity - pm).abs() < 1e-15);
            // ρ is an eigenstate of Π_+: the Jordan product collapses to ρ.
            let pp = ket(&[1.0, 1.0]).projector();
            assert!((joint_outcome_probability(&plus, o.effect(), &pp).unwrap() - pm).abs() < 1e-15);
        }
    }

    #[test]
    fn double_slit_conditional_states() {
        let rho = DensityMatrix::pure(&ket(&[1.0, 1.0]));
        let p1 = KetVector::basis(2, 0).unwrap().projector();
        let r = conditional_state(&rho, &p1).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert!(r.matrix().max_abs_diff(&expected) < 1e-15);
        assert!((r.preparation_prob() - 0.5).abs() < 1e-15);
        let ev = r.eigenvalues();
        let s2 = 2f64.sqrt();
        assert!((ev[0] - (1.0 - s2) / 2.0).abs() < 1e-12);
        assert!((ev[1] - (1.0 + s2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn certain_post_selection_changes_nothing() {
        let rho = DensityMatrix::pure(&ket(&[0.6, 0.8]));
        let p = ket(&[0.6, 0.8]).projector();
        let r = conditional_state(&rho, &p).unwrap();
        assert!(r.matrix().max_abs_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn zero_probability_outcome_is_an_error() {
        let rho = DensityMatrix::pure(&KetVector::basis(2, 0).unwrap());
        let p1 = KetVector::basis(2, 1).unwrap().projector();
        assert!(matches!(conditional_state(&rho, &p1), Err(Error::ZeroProbabilityOutcome { .. })));
        let pvm = Pvm::unlabeled(vec![KetVector::basis(2, 0).unwrap().projector(), p1]).unwrap();
        let parts = decompose(&rho, &pvm).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].0, "f0");
    }

    #[test]
    fn decompose_examples() {
        let rho = DensityMatrix::pure(&ket(&[1.0, 1.0]));
        let pvm = Pvm::unlabeled((0..2).map(|k| KetVector::basis(2, k).unwrap().projector()).collect()).unwrap();
        let parts = decompose(&rho, &pvm).unwrap();
        assert_eq!(parts.len(), 2);
        let r2 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert!(parts[1].1.matrix().max_abs_diff(&r2) < 1e-15);
        assert!(parts.iter().all(|(_, s)| (s.preparation_prob() - 0.5).abs() < 1e-15));
        assert!(mixture_residual(&rho, &parts).unwrap() < 1e-15);

        // diagonal ρ: the decomposition is the classical mixture of basis states
        let diag =
            DensityMatrix::from_matrix(ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap())
                .unwrap();
        for (k, (_, r)) in decompose(&diag, &pvm).unwrap().iter().enumerate() {
            assert!(r.matrix().max_abs_diff(KetVector::basis(2, k).unwrap().projector().matrix()) < 1e-15);
        }
    }

    #[test]
    fn conditional_probability_examples() {
        let rho = DensityMatrix::pure(&ket(&[1.0, 1.0]));
        let r = conditional_state(&rho, &KetVector::basis(2, 0).unwrap().projector()).unwrap();
        let plus = ket(&[1.0, 1.0]).projector();
        let minus = ket(&[1.0, -1.0]).projector();
        assert!((conditional_probability(&r, &plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(conditional_probability(&r, &minus).unwrap().abs() < 1e-15);
        assert!((conditional_probability(&r, &EffectOperator::identity(2)).unwrap() - 1.0).abs() < 1e-15);
        assert!(conditional_probability(&r, &EffectOperator::identity(3)).is_err());
    }

    #[test]
    fn joint_probability_examples() {
        let rho = DensityMatrix::pure(&ket(&[0.6, 0.8]));
        let p0 = KetVector::basis(2, 0).unwrap().projector();
        let with_identity = joint_probability(&rho, &p0, &EffectOperator::identity(2)).unwrap();
        assert!((with_identity - 0.36).abs() < 1e-15);

        // all diagonal: classical joint probability Σ_k ρ_kk Π_kk Φ_kk
        let r = ComplexMatrix::diagonal(&[C64::new(0.2, 0.0), C64::new(0.3, 0.0), C64::new(0.5, 0.0)]);
        let rho3 = DensityMatrix::from_matrix(r).unwrap();
        let pi = Projector::from_matrix(ComplexMatrix::diagonal(&[
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        ]))
        .unwrap();
        let phi = EffectOperator::from_matrix(ComplexMatrix::diagonal(&[
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        ]))
        .unwrap();
        assert!((joint_probability(&rho3, &pi, &phi).unwrap() - 0.1).abs() < 1e-15);
    }
}
