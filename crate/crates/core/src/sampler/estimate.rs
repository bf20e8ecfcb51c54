//! Estimators of probe expectations and conditional states from counts.
//!
//! Every estimate here is an affine function `Σ_m a_m p̂_m + c` of the
//! multinomial frequencies `p̂`, so its variance is exactly
//! `(Σ a_m² p_m − (Σ a_m p_m)²) / n`, evaluated at `p̂`.

use num_complex::Complex64 as C64;

use super::CountTable;
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator, Observable};
use crate::tomography::{reconstruct_density, ConditionalState, Expectations, TomographyBasis, WeakPovm};

/// Post-selected shots required for every probe before a conditional state
/// is estimated.
pub const MIN_POST_SELECTED: u64 = 100;

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub estimates: Vec<(String, Estimate)>,
    pub shots_used: u64,
}

impl EstimateReport {
    pub fn get(&self, label: &str) -> Option<Estimate> {
        self.estimates.iter().find(|(l, _)| l == label).map(|(_, e)| *e)
    }

    pub fn expectations(&self) -> Expectations {
        self.estimates.iter().map(|(l, e)| (l.clone(), e.mean)).collect()
    }
}

/// `⟨S_k⟩ = Σ_m a_km p̂_m + c_k`: the sign-corrected average of
/// `(p̂_m − w_m)/(w_m ε)` over the outcomes measuring probe `k`.
struct LinearEstimator {
    labels: Vec<String>,
    coeffs: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl LinearEstimator {
    fn new(povm: &WeakPovm) -> Self {
        let eps = povm.strength();
        let labels = povm.probe_labels();
        let mut coeffs = Vec::with_capacity(labels.len());
        let mut offsets = Vec::with_capacity(labels.len());
        for label in &labels {
            let n = povm.outcomes().iter().filter(|o| &o.label == label).count() as f64;
            let mut a = vec![0.0; povm.len()];
            let mut c = 0.0;
            for (m, o) in povm.outcomes().iter().enumerate() {
                if &o.label == label {
                    a[m] = o.sign / (n * o.weight * eps);
                    c -= o.sign / (n * eps);
                }
            }
            coeffs.push(a);
            offsets.push(c);
        }
        Self { labels, coeffs, offsets }
    }

    fn report(&self, freqs: &[f64], n: u64) -> EstimateReport {
        let estimates = self
            .labels
            .iter()
            .zip(&self.coeffs)
            .zip(&self.offsets)
            .map(|((label, a), c)| {
                let mean = dot(a, freqs) + c;
                (label.clone(), Estimate { mean, stderr: affine_stderr(a, freqs, n) })
            })
            .collect();
        EstimateReport { estimates, shots_used: n }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn affine_stderr(a: &[f64], freqs: &[f64], n: u64) -> f64 {
    let mean = dot(a, freqs);
    let second: f64 = a.iter().zip(freqs).map(|(x, p)| x * x * p).sum();
    ((second - mean * mean).max(0.0) / n as f64).sqrt()
}

fn frequencies(counts: &[u64]) -> (Vec<f64>, u64) {
    let n: u64 = counts.iter().sum();
    let freqs = counts.iter().map(|&c| if n == 0 { 0.0 } else { c as f64 / n as f64 }).collect();
    (freqs, n)
}

fn check_table(counts: &CountTable, povm: &WeakPovm) -> Result<()> {
    if counts.weak_labels().len() != povm.len() {
        return Err(Error::DimMismatch(format!(
            "count table has {} weak outcomes, POVM has {}",
            counts.weak_labels().len(),
            povm.len()
        )));
    }
    Ok(())
}

/// Probe expectations from the weak-outcome counts, summed over any final
/// outcomes.
pub fn estimate_expectations(counts: &CountTable, povm: &WeakPovm) -> Result<EstimateReport> {
    check_table(counts, povm)?;
    let (freqs, n) = frequencies(&counts.weak_marginal());
    Ok(LinearEstimator::new(povm).report(&freqs, n))
}

/// Reconstructed conditional state with per-entry uncertainties.
#[derive(Clone, Debug)]
pub struct ConditionalEstimate {
    pub state: ConditionalState,
    /// Probe expectations within the post-selected sub-ensemble.
    pub expectations: EstimateReport,
    /// Standard error of each entry of `R̂` (real and imaginary parts
    /// combined in quadrature), row-major.
    pub entry_stderr: Vec<f64>,
    pub post_selected: u64,
}

impl ConditionalEstimate {
    pub fn stderr(&self, row: usize, col: usize) -> f64 {
        self.entry_stderr[row * self.state.dim() + col]
    }
}

/// Post-selects on `outcome_f`, estimates every probe in the sub-ensemble and
/// reconstructs `R̂_f`.
pub fn estimate_conditional(
    counts: &CountTable,
    povm: &WeakPovm,
    basis: &TomographyBasis,
    outcome_f: &str,
) -> Result<ConditionalEstimate> {
    check_table(counts, povm)?;
    if basis.dim() != povm.dim() {
        return Err(Error::DimMismatch(format!("basis dimension {} vs POVM dimension {}", basis.dim(), povm.dim())));
    }
    let selected = counts.post_selected(outcome_f)?;
    for label in povm.probe_labels() {
        let n: u64 = povm.outcomes().iter().zip(&selected).filter(|(o, _)| o.label == label).map(|(_, c)| c).sum();
        if n < MIN_POST_SELECTED {
            return Err(Error::InsufficientPostSelection {
                outcome: outcome_f.to_string(),
                detail: format!("{n} shots for probe {label}, need {MIN_POST_SELECTED}"),
            });
        }
    }

    let (freqs, n) = frequencies(&selected);
    let estimator = LinearEstimator::new(povm);
    let expectations = estimator.report(&freqs, n);
    let rho = reconstruct_density(&expectations.expectations(), basis)?;
    let rho = HermitianOperator::new(rho.matrix().scale_real(1.0 / rho.trace()))?;

    let entry_stderr = entry_stderr(&estimator, basis, &freqs, n)?;
    let state = ConditionalState::new(rho, n as f64 / counts.shots() as f64)?;
    Ok(ConditionalEstimate { state, expectations, entry_stderr, post_selected: n })
}

/// `R̂_ab = δ_ab/d + Σ_k B_k,ab ⟨S_k⟩` with `B_k = Σ_j G⁻¹_jk S_j`, so each
/// entry is itself affine in the post-selected frequencies.
fn entry_stderr(estimator: &LinearEstimator, basis: &TomographyBasis, freqs: &[f64], n: u64) -> Result<Vec<f64>> {
    let d = basis.dim();
    let probes: Vec<&HermitianOperator> = basis.probes().map(|(_, op)| op).collect();
    let mut b_ops = Vec::with_capacity(probes.len());
    for (k, label) in basis.probes().map(|(l, _)| l).enumerate() {
        let idx = estimator
            .labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(format!("POVM has no probe {label}")))?;
        let mut b = ComplexMatrix::zeros(d, d);
        for (j, op) in probes.iter().enumerate() {
            b = b.add(&op.matrix().scale_real(basis.traceless_inverse(j, k)))?;
        }
        b_ops.push((idx, b));
    }

    let mut out = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            let mut alpha = vec![C64::new(0.0, 0.0); freqs.len()];
            for (idx, b) in &b_ops {
                for (a, coeff) in alpha.iter_mut().zip(&estimator.coeffs[*idx]) {
                    *a += b[(r, c)] * coeff;
                }
            }
            let re: Vec<f64> = alpha.iter().map(|a| a.re).collect();
            let im: Vec<f64> = alpha.iter().map(|a| a.im).collect();
            out.push(affine_stderr(&re, freqs, n).hypot(affine_stderr(&im, freqs, n)));
        }
    }
    Ok(out)
}

/// `R̂_f` alone; see `estimate_conditional`.
pub fn estimate_conditional_state(
    counts: &CountTable,
    povm: &WeakPovm,
    basis: &TomographyBasis,
    outcome_f: &str,
) -> Result<ConditionalState> {
    estimate_conditional(counts, povm, basis, outcome_f).map(|e| e.state)
}
