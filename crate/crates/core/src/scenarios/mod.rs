//! Declarative scenarios and their exact evaluation.

mod bell;
mod builtin;

pub use bell::{bell_joint_operators, bell_joint_table, chsh_value, grid_label, BELL_GRID};
pub use builtin::{
    bell_chsh_scenario, builtin, complete_basis, default_entangled_ket, double_slit_scenario, entangled_scenario,
    maximally_entangled, BUILTIN_NAMES,
};

use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, Observable, Subsystem};
use crate::tomography::{
    conditional_probability, decompose, joint_probability, mixture_residual, ConditionalState, Pvm,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum QueryKind {
    /// `p(f, g | i)`, symmetrized joint probability.
    Joint,
    /// `p(g | i, f) = Tr{R_f Φ_g}`.
    Conditional,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub label: String,
    pub kind: QueryKind,
    /// Label of a final (post-selection) outcome in one of the PVMs.
    pub outcome: String,
    /// Label of a probe operator.
    pub effect: String,
}

impl Query {
    pub fn joint(label: &str, outcome: &str, effect: &str) -> Self {
        Self { label: label.into(), kind: QueryKind::Joint, outcome: outcome.into(), effect: effect.into() }
    }

    pub fn conditional(label: &str, outcome: &str, effect: &str) -> Self {
        Self { label: label.into(), kind: QueryKind::Conditional, outcome: outcome.into(), effect: effect.into() }
    }
}

/// Initial state, final measurements, probe operators and queries on a
/// (possibly bipartite) Hilbert space of dimension `dim_a × dim_b`.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub dim_a: usize,
    pub dim_b: usize,
    pub initial: DensityMatrix,
    pub pvms: Vec<Pvm>,
    pub probes: Vec<(String, HermitianOperator)>,
    pub queries: Vec<Query>,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        (dim_a, dim_b): (usize, usize),
        initial: DensityMatrix,
        pvms: Vec<Pvm>,
        probes: Vec<(String, HermitianOperator)>,
        queries: Vec<Query>,
    ) -> Result<Self> {
        let dim = dim_a * dim_b;
        if dim == 0 {
            return Err(Error::BadDimension("scenario dimension must be positive".into()));
        }
        if initial.dim() != dim {
            return Err(Error::DimMismatch(format!("initial state has dimension {}, expected {dim}", initial.dim())));
        }
        let mut outcome_labels: Vec<&str> = Vec::new();
        for pvm in &pvms {
            if pvm.dim() != dim {
                return Err(Error::DimMismatch(format!(
                    "PVM {} has dimension {}, expected {dim}",
                    pvm.name(),
                    pvm.dim()
                )));
            }
            for label in pvm.labels() {
                if outcome_labels.contains(&label) {
                    return Err(Error::UnknownLabel(format!("outcome label {label} appears in more than one PVM")));
                }
                outcome_labels.push(label);
            }
        }
        for (label, op) in &probes {
            if op.dim() != dim {
                return Err(Error::DimMismatch(format!("probe {label} has dimension {}, expected {dim}", op.dim())));
            }
        }
        for q in &queries {
            if !outcome_labels.contains(&q.outcome.as_str()) {
                return Err(Error::UnknownLabel(format!("query {} refers to unknown outcome {}", q.label, q.outcome)));
            }
            if !probes.iter().any(|(l, _)| l == &q.effect) {
                return Err(Error::UnknownLabel(format!("query {} refers to unknown probe {}", q.label, q.effect)));
            }
        }
        Ok(Self { name: name.into(), dim_a, dim_b, initial, pvms, probes, queries })
    }

    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn is_bipartite(&self) -> bool {
        self.dim_a > 1 && self.dim_b > 1
    }

    pub fn probe(&self, label: &str) -> Option<&HermitianOperator> {
        self.probes.iter().find(|(l, _)| l == label).map(|(_, op)| op)
    }

    pub fn pvm(&self, name: &str) -> Option<&Pvm> {
        self.pvms.iter().find(|p| p.name() == name)
    }

    /// Same scenario with a different initial state.
    pub fn with_initial(&self, initial: DensityMatrix) -> Result<Self> {
        Self::new(
            self.name.clone(),
            (self.dim_a, self.dim_b),
            initial,
            self.pvms.clone(),
            self.probes.clone(),
            self.queries.clone(),
        )
    }
}

/// Post-selected state of one final outcome.
#[derive(Clone, Debug)]
pub struct OutcomeState {
    pub pvm: String,
    pub outcome: String,
    pub state: ConditionalState,
    /// `Tr_A{R_f}` for bipartite scenarios.
    pub reduced_b: Option<ComplexMatrix>,
}

/// A value-labelled event with its (quasi-)probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub label: String,
    pub value: f64,
    pub probability: f64,
}

#[derive(Clone, Debug)]
pub struct ScenarioReport {
    pub name: String,
    /// Query label → value, in query order.
    pub exact_values: Vec<(String, f64)>,
    pub conditional_states: Vec<OutcomeState>,
    /// Ascending spectra of conditional states (`R[label]`) and probes (`probe[label]`).
    pub eigen_summaries: Vec<(String, Vec<f64>)>,
    /// PVM name → `max |Σ_f p(f) R_f − ρ|`.
    pub mixture_residuals: Vec<(String, f64)>,
    pub events: Vec<Event>,
    pub aggregate: Option<f64>,
}

impl ScenarioReport {
    pub fn value(&self, label: &str) -> Option<f64> {
        self.exact_values.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }

    pub fn state(&self, outcome: &str) -> Option<&OutcomeState> {
        self.conditional_states.iter().find(|s| s.outcome == outcome)
    }

    pub fn event(&self, label: &str) -> Option<&Event> {
        self.events.iter().find(|e| e.label == label)
    }

    pub fn eigenvalues(&self, label: &str) -> Option<&[f64]> {
        self.eigen_summaries.iter().find(|(l, _)| l == label).map(|(_, v)| v.as_slice())
    }
}

/// Exact report: every conditional state, query, spectrum and mixture check.
pub fn evaluate(scenario: &Scenario) -> Result<ScenarioReport> {
    let rho = &scenario.initial;
    let mut conditional_states = Vec::new();
    let mut mixture_residuals = Vec::new();
    let mut eigen_summaries = Vec::new();
    for pvm in &scenario.pvms {
        let parts = decompose(rho, pvm)?;
        mixture_residuals.push((pvm.name().to_string(), mixture_residual(rho, &parts)?));
        for (label, state) in parts {
            let reduced_b = if scenario.is_bipartite() {
                Some(state.matrix().partial_trace(scenario.dim_a, scenario.dim_b, Subsystem::B)?)
            } else {
                None
            };
            eigen_summaries.push((format!("R[{label}]"), state.eigenvalues()));
            conditional_states.push(OutcomeState { pvm: pvm.name().to_string(), outcome: label, state, reduced_b });
        }
    }
    for (label, op) in &scenario.probes {
        eigen_summaries.push((format!("probe[{label}]"), op.eig().values));
    }

    let mut exact_values = Vec::with_capacity(scenario.queries.len());
    for q in &scenario.queries {
        let effect = scenario.probe(&q.effect).ok_or_else(|| Error::UnknownLabel(q.effect.clone()))?;
        let value = match q.kind {
            QueryKind::Joint => {
                let projector = scenario
                    .pvms
                    .iter()
                    .find_map(|p| p.projector(&q.outcome))
                    .ok_or_else(|| Error::UnknownLabel(q.outcome.clone()))?;
                joint_probability(rho, projector, effect)?
            }
            QueryKind::Conditional => {
                let state = conditional_states
                    .iter()
                    .find(|s| s.outcome == q.outcome)
                    .ok_or_else(|| Error::ZeroProbabilityOutcome { label: q.outcome.clone(), prob: 0.0 })?;
                conditional_probability(&state.state, effect)?
            }
        };
        exact_values.push((q.label.clone(), value));
    }

    Ok(ScenarioReport {
        name: scenario.name.clone(),
        exact_values,
        conditional_states,
        eigen_summaries,
        mixture_residuals,
        events: Vec::new(),
        aggregate: None,
    })
}

/// Full report for any scenario; Bell/CHSH scenarios also get the event table
/// and CHSH aggregate.
pub fn run(scenario: &Scenario) -> Result<ScenarioReport> {
    match bell_joint_table(scenario) {
        Ok(report) => Ok(report),
        Err(Error::WrongScenario(_)) => evaluate(scenario),
        Err(e) => Err(e),
    }
}
