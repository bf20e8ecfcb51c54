//! Joint quasi-probabilities of `X`, `Y`, `S_+`, `S_−` and the CHSH average.
//!
//! `A` is measured in the `S_+` or the `S_−` basis; for each branch the
//! symmetrized joint probability `p(s, x, y)` of the `A` outcome and the
//! `B`-local operator `Π(x, y)` is computed exactly. When `x = y` only
//! `(X+Y)S_+` can be nonzero, and when `x ≠ y` only `(X−Y)S_−`, so the events
//! of the pair `((X+Y)S_+, (X−Y)S_−)` draw their weight from the `S_+` branch
//! or the `S_−` branch respectively. All nine cells of the `{−2, 0, +2}²` grid
//! are reported; five of them are impossible and carry zero weight.

use super::{evaluate, Event, Scenario, ScenarioReport};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, HermitianOperator};
use crate::tomography::joint_probability;

/// Cells `((X+Y)S_+, (X−Y)S_−)` in report order: the four populated events
/// first, then the impossible ones.
pub const BELL_GRID: [(i32, i32); 9] = [(2, 0), (0, 2), (-2, 0), (0, -2), (0, 0), (2, 2), (2, -2), (-2, 2), (-2, -2)];

const SIGNS: [(i32, i32, &str); 4] = [(1, 1, "pi_pp"), (1, -1, "pi_pm"), (-1, 1, "pi_mp"), (-1, -1, "pi_mm")];

pub fn grid_label(plus: i32, minus: i32) -> String {
    format!("(X+Y)S+={plus:+};(X-Y)S-={minus:+}").replace("=+0", "=0")
}

/// `Π(x, y) = (1 + xX + yY)/4` on a single qubit, labelled `pi_pp`, `pi_pm`,
/// `pi_mp`, `pi_mm`.
pub fn bell_joint_operators() -> Vec<(String, HermitianOperator)> {
    let x = ComplexMatrix::pauli_x();
    let y = ComplexMatrix::pauli_y();
    SIGNS
        .iter()
        .map(|&(sx, sy, label)| {
            let m = ComplexMatrix::identity(2)
                .add(&x.scale_real(sx as f64))
                .and_then(|m| m.add(&y.scale_real(sy as f64)))
                .expect("2x2")
                .scale_real(0.25);
            (label.to_string(), HermitianOperator::new(m).expect("Hermitian"))
        })
        .collect()
}

fn branch_outcomes<'a>(scenario: &'a Scenario, pvm: &str) -> Result<[&'a crate::operator::Projector; 2]> {
    let pvm = scenario.pvm(pvm).ok_or_else(|| Error::WrongScenario(format!("missing PVM {pvm}")))?;
    match pvm.outcomes() {
        [(_, up), (_, down)] => Ok([up, down]),
        _ => Err(Error::WrongScenario(format!("PVM {} must have exactly two outcomes", pvm.name()))),
    }
}

/// Joint-probability table and CHSH aggregate for a Bell/CHSH scenario.
pub fn bell_joint_table(scenario: &Scenario) -> Result<ScenarioReport> {
    if scenario.dim_a != 2 || scenario.dim_b != 2 {
        return Err(Error::WrongScenario(format!("needs two qubits, got {}x{}", scenario.dim_a, scenario.dim_b)));
    }
    let splus = branch_outcomes(scenario, "splus")?;
    let sminus = branch_outcomes(scenario, "sminus")?;
    for (_, _, label) in SIGNS {
        if scenario.probe(label).is_none() {
            return Err(Error::WrongScenario(format!("missing probe {label}")));
        }
    }

    let mut report = evaluate(scenario)?;
    let rho = &scenario.initial;
    let mut grid = [0.0f64; 9];
    let cell = |plus: i32, minus: i32| BELL_GRID.iter().position(|&c| c == (plus, minus)).expect("grid cell");

    for (branch, outcomes) in [("splus", &splus), ("sminus", &sminus)] {
        let mut branch_dist = [0.0f64; 3];
        for (s_index, projector) in outcomes.iter().enumerate() {
            let s = if s_index == 0 { 1 } else { -1 };
            let outcome_label = scenario.pvm(branch).expect("checked").outcomes()[s_index].0.clone();
            for &(x, y, probe_label) in &SIGNS {
                let probe = scenario.probe(probe_label).expect("checked");
                let p = joint_probability(rho, projector, probe)?;
                report.exact_values.push((format!("p({outcome_label},{probe_label})"), p));
                let value = if branch == "splus" { (x + y) * s } else { (x - y) * s };
                branch_dist[(1 - value / 2) as usize] += p;
                match (branch, x == y) {
                    ("splus", true) => grid[cell((x + y) * s, 0)] += p,
                    ("sminus", false) => grid[cell(0, (x - y) * s)] += p,
                    _ => {}
                }
            }
        }
        let product = if branch == "splus" { "(X+Y)S+" } else { "(X-Y)S-" };
        for (k, v) in [2, 0, -2].iter().enumerate() {
            report.exact_values.push((format!("{branch}:{product}={v:+}").replace("=+0", "=0"), branch_dist[k]));
        }
    }

    report.events = BELL_GRID
        .iter()
        .zip(grid)
        .map(|(&(a, b), p)| Event { label: grid_label(a, b), value: (a + b) as f64, probability: p })
        .collect();
    report.aggregate = Some(chsh_value(&report)?);
    Ok(report)
}

/// `E[(X+Y)S_+ + (X−Y)S_−] = Σ value × probability` over the full grid.
pub fn chsh_value(report: &ScenarioReport) -> Result<f64> {
    BELL_GRID
        .iter()
        .map(|&(a, b)| {
            let label = grid_label(a, b);
            report.event(&label).map(|e| (a + b) as f64 * e.probability).ok_or(Error::MissingEvents(label))
        })
        .sum()
}
