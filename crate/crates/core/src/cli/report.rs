//! Serializable reports and their JSON, CSV and text renderings.

use std::fmt::Write as _;

use serde::Serialize;

use crate::operator::{ComplexMatrix, Observable};
use crate::sampler::ConditionalEstimate;
use crate::scenarios::{OutcomeState, ScenarioReport};

/// Rounds to at least 10 significant digits and at least 10 decimals, so
/// values such as `2.8284271247` keep ten places after the point.
pub fn round_report(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let exponent = x.abs().log10().floor() as i32;
    let decimals = 10.max(9 - exponent);
    if decimals > 300 {
        return x;
    }
    let rounded: f64 = format!("{x:.*}", decimals as usize).parse().unwrap_or(x);
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventRow {
    pub label: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    /// Value of the random variable for table events.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<f64>,
    pub quasi: bool,
}

impl EventRow {
    /// A plain value such as an expectation; never flagged.
    pub fn new(label: impl Into<String>, value: f64, stderr: Option<f64>) -> Self {
        Self {
            label: label.into(),
            value: round_report(value),
            stderr: stderr.map(round_report),
            outcome: None,
            quasi: false,
        }
    }

    /// A (quasi-)probability, flagged when it leaves `[0, 1]`.
    pub fn probability(label: impl Into<String>, value: f64, stderr: Option<f64>) -> Self {
        let row = Self::new(label, value, stderr);
        Self { quasi: !(0.0..=1.0).contains(&row.value), ..row }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixRow {
    pub real: Vec<Vec<f64>>,
    pub imag: Vec<Vec<f64>>,
}

impl MatrixRow {
    fn new(m: &ComplexMatrix) -> Self {
        let rows = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.rows()).map(|r| (0..m.cols()).map(|c| round_report(f(&m[(r, c)]))).collect()).collect()
        };
        Self { real: rows(|z| z.re), imag: rows(|z| z.im) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateRow {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pvm: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<String>,
    pub preparation_prob: f64,
    pub matrix: MatrixRow,
    /// Per-entry standard errors of sampled reconstructions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<Vec<Vec<f64>>>,
    pub eigenvalues: Vec<f64>,
    /// Set when the smallest eigenvalue is negative.
    pub quasi: bool,
    /// Reduced state of subsystem `B` for bipartite scenarios.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reduced_b: Option<MatrixRow>,
}

impl StateRow {
    pub fn exact(state: &OutcomeState) -> Self {
        let eigenvalues: Vec<f64> = state.state.eigenvalues().into_iter().map(round_report).collect();
        Self {
            label: format!("R[{}]", state.outcome),
            pvm: Some(state.pvm.clone()),
            outcome: Some(state.outcome.clone()),
            preparation_prob: round_report(state.state.preparation_prob()),
            matrix: MatrixRow::new(state.state.matrix()),
            stderr: None,
            quasi: eigenvalues.first().is_some_and(|&v| v < 0.0),
            eigenvalues,
            reduced_b: state.reduced_b.as_ref().map(MatrixRow::new),
        }
    }

    pub fn sampled(label: String, pvm: Option<&str>, outcome: Option<&str>, est: &ConditionalEstimate) -> Self {
        let d = est.state.dim();
        let eigenvalues: Vec<f64> = est.state.eigenvalues().into_iter().map(round_report).collect();
        Self {
            label,
            pvm: pvm.map(str::to_string),
            outcome: outcome.map(str::to_string),
            preparation_prob: round_report(est.state.preparation_prob()),
            matrix: MatrixRow::new(est.state.matrix()),
            stderr: Some((0..d).map(|r| (0..d).map(|c| round_report(est.stderr(r, c))).collect()).collect()),
            quasi: eigenvalues.first().is_some_and(|&v| v < 0.0),
            eigenvalues,
            reduced_b: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub events: Vec<EventRow>,
    pub conditional_states: Vec<StateRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chsh: Option<f64>,
}

impl Report {
    pub fn new(scenario: impl Into<String>) -> Self {
        Self {
            scenario: scenario.into(),
            epsilon: None,
            shots: None,
            seed: None,
            events: Vec::new(),
            conditional_states: Vec::new(),
            chsh: None,
        }
    }

    /// Query values, table events and conditional states of an exact run.
    pub fn exact(report: &ScenarioReport) -> Self {
        let mut out = Self::new(report.name.clone());
        out.events = report.exact_values.iter().map(|(l, v)| EventRow::probability(l.clone(), *v, None)).collect();
        out.events.extend(table_events(report));
        out.conditional_states = report.conditional_states.iter().map(StateRow::exact).collect();
        out.chsh = report.aggregate.map(round_report);
        out
    }

    /// Only the event table and its aggregate.
    pub fn table(report: &ScenarioReport) -> Self {
        let mut out = Self::new(report.name.clone());
        out.events = table_events(report);
        out.chsh = report.aggregate.map(round_report);
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,value,stderr\n");
        let mut row = |label: &str, value: f64, stderr: Option<f64>| {
            let label = if label.contains([',', '"']) {
                format!("\"{}\"", label.replace('"', "\"\""))
            } else {
                label.to_string()
            };
            let stderr = stderr.map(|s| s.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{label},{value},{stderr}");
        };
        for e in &self.events {
            row(&e.label, e.value, e.stderr);
        }
        for s in &self.conditional_states {
            if let Some(outcome) = &s.outcome {
                row(&format!("p({outcome})"), s.preparation_prob, None);
            }
            for (r, line) in s.matrix.real.iter().enumerate() {
                for (c, re) in line.iter().enumerate() {
                    let err = s.stderr.as_ref().map(|e| e[r][c]);
                    row(&format!("{}({r};{c}).re", s.label), *re, err);
                    row(&format!("{}({r};{c}).im", s.label), s.matrix.imag[r][c], err);
                }
            }
            for (k, v) in s.eigenvalues.iter().enumerate() {
                row(&format!("{}.eig{k}", s.label), *v, None);
            }
        }
        if let Some(chsh) = self.chsh {
            row("chsh", chsh, None);
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        if let Some(eps) = self.epsilon {
            let _ = writeln!(out, "epsilon:  {eps}");
        }
        if let Some(shots) = self.shots {
            let _ = writeln!(out, "shots:    {shots}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed:     {seed}");
        }
        if !self.events.is_empty() {
            let width = self.events.iter().map(|e| e.label.chars().count()).max().unwrap_or(5).max(5);
            let _ = writeln!(out, "\n{:<width$}  {:>14}  {:>14}", "label", "value", "stderr");
            for e in &self.events {
                let stderr = e.stderr.map(|s| format!("{s:.10}")).unwrap_or_default();
                let marker = if e.quasi { "  quasi" } else { "" };
                let _ = writeln!(out, "{:<width$}  {:>+14.10}  {stderr:>14}{marker}", e.label, e.value);
            }
        }
        for s in &self.conditional_states {
            let _ = writeln!(out, "\n{}  p = {:.10}", s.label, s.preparation_prob);
            write_matrix(&mut out, &s.matrix);
            if let Some(err) = &s.stderr {
                let _ = writeln!(out, "  stderr");
                for line in err {
                    let cells: Vec<String> = line.iter().map(|v| format!("{v:.10}")).collect();
                    let _ = writeln!(out, "    [ {} ]", cells.join("  "));
                }
            }
            let eig: Vec<String> = s.eigenvalues.iter().map(|v| format!("{v:+.10}")).collect();
            let marker = if s.quasi { "  quasi" } else { "" };
            let _ = writeln!(out, "  eigenvalues: {}{marker}", eig.join(" "));
            if let Some(reduced) = &s.reduced_b {
                let _ = writeln!(out, "  reduced state of B");
                write_matrix(&mut out, reduced);
            }
        }
        if let Some(chsh) = self.chsh {
            let _ = writeln!(out, "\nchsh: {chsh:+.10}");
        }
        out
    }
}

fn write_matrix(out: &mut String, m: &MatrixRow) {
    for (re, im) in m.real.iter().zip(&m.imag) {
        let cells: Vec<String> = re.iter().zip(im).map(|(a, b)| format!("{a:+.10}{b:+.10}i")).collect();
        let _ = writeln!(out, "    [ {} ]", cells.join("  "));
    }
}

fn table_events(report: &ScenarioReport) -> Vec<EventRow> {
    report
        .events
        .iter()
        .map(|e| EventRow { outcome: Some(e.value), ..EventRow::probability(e.label.clone(), e.probability, None) })
        .collect()
}
