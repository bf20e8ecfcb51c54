//! Invariant self-test run by `weakstat check`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operator::{ComplexMatrix, Observable, Subsystem};
use crate::random;
use crate::sampler::{sample_sequential, SampleConfig};
use crate::scenarios::{
    bell_chsh_scenario, bell_joint_operators, bell_joint_table, double_slit_scenario, entangled_scenario, evaluate,
    grid_label,
};
use crate::tomography::{
    build_weak_povm, conditional_probability, conditional_state, decompose, joint_probability, mixture_residual,
    outcome_probabilities, reconstruct_density, reconstruct_expectations, TomographyBasis,
};

const BELL_SOURCE: &str = include_str!("../../../../scenarios/bell.ws");

pub struct CheckResult {
    pub name: &'static str,
    /// Largest deviation found.
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

fn max(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn bell_spectra() -> Result<f64> {
    let s = std::f64::consts::SQRT_2;
    Ok(max(bell_joint_operators().iter().map(|(_, op)| {
        let ev = op.eig().values;
        (ev[0] - (1.0 - s) / 4.0).abs().max((ev[1] - (1.0 + s) / 4.0).abs())
    })))
}

fn bell_table() -> Result<f64> {
    let report = bell_joint_table(&bell_chsh_scenario()?)?;
    let s = std::f64::consts::SQRT_2;
    let expected =
        [(2, 0, (1.0 + s) / 4.0), (0, 2, (1.0 + s) / 4.0), (-2, 0, (1.0 - s) / 4.0), (0, -2, (1.0 - s) / 4.0)];
    let cells = expected
        .iter()
        .map(|&(a, b, p)| report.event(&grid_label(a, b)).map_or(f64::INFINITY, |e| (e.probability - p).abs()));
    let mass: f64 = report.events.iter().map(|e| e.probability).sum();
    Ok(max(cells).max((mass - 1.0).abs()))
}

fn chsh() -> Result<f64> {
    let report = bell_joint_table(&bell_chsh_scenario()?)?;
    Ok((report.aggregate.unwrap_or(f64::NAN) - 2.0 * std::f64::consts::SQRT_2).abs())
}

fn double_slit() -> Result<f64> {
    let report = evaluate(&double_slit_scenario()?)?;
    let r1 = ComplexMatrix::from_real_rows(&[vec![1.0, 0.5], vec![0.5, 0.0]])?;
    let r2 = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 1.0]])?;
    let dev = |l: &str, r: &ComplexMatrix| report.state(l).map_or(f64::INFINITY, |s| s.state.matrix().max_abs_diff(r));
    let coherence = |l: &str| report.value(l).map_or(f64::INFINITY, |v| (v - 1.0).abs());
    Ok(max([dev("path1", &r1), dev("path2", &r2), coherence("coh_path1"), coherence("coh_path2")]))
}

fn mixture_identity(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in 2..=5 {
        for _ in 0..20 {
            let rho = random::density(d, rng);
            let parts = decompose(&rho, &random::rank_one_pvm(d, rng))?;
            worst = worst.max(mixture_residual(&rho, &parts)?);
        }
    }
    Ok(worst)
}

fn entanglement_locality(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        for _ in 0..10 {
            let f = random::ket(d, rng);
            let report = evaluate(&entangled_scenario(d, &f)?)?;
            let state = report.state("f0").expect("f0 has probability 1/d");
            let reduced = state.state.matrix().partial_trace(d, d, Subsystem::B)?;
            worst = worst.max(reduced.max_abs_diff(f.conj().projector().matrix()));
        }
    }
    Ok(worst)
}

fn consistency_chain(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let d = 2 + k % 3;
        let rho = random::density(d, rng);
        let pvm = random::rank_one_pvm(d, rng);
        let effect = random::hermitian(d, rng);
        let (_, projector) = &pvm.outcomes()[0];
        let cond = conditional_state(&rho, projector)?;
        let lhs = joint_probability(&rho, projector, &effect)?;
        worst = worst.max((lhs - cond.preparation_prob() * conditional_probability(&cond, &effect)?).abs());
    }
    Ok(worst)
}

fn tomography_round_trip(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for d in 2..=4 {
        let basis = TomographyBasis::gell_mann(d)?;
        let povm = build_weak_povm(&basis, 0.05)?;
        let rho = random::density(d, rng);
        let expectations = reconstruct_expectations(&outcome_probabilities(&rho, &povm)?, &povm)?;
        worst = worst.max(reconstruct_density(&expectations, &basis)?.matrix().max_abs_diff(rho.matrix()));
    }
    Ok(worst)
}

fn shard_determinism() -> Result<f64> {
    let scenario = double_slit_scenario()?;
    let povm = build_weak_povm(&TomographyBasis::pauli(), 0.05)?;
    let cfg = SampleConfig::new(100_000, 7)?;
    let one = sample_sequential(&scenario.initial, &povm, &scenario.pvms[0], &cfg)?;
    let four = sample_sequential(&scenario.initial, &povm, &scenario.pvms[0], &cfg.with_shards(4)?)?;
    Ok(if one == four { 0.0 } else { 1.0 })
}

fn dsl_equivalence() -> Result<f64> {
    let Ok(loaded) = crate::dsl::load(BELL_SOURCE, "bell") else {
        return Ok(f64::INFINITY);
    };
    let dsl = loaded.scenario;
    let builtin = bell_chsh_scenario()?;
    let mut worst = dsl.initial.matrix().max_abs_diff(builtin.initial.matrix());
    for (a, b) in dsl.pvms.iter().zip(&builtin.pvms) {
        for ((_, pa), (_, pb)) in a.outcomes().iter().zip(b.outcomes()) {
            worst = worst.max(pa.matrix().max_abs_diff(pb.matrix()));
        }
    }
    for ((_, a), (_, b)) in dsl.probes.iter().zip(&builtin.probes) {
        worst = worst.max(a.matrix().max_abs_diff(b.matrix()));
    }
    Ok(worst)
}

/// Runs every check with a fixed seed.
pub fn run_checks() -> Vec<(CheckResult, Option<String>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let checks: Vec<(&'static str, f64, Result<f64>)> = vec![
        ("bell spectra", 1e-12, bell_spectra()),
        ("bell table", 1e-10, bell_table()),
        ("chsh value", 1e-10, chsh()),
        ("double-slit states", 1e-12, double_slit()),
        ("mixture identity", 1e-10, mixture_identity(&mut rng)),
        ("entanglement locality", 1e-10, entanglement_locality(&mut rng)),
        ("consistency chain", 1e-12, consistency_chain(&mut rng)),
        ("tomography round trip", 1e-9, tomography_round_trip(&mut rng)),
        ("shard determinism", 0.0, shard_determinism()),
        ("bell.ws equivalence", 1e-12, dsl_equivalence()),
    ];
    checks
        .into_iter()
        .map(|(name, tolerance, result)| match result {
            Ok(residual) => (CheckResult { name, residual, tolerance }, None),
            Err(e) => (CheckResult { name, residual: f64::INFINITY, tolerance }, Some(e.to_string())),
        })
        .collect()
}
