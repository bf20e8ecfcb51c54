//! Finite-shot simulation of weak measurements.
//!
//! Two models are provided. `sample_weak` draws outcomes of the weak POVM
//! alone. `sample_sequential` applies the Kraus operators `M_m = √E_m`, then a
//! projective measurement on the disturbed state, so its joint statistics
//! agree with the symmetrized `p(m, f)` up to `O(ε²)`.
//!
//! Randomness is indexed by shot, so counts depend on `(shots, seed)` only and
//! never on how the work is split across shards.

mod estimate;
mod stream;

pub use estimate::{
    estimate_conditional, estimate_conditional_state, estimate_expectations, ConditionalEstimate, Estimate,
    EstimateReport, MIN_POST_SELECTED,
};

use std::num::{NonZeroU64, NonZeroUsize};

use crate::error::{Error, Result};
use crate::operator::{DensityMatrix, HermitianOperator, Observable};
use crate::tomography::{outcome_probabilities, Pvm, WeakPovm};
use stream::{categorical, cumulative, ShotStream};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct SampleConfig {
    shots: NonZeroU64,
    seed: u64,
    shards: NonZeroUsize,
}

impl SampleConfig {
    pub fn new(shots: u64, seed: u64) -> Result<Self> {
        let shots = NonZeroU64::new(shots).ok_or_else(|| Error::InvalidConfig("shots must be positive".into()))?;
        Ok(Self { shots, seed, shards: NonZeroUsize::MIN })
    }

    /// Number of worker threads. Does not affect the result.
    pub fn with_shards(self, shards: usize) -> Result<Self> {
        let shards = NonZeroUsize::new(shards).ok_or_else(|| Error::InvalidConfig("shards must be positive".into()))?;
        Ok(Self { shards, ..self })
    }

    pub fn shots(&self) -> u64 {
        self.shots.get()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn shards(&self) -> usize {
        self.shards.get()
    }
}

/// Outcome counts of a weak measurement, optionally jointly with a final
/// projective outcome. Stored row-major, weak outcome first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    weak_labels: Vec<String>,
    final_labels: Vec<String>,
    counts: Vec<u64>,
    shots: u64,
}

impl CountTable {
    pub fn new(weak_labels: Vec<String>, final_labels: Vec<String>, counts: Vec<u64>) -> Result<Self> {
        let cells = weak_labels.len() * final_labels.len().max(1);
        if weak_labels.is_empty() || counts.len() != cells {
            return Err(Error::DimMismatch(format!("{} counts for {cells} cells", counts.len())));
        }
        let shots = counts.iter().sum();
        Ok(Self { weak_labels, final_labels, counts, shots })
    }

    /// Counts proportional to `probs`, rounded to integers. With a large
    /// `shots` this is the infinite-sample limit of a sampled table.
    pub fn from_probabilities(
        weak_labels: Vec<String>,
        final_labels: Vec<String>,
        probs: &[f64],
        shots: u64,
    ) -> Result<Self> {
        let counts = probs.iter().map(|p| (p.max(0.0) * shots as f64).round() as u64).collect();
        Self::new(weak_labels, final_labels, counts)
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn weak_labels(&self) -> &[String] {
        &self.weak_labels
    }

    /// Empty for tables produced by `sample_weak`.
    pub fn final_labels(&self) -> &[String] {
        &self.final_labels
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    fn n_final(&self) -> usize {
        self.final_labels.len().max(1)
    }

    pub fn get(&self, weak: usize, final_outcome: usize) -> u64 {
        self.counts[weak * self.n_final() + final_outcome]
    }

    /// Counts of the weak outcomes summed over final outcomes.
    pub fn weak_marginal(&self) -> Vec<u64> {
        self.counts.chunks(self.n_final()).map(|row| row.iter().sum()).collect()
    }

    /// Weak-outcome counts among shots whose final outcome is `label`.
    pub fn post_selected(&self, label: &str) -> Result<Vec<u64>> {
        let f = self
            .final_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(format!("final outcome {label}")))?;
        Ok((0..self.weak_labels.len()).map(|m| self.get(m, f)).collect())
    }

    /// `(label, count)` per cell; joint cells are labelled `m|f`.
    pub fn entries(&self) -> Vec<(String, u64)> {
        let mut out = Vec::with_capacity(self.counts.len());
        for (m, weak) in self.weak_labels.iter().enumerate() {
            if self.final_labels.is_empty() {
                out.push((weak.clone(), self.get(m, 0)));
            }
            for (f, fin) in self.final_labels.iter().enumerate() {
                out.push((format!("{weak}|{fin}"), self.get(m, f)));
            }
        }
        out
    }
}

fn check_dims(what: &str, a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch(format!("{what}: dimensions {a} and {b}")));
    }
    Ok(())
}

fn weak_labels(povm: &WeakPovm) -> Vec<String> {
    povm.outcomes().iter().map(|o| o.display_label()).collect()
}

/// Draws `shots` weak outcomes from `p(m) = Tr{ρ E_m}`.
pub fn sample_weak(rho: &DensityMatrix, povm: &WeakPovm, cfg: &SampleConfig) -> Result<CountTable> {
    check_dims("sample_weak", rho.dim(), povm.dim())?;
    let probs = outcome_probabilities(rho, povm)?;
    let rows = vec![vec![1.0]; probs.len()];
    let counts = draw(cfg, &cumulative(&probs), &rows);
    CountTable::new(weak_labels(povm), Vec::new(), counts)
}

/// `√E_m` for every outcome.
pub fn kraus_operators(povm: &WeakPovm) -> Result<Vec<HermitianOperator>> {
    povm.outcomes().iter().map(|o| o.effect().operator().sqrt_psd()).collect()
}

/// Exact statistics of the sequential model,
/// `p(m, f) = Tr{Π_f M_m ρ M_m†}`, row-major with the weak outcome first.
pub fn sequential_distribution(rho: &DensityMatrix, povm: &WeakPovm, pvm: &Pvm) -> Result<Vec<f64>> {
    check_dims("sequential model", rho.dim(), povm.dim())?;
    check_dims("sequential model", rho.dim(), pvm.dim())?;
    let mut out = Vec::with_capacity(povm.len() * pvm.len());
    for kraus in kraus_operators(povm)? {
        let disturbed = kraus.matrix().matmul(rho.matrix())?.matmul(kraus.matrix())?;
        for (_, projector) in pvm.outcomes() {
            out.push(disturbed.trace_product(projector.matrix())?.re);
        }
    }
    Ok(out)
}

/// Weak measurement with back-action `√E_m` followed by `pvm` on the
/// disturbed state; records `(m, f)` per shot.
pub fn sample_sequential(rho: &DensityMatrix, povm: &WeakPovm, pvm: &Pvm, cfg: &SampleConfig) -> Result<CountTable> {
    let joint = sequential_distribution(rho, povm, pvm)?;
    let rows: Vec<Vec<f64>> = joint.chunks(pvm.len()).map(cumulative).collect();
    let weak: Vec<f64> = rows.iter().map(|r| *r.last().expect("nonempty PVM")).collect();
    let counts = draw(cfg, &cumulative(&weak), &rows);
    CountTable::new(weak_labels(povm), pvm.labels().map(str::to_string).collect(), counts)
}

/// Two-stage categorical sampling: weak outcome from `weak_cdf`, then final
/// outcome from the row of `final_cdfs` it selects.
fn draw(cfg: &SampleConfig, weak_cdf: &[f64], final_cdfs: &[Vec<f64>]) -> Vec<u64> {
    let n_final = final_cdfs.first().map_or(1, Vec::len);
    let cells = weak_cdf.len() * n_final;
    let shots = cfg.shots();
    let shards = (cfg.shards() as u64).min(shots);
    let per_shard = shots.div_ceil(shards);

    let run = |start: u64, end: u64| {
        let mut counts = vec![0u64; cells];
        let mut stream = ShotStream::new(cfg.seed(), start);
        for _ in start..end {
            let (u_weak, u_final) = stream.next_shot();
            let m = categorical(weak_cdf, u_weak);
            let f = categorical(&final_cdfs[m], u_final);
            counts[m * n_final + f] += 1;
        }
        counts
    };

    if shards == 1 {
        return run(0, shots);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..shards)
            .map(|k| {
                let start = (k * per_shard).min(shots);
                let end = ((k + 1) * per_shard).min(shots);
                scope.spawn(move || run(start, end))
            })
            .collect();
        let mut total = vec![0u64; cells];
        for h in handles {
            for (t, c) in total.iter_mut().zip(h.join().expect("sampling thread panicked")) {
                *t += c;
            }
        }
        total
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{KetVector, Projector};
    use crate::scenarios::double_slit_scenario;
    use crate::tomography::{build_weak_povm, conditional_state, joint_outcome_probability, TomographyBasis};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn qubit_povm(eps: f64) -> WeakPovm {
        build_weak_povm(&TomographyBasis::pauli(), eps).unwrap()
    }

    fn ket0() -> DensityMatrix {
        DensityMatrix::pure(&KetVector::basis(2, 0).unwrap())
    }

    fn z_pvm() -> Pvm {
        Pvm::unlabeled(vec![KetVector::basis(2, 0).unwrap().projector(), KetVector::basis(2, 1).unwrap().projector()])
            .unwrap()
    }

    fn within_binomial(count: u64, shots: u64, p: f64, sigmas: f64) -> bool {
        let sd = (p * (1.0 - p) / shots as f64).sqrt();
        (count as f64 / shots as f64 - p).abs() <= sigmas * sd
    }

    #[test]
    fn config_rejects_zero() {
        assert!(SampleConfig::new(0, 1).is_err());
        assert!(SampleConfig::new(5, 1).unwrap().with_shards(0).is_err());
    }

    #[test]
    fn flat_distribution() {
        let povm = qubit_povm(0.5);
        let cfg = SampleConfig::new(200_000, 3).unwrap();
        let counts = sample_weak(&DensityMatrix::maximally_mixed(2), &povm, &cfg).unwrap();
        assert_eq!(counts.shots(), 200_000);
        for (c, o) in counts.counts().iter().zip(povm.outcomes()) {
            assert!(within_binomial(*c, 200_000, o.weight, 5.0));
        }
    }

    #[test]
    fn single_shot() {
        let cfg = SampleConfig::new(1, 0).unwrap();
        let counts = sample_weak(&ket0(), &qubit_povm(0.1), &cfg).unwrap();
        assert_eq!(counts.counts().iter().sum::<u64>(), 1);
    }

    #[test]
    fn plus_z_frequency() {
        let povm = qubit_povm(0.1);
        let cfg = SampleConfig::new(1_000_000, 11).unwrap();
        let counts = sample_weak(&ket0(), &povm, &cfg).unwrap();
        let plus_z = counts.weak_labels().iter().position(|l| l == "+Z").unwrap();
        let exact = outcome_probabilities(&ket0(), &povm).unwrap()[plus_z];
        assert!((exact - 0.1833333333).abs() < 1e-9);
        assert!(within_binomial(counts.counts()[plus_z], 1_000_000, exact, 5.0));
    }

    #[test]
    fn dimension_mismatch() {
        let povm = qubit_povm(0.1);
        let cfg = SampleConfig::new(10, 0).unwrap();
        let err = sample_weak(&DensityMatrix::maximally_mixed(3), &povm, &cfg).unwrap_err();
        assert!(matches!(err, Error::DimMismatch(_)));
    }

    #[test]
    fn exact_proportions_recover_expectations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = crate::random::density(2, &mut rng);
        let povm = qubit_povm(0.05);
        let probs = outcome_probabilities(&rho, &povm).unwrap();
        let counts = CountTable::from_probabilities(weak_labels(&povm), Vec::new(), &probs, 1 << 50).unwrap();
        let report = estimate_expectations(&counts, &povm).unwrap();
        for (label, op) in TomographyBasis::pauli().probes() {
            let exact = rho.operator().expectation(op).unwrap();
            assert!((report.get(label).unwrap().mean - exact).abs() < 1e-9, "{label}");
        }
    }

    #[test]
    fn weight_proportions_give_zero() {
        let povm = qubit_povm(0.05);
        let weights: Vec<f64> = povm.outcomes().iter().map(|o| o.weight).collect();
        let counts = CountTable::from_probabilities(weak_labels(&povm), Vec::new(), &weights, 600).unwrap();
        let report = estimate_expectations(&counts, &povm).unwrap();
        assert!(report.estimates.iter().all(|(_, e)| e.mean.abs() < 1e-12));
    }

    #[test]
    fn z_estimate_over_twenty_seeds() {
        let povm = qubit_povm(0.05);
        let mut stderrs = Vec::new();
        for seed in 0..20 {
            let cfg = SampleConfig::new(1_000_000, seed).unwrap();
            let report = estimate_expectations(&sample_weak(&ket0(), &povm, &cfg).unwrap(), &povm).unwrap();
            let z = report.get("Z").unwrap();
            assert!(z.stderr > 0.0);
            assert!((z.mean - 1.0).abs() <= 5.0 * z.stderr, "seed {seed}: {z:?}");
            stderrs.push(z.stderr);
        }
        // multinomial scale √(2w/n)/(2wε) for the ± pair
        let w: f64 = 1.0 / 6.0;
        let scale = (2.0 * w / 1e6).sqrt() / (2.0 * w * 0.05);
        let mean_stderr = stderrs.iter().sum::<f64>() / 20.0;
        assert!((mean_stderr / scale - 1.0).abs() < 0.05, "{mean_stderr} vs {scale}");

        // error grows as 1/ε
        let wide = qubit_povm(0.1);
        let cfg = SampleConfig::new(1_000_000, 0).unwrap();
        let z_wide =
            estimate_expectations(&sample_weak(&ket0(), &wide, &cfg).unwrap(), &wide).unwrap().get("Z").unwrap();
        let ratio = stderrs[0] / z_wide.stderr;
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn shards_do_not_change_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = crate::random::density(2, &mut rng);
        let povm = qubit_povm(0.3);
        let pvm = z_pvm();
        for shots in [1, 3, 1001, 100_003] {
            let one = SampleConfig::new(shots, 77).unwrap();
            let four = one.with_shards(4).unwrap();
            assert_eq!(
                sample_sequential(&rho, &povm, &pvm, &one).unwrap(),
                sample_sequential(&rho, &povm, &pvm, &four).unwrap()
            );
            assert_eq!(sample_weak(&rho, &povm, &one).unwrap(), sample_weak(&rho, &povm, &four).unwrap());
        }
        let other = SampleConfig::new(100_003, 78).unwrap();
        assert_ne!(
            sample_weak(&rho, &povm, &other).unwrap(),
            sample_weak(&rho, &povm, &SampleConfig::new(100_003, 77).unwrap()).unwrap()
        );
    }

    #[test]
    fn vanishing_strength_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let rho = crate::random::density(2, &mut rng);
        let povm = qubit_povm(1e-6);
        let pvm = z_pvm();
        let shots = 1_000_000;
        let counts = sample_sequential(&rho, &povm, &pvm, &SampleConfig::new(shots, 4).unwrap()).unwrap();
        for (m, o) in povm.outcomes().iter().enumerate() {
            for (f, (_, proj)) in pvm.outcomes().iter().enumerate() {
                let p = o.weight * rho.operator().expectation(proj.operator()).unwrap();
                assert!(within_binomial(counts.get(m, f), shots, p, 5.0));
            }
        }
    }

    #[test]
    fn trivial_pvm_reproduces_weak_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = crate::random::density(3, &mut rng);
        let povm = build_weak_povm(&TomographyBasis::gell_mann(3).unwrap(), 0.2).unwrap();
        let pvm = Pvm::new("all", vec![("all".into(), Projector::identity(3))]).unwrap();
        let cfg = SampleConfig::new(50_000, 9).unwrap();
        let sequential = sample_sequential(&rho, &povm, &pvm, &cfg).unwrap();
        let weak = sample_weak(&rho, &povm, &cfg).unwrap();
        assert_eq!(sequential.weak_marginal(), weak.counts());
    }

    #[test]
    fn sequential_frequencies_match_symmetrized_joint() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let rho = crate::random::density(2, &mut rng);
        let eps = 0.05;
        let povm = qubit_povm(eps);
        let pvm = z_pvm();
        let shots = 10_000_000;
        let counts =
            sample_sequential(&rho, &povm, &pvm, &SampleConfig::new(shots, 1).unwrap().with_shards(4).unwrap())
                .unwrap();
        for (m, o) in povm.outcomes().iter().enumerate() {
            for (f, (_, proj)) in pvm.outcomes().iter().enumerate() {
                let p = joint_outcome_probability(&rho, o.effect(), proj).unwrap();
                let sd = (p * (1.0 - p) / shots as f64).sqrt();
                let gap = (counts.get(m, f) as f64 / shots as f64 - p).abs();
                assert!(gap <= (5.0 * sd).max(5.0 * eps * eps), "{m},{f}: {gap}");
            }
        }
    }

    #[test]
    fn double_slit_reconstruction() {
        let scenario = double_slit_scenario().unwrap();
        let eps = 0.05;
        let basis = TomographyBasis::pauli();
        let povm = build_weak_povm(&basis, eps).unwrap();
        let pvm = &scenario.pvms[0];
        let cfg = SampleConfig::new(10_000_000, 42).unwrap().with_shards(4).unwrap();
        let counts = sample_sequential(&scenario.initial, &povm, pvm, &cfg).unwrap();
        let est = estimate_conditional(&counts, &povm, &basis, "path1").unwrap();
        let exact = conditional_state(&scenario.initial, pvm.projector("path1").unwrap()).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let gap = (est.state.matrix()[(r, c)] - exact.matrix()[(r, c)]).norm();
                assert!(gap <= 5.0 * est.stderr(r, c) + 0.25 * eps, "({r},{c}): {gap}");
                assert!(est.stderr(r, c) > 0.0 || r == c);
            }
        }
        assert!(est.state.eigenvalues()[0] < 0.0);
        assert!((est.state.preparation_prob() - 0.5).abs() < 1e-3);
    }

    /// `max |R̂_f − R_f|` in the infinite-shot limit of the sequential model.
    fn exact_reconstruction_bias(rho: &DensityMatrix, pvm: &Pvm, basis: &TomographyBasis, eps: f64) -> f64 {
        let povm = build_weak_povm(basis, eps).unwrap();
        let probs = sequential_distribution(rho, &povm, pvm).unwrap();
        let labels = pvm.labels().map(str::to_string).collect();
        let counts = CountTable::from_probabilities(weak_labels(&povm), labels, &probs, 1 << 52).unwrap();
        let est = estimate_conditional_state(&counts, &povm, basis, "f0").unwrap();
        let exact = conditional_state(rho, pvm.projector("f0").unwrap()).unwrap();
        est.matrix().max_abs_diff(exact.matrix())
    }

    #[test]
    fn reconstruction_bias_shrinks_with_strength() {
        // The ± pairing cancels the first-order back-action term, so the bias
        // is O(ε²) and halving ε divides it by four.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for d in [2, 3] {
            let basis = TomographyBasis::gell_mann(d).unwrap();
            for _ in 0..5 {
                let rho = crate::random::density(d, &mut rng);
                let pvm = crate::random::rank_one_pvm(d, &mut rng);
                let ratio = exact_reconstruction_bias(&rho, &pvm, &basis, 0.05)
                    / exact_reconstruction_bias(&rho, &pvm, &basis, 0.025);
                assert!((3.5..=4.5).contains(&ratio), "d={d}: {ratio}");
            }
        }
    }

    #[test]
    fn double_slit_reconstruction_is_unbiased() {
        // X, Y and Z all map |+⟩⟨+| to a state with the same path statistics,
        // so the second-order back-action does not move p(path1).
        let slit = double_slit_scenario().unwrap();
        let pvm = Pvm::unlabeled(slit.pvms[0].outcomes().iter().map(|(_, p)| p.clone()).collect()).unwrap();
        assert!(exact_reconstruction_bias(&slit.initial, &pvm, &TomographyBasis::pauli(), 0.05) < 1e-12);
    }

    #[test]
    fn impossible_outcome_is_rejected() {
        let povm = qubit_povm(0.05);
        let counts = sample_sequential(&ket0(), &povm, &z_pvm(), &SampleConfig::new(100_000, 0).unwrap()).unwrap();
        let err = estimate_conditional_state(&counts, &povm, &TomographyBasis::pauli(), "f1").unwrap_err();
        assert!(matches!(err, Error::InsufficientPostSelection { .. }));
        let err = estimate_conditional_state(&counts, &povm, &TomographyBasis::pauli(), "nope").unwrap_err();
        assert!(matches!(err, Error::UnknownLabel(_)));
    }

    #[test]
    fn error_scales_as_inverse_root_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let rho = crate::random::density(2, &mut rng);
        let povm = qubit_povm(0.2);
        let basis = TomographyBasis::pauli();
        let exact: Vec<f64> = basis.probes().map(|(_, op)| rho.operator().expectation(op).unwrap()).collect();
        let sizes = [10_000u64, 100_000, 1_000_000, 10_000_000];
        let log_err: Vec<f64> = sizes
            .iter()
            .map(|&shots| {
                let mut sq = 0.0;
                for seed in 0..10 {
                    let cfg = SampleConfig::new(shots, seed).unwrap().with_shards(4).unwrap();
                    let report = estimate_expectations(&sample_weak(&rho, &povm, &cfg).unwrap(), &povm).unwrap();
                    sq += report.estimates.iter().zip(&exact).map(|((_, e), x)| (e.mean - x).powi(2)).sum::<f64>();
                }
                (sq / 10.0).sqrt().ln()
            })
            .collect();
        let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
        let mx = xs.iter().sum::<f64>() / 4.0;
        let my = log_err.iter().sum::<f64>() / 4.0;
        let slope = xs.iter().zip(&log_err).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((-0.6..=-0.4).contains(&slope), "{slope}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn counts_sum_to_shots(shots in 1u64..5000, seed in any::<u64>(), shards in 1usize..6) {
            let povm = qubit_povm(0.4);
            let cfg = SampleConfig::new(shots, seed).unwrap().with_shards(shards).unwrap();
            let counts = sample_sequential(&ket0(), &povm, &z_pvm(), &cfg).unwrap();
            prop_assert_eq!(counts.shots(), shots);
            prop_assert_eq!(counts.counts().iter().sum::<u64>(), shots);
        }
    }
}
