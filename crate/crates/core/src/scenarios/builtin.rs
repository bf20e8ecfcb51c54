use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{Query, Scenario};
use crate::error::{Error, Result};
use crate::operator::{ComplexMatrix, DensityMatrix, HermitianOperator, KetVector, Observable, Projector};
use crate::tomography::Pvm;

pub const BUILTIN_NAMES: [&str; 3] = ["double-slit", "entangled:d=<n>", "bell-chsh"];

fn real_ket(amps: &[f64]) -> KetVector {
    KetVector::normalize(amps.iter().map(|&x| C64::new(x, 0.0)).collect()).expect("nonzero").0
}

/// Resolves `double-slit`, `bell-chsh` and `entangled:d=<n>`.
pub fn builtin(name: &str) -> Result<Scenario> {
    match name {
        "double-slit" => double_slit_scenario(),
        "bell-chsh" => bell_chsh_scenario(),
        _ => {
            let d = name
                .strip_prefix("entangled:d=")
                .ok_or_else(|| Error::UnknownLabel(format!("no built-in scenario named {name:?}")))?
                .parse::<usize>()
                .map_err(|_| Error::BadDimension(format!("cannot parse dimension in {name:?}")))?;
            entangled_scenario(d, &default_entangled_ket(d)?)
        }
    }
}

/// `f_k = exp(iπk/d)/√d`: a full-support ket with `f* ≠ f`.
pub fn default_entangled_ket(d: usize) -> Result<KetVector> {
    if d == 0 {
        return Err(Error::BadDimension("dimension must be positive".into()));
    }
    let amps = (0..d).map(|k| C64::from_polar(1.0, PI * k as f64 / d as f64)).collect();
    Ok(KetVector::normalize(amps)?.0)
}

/// Two-path superposition `(|1⟩ + |2⟩)/√2` with a which-path measurement.
///
/// Probes are the coherence projectors `|±⟩⟨±|`; the queries ask for them in
/// each post-selected branch.
pub fn double_slit_scenario() -> Result<Scenario> {
    let psi = real_ket(&[1.0, 1.0]);
    let pvm = Pvm::new(
        "path",
        vec![
            ("path1".into(), KetVector::basis(2, 0)?.projector()),
            ("path2".into(), KetVector::basis(2, 1)?.projector()),
        ],
    )?;
    let probes = vec![
        ("coh".to_string(), real_ket(&[1.0, 1.0]).projector().operator().clone()),
        ("anticoh".to_string(), real_ket(&[1.0, -1.0]).projector().operator().clone()),
    ];
    let queries = vec![
        Query::conditional("coh_path1", "path1", "coh"),
        Query::conditional("coh_path2", "path2", "coh"),
        Query::conditional("anticoh_path1", "path1", "anticoh"),
        Query::conditional("anticoh_path2", "path2", "anticoh"),
        Query::joint("joint_path1_coh", "path1", "coh"),
        Query::joint("joint_path2_coh", "path2", "coh"),
    ];
    Scenario::new("double-slit", (2, 1), DensityMatrix::pure(&psi), vec![pvm], probes, queries)
}

/// `|E⟩ = Σ_k |k,k⟩/√d`.
pub fn maximally_entangled(d: usize) -> Result<KetVector> {
    if d == 0 {
        return Err(Error::BadDimension("dimension must be positive".into()));
    }
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for k in 0..d {
        amps[k * d + k] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    }
    KetVector::new(amps)
}

/// Completes `first` to an orthonormal basis by Gram-Schmidt over the
/// computational basis vectors, in index order.
pub fn complete_basis(first: &KetVector) -> Vec<KetVector> {
    let d = first.dim();
    let mut basis = vec![first.clone()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[k] = C64::new(1.0, 0.0);
        for b in &basis {
            let overlap = b.amplitudes()[k].conj();
            for (vi, bi) in v.iter_mut().zip(b.amplitudes()) {
                *vi -= overlap * bi;
            }
        }
        if let Ok((ket, norm)) = KetVector::normalize(v) {
            if norm > 1e-8 {
                basis.push(ket);
            }
        }
    }
    basis
}

/// Maximally entangled pair of `d`-level systems, with `A` measured in a basis
/// whose first element is `f`.
///
/// Outcomes are labelled `f0` (the projection on `f`), `f1`, ... The probe
/// `fstar` is `1 ⊗ |f*⟩⟨f*|`.
pub fn entangled_scenario(d: usize, f: &KetVector) -> Result<Scenario> {
    if !(2..=8).contains(&d) {
        return Err(Error::BadDimension(format!("entangled scenario needs 2 <= d <= 8, got {d}")));
    }
    if f.dim() != d {
        return Err(Error::BadDimension(format!("ket f has dimension {}, expected {d}", f.dim())));
    }
    let e = maximally_entangled(d)?;
    let outcomes =
        complete_basis(f).iter().enumerate().map(|(k, b)| (format!("f{k}"), b.projector().extend_right(d))).collect();
    let pvm = Pvm::new("a_basis", outcomes)?;
    let fstar = f.conj().projector().extend_left(d);
    let probes = vec![("fstar".to_string(), fstar.operator().clone())];
    let queries =
        vec![Query::conditional("fstar_given_f0", "f0", "fstar"), Query::joint("joint_f0_fstar", "f0", "fstar")];
    Scenario::new(format!("entangled:d={d}"), (d, d), DensityMatrix::pure(&e), vec![pvm], probes, queries)
}

/// `S_± = (X ± Y)/√2` on a qubit.
pub(crate) fn diagonal_spins() -> (HermitianOperator, HermitianOperator) {
    let x = ComplexMatrix::pauli_x();
    let y = ComplexMatrix::pauli_y();
    let r = 0.5f64.sqrt();
    let plus = x.add(&y).unwrap().scale_real(r);
    let minus = x.sub(&y).unwrap().scale_real(r);
    (HermitianOperator::new(plus).unwrap(), HermitianOperator::new(minus).unwrap())
}

/// `(1 + sign·S)/2`.
fn spin_projector(s: &HermitianOperator, sign: f64) -> Result<Projector> {
    Projector::new(HermitianOperator::identity(2).add(&s.scale(sign))?.scale(0.5))
}

/// Two qubits in `|E⟩`. `A` is measured in the complex-conjugated eigenbases
/// of `S_+` (PVM `splus`: `sp_up`, `sp_dn`) or of `S_−` (PVM `sminus`:
/// `sm_up`, `sm_dn`), which leaves `B` in the corresponding `S_±`
/// eigenstate. Probes `pi_pp`, `pi_pm`, `pi_mp`, `pi_mm` are the joint
/// operators `Π(x, y)` acting on `B`.
pub fn bell_chsh_scenario() -> Result<Scenario> {
    let (s_plus, s_minus) = diagonal_spins();
    let a_side = |s: &HermitianOperator, sign: f64| -> Result<Projector> {
        let p = spin_projector(s, sign)?;
        Ok(Projector::from_matrix(p.matrix().conj())?.extend_right(2))
    };
    let splus =
        Pvm::new("splus", vec![("sp_up".into(), a_side(&s_plus, 1.0)?), ("sp_dn".into(), a_side(&s_plus, -1.0)?)])?;
    let sminus =
        Pvm::new("sminus", vec![("sm_up".into(), a_side(&s_minus, 1.0)?), ("sm_dn".into(), a_side(&s_minus, -1.0)?)])?;
    let probes = super::bell::bell_joint_operators()
        .into_iter()
        .map(|(label, op)| (label, HermitianOperator::identity(2).kron(&op)))
        .collect();
    let queries = vec![
        Query::joint("joint_sp_up_pi_pp", "sp_up", "pi_pp"),
        Query::joint("joint_sp_up_pi_mm", "sp_up", "pi_mm"),
        Query::joint("joint_sm_up_pi_pm", "sm_up", "pi_pm"),
        Query::joint("joint_sm_up_pi_mp", "sm_up", "pi_mp"),
        Query::conditional("pi_pp_given_sp_up", "sp_up", "pi_pp"),
        Query::conditional("pi_pm_given_sp_up", "sp_up", "pi_pm"),
    ];
    let e = maximally_entangled(2)?;
    Scenario::new("bell-chsh", (2, 2), DensityMatrix::pure(&e), vec![splus, sminus], probes, queries)
}
