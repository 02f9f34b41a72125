//! The nondemolition criteria, the coherence consequences of the twin
//! condition, and overmeasurement by coarsening.

use serde::Serialize;

use super::general::{cc_invariance, expansion_coefficient_map};
use super::{CheckConfig, FamilyReport, Outcome, SchemeView, VerdictReport, Worst};
use crate::error::{Error, Result};
use crate::observables::{apply_function, coarsen_pointer, IndexFunction, SpectralForm};
use crate::qlin::{
    eigh, ensure_dim, ensure_unit, expectation, partial_inner_b, projector_onto_span, range_basis,
    reduced_state, schmidt, Ket, Op, Subsystem,
};
use crate::random::{random_ket, random_orthonormal_in, rng};
use crate::scheme::MeasurementScheme;

const FAMILY: &str = "nondemolition";

const RANDOM_POINTER_BASES: usize = 10;

/// Note attached to nondemolition verdicts when the calibration condition
/// itself fails.
pub const CC_NOT_ESTABLISHED: &str = "CC not established";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum NdCriterion {
    /// Sharp inputs stay sharp with probability one.
    NdStat,
    /// Sharp eigenvectors stay invariant under `E^k ⊗ I`.
    NdInv,
    /// Invariance in both directions.
    NdStrong,
    /// `(E^k ⊗ I) U = U (E^k ⊗ I)` on the ready subspace.
    NdDyn,
    /// Eigenbasis images lie in `ℛ(E^k ⊗ F^k)`.
    NdBasis,
    /// Eigenspace images lie in `ℛ(E^k ⊗ F^k)`.
    NdSubspace,
    /// `E^k ⊗ I` and `I ⊗ F^k` act alike on every final state.
    Twin,
    /// An immediate repetition reproduces the pointer reading.
    Repeat,
    /// The final object marginal reproduces the initial probabilities.
    ExtPrc,
    /// Pointer-expansion coefficients lie in `ℛ(E^k)`.
    ExpansionNd,
    /// Schmidt partners of pointer eigenvectors lie in `ℛ(E^k)`.
    TwinSchmidt,
}

impl NdCriterion {
    pub const ALL: [NdCriterion; 11] = [
        NdCriterion::NdStat,
        NdCriterion::NdInv,
        NdCriterion::NdStrong,
        NdCriterion::NdDyn,
        NdCriterion::NdBasis,
        NdCriterion::NdSubspace,
        NdCriterion::Twin,
        NdCriterion::Repeat,
        NdCriterion::ExtPrc,
        NdCriterion::ExpansionNd,
        NdCriterion::TwinSchmidt,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            NdCriterion::NdStat => "ND_STAT",
            NdCriterion::NdInv => "ND_INV",
            NdCriterion::NdStrong => "ND_STRONG",
            NdCriterion::NdDyn => "ND_DYN",
            NdCriterion::NdBasis => "ND_BASIS",
            NdCriterion::NdSubspace => "ND_SUBSPACE",
            NdCriterion::Twin => "TWIN",
            NdCriterion::Repeat => "REPEAT",
            NdCriterion::ExtPrc => "EXT_PRC",
            NdCriterion::ExpansionNd => "EXPANSION_ND",
            NdCriterion::TwinSchmidt => "TWIN_SCHMIDT",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            NdCriterion::NdStat => "nondemolition, statistical form",
            NdCriterion::NdInv => "nondemolition, invariance form",
            NdCriterion::NdStrong => "nondemolition, strong invariance form",
            NdCriterion::NdDyn => "nondemolition, dynamical form",
            NdCriterion::NdBasis => "nondemolition, basis form",
            NdCriterion::NdSubspace => "nondemolition, subspace form",
            NdCriterion::Twin => "twin observables",
            NdCriterion::Repeat => "repeatability",
            NdCriterion::ExtPrc => "extended probability reproducibility",
            NdCriterion::ExpansionNd => "pointer-basis expansion in the eigenspaces",
            NdCriterion::TwinSchmidt => "twin Schmidt structure",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    fn seed_offset(&self) -> u64 {
        100 + Self::ALL.iter().position(|c| c == self).unwrap_or(0) as u64
    }
}

pub fn verify_nd(
    s: &MeasurementScheme,
    o: &SpectralForm,
    criterion: NdCriterion,
    cfg: &CheckConfig,
) -> Result<VerdictReport> {
    let view = SchemeView::new(s, o)?;
    let cc = cc_established(&view, cfg);
    Ok(evaluate(&view, criterion, cfg, cc))
}

/// Evaluates all eleven criteria. When the calibration condition fails
/// the verdicts are still computed but carry [`CC_NOT_ESTABLISHED`].
pub fn verify_all_nd(
    s: &MeasurementScheme,
    o: &SpectralForm,
    cfg: &CheckConfig,
) -> Result<FamilyReport> {
    let view = SchemeView::new(s, o)?;
    let cc = cc_established(&view, cfg);
    let verdicts = NdCriterion::ALL
        .iter()
        .map(|&c| evaluate(&view, c, cfg, cc))
        .collect();
    Ok(FamilyReport::new(verdicts))
}

fn cc_established(view: &SchemeView, cfg: &CheckConfig) -> bool {
    let w = cc_invariance(view, &view.e_basis_eig);
    Outcome::from_residual(w.residual, cfg.tol.op, &cfg.tol) == Outcome::Pass
}

fn evaluate(
    view: &SchemeView,
    criterion: NdCriterion,
    cfg: &CheckConfig,
    cc: bool,
) -> VerdictReport {
    let offset = criterion.seed_offset();
    let worst = match criterion {
        NdCriterion::NdStat => nd_statistical(view),
        NdCriterion::NdInv => nd_invariance(view),
        NdCriterion::NdStrong => nd_strong(view),
        NdCriterion::NdDyn => nd_dynamical(view),
        NdCriterion::NdBasis => joint_membership(view, &view.e_basis_gs),
        NdCriterion::NdSubspace => joint_subspace(view),
        NdCriterion::Twin => twin(view, cfg, offset),
        NdCriterion::Repeat => repeat(view, cfg, offset),
        NdCriterion::ExtPrc => extended_prc(view, cfg, offset),
        NdCriterion::ExpansionNd => expansion_nd(view, cfg, offset),
        NdCriterion::TwinSchmidt => twin_schmidt(view, cfg, offset),
    };
    let tolerance = match criterion {
        NdCriterion::NdStat => cfg.tol.prob,
        _ => cfg.tol.op,
    };
    let mut report = worst.into_report(FAMILY, criterion.tag(), tolerance, &cfg.tol);
    if !cc {
        report.note = Some(CC_NOT_ESTABLISHED.to_string());
    }
    report
}

fn nd_invariance(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    for (k, basis) in view.e_basis_eig.iter().enumerate() {
        let outside = &view.id_total - &view.e_lifted[k];
        for (q, e) in basis.iter().enumerate() {
            let r = (&outside * (&view.evolution * e)).norm();
            w.offer(r, k, || format!("eigenvector {q} of E^{k}"));
        }
    }
    w
}

fn nd_statistical(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    for (k, basis) in view.e_basis_eig.iter().enumerate() {
        let outside = &view.id_total - &view.e_lifted[k];
        for (q, e) in basis.iter().enumerate() {
            let phi = &view.evolution * e;
            let deficit = expectation(&phi, &outside).max(0.0);
            w.offer(deficit, k, || format!("eigenvector {q} of E^{k}"));
        }
    }
    w
}

fn nd_strong(view: &SchemeView) -> Worst {
    let mut w = nd_invariance(view);
    for (k, basis) in view.e_complement_basis.iter().enumerate() {
        for (q, x) in basis.iter().enumerate() {
            let r = (&view.e_lifted[k] * (&view.evolution * x)).norm();
            w.offer(r, k, || {
                format!("vector {q} orthogonal to E^{k} reaches E^{k}")
            });
        }
    }
    w
}

fn nd_dynamical(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    let v = &view.evolution;
    for k in 0..view.n() {
        let r = (v * &view.e[k] - &view.e_lifted[k] * v).norm();
        w.offer(r, k, || format!("k={k}"));
    }
    w
}

fn joint_projector(view: &SchemeView, k: usize) -> Op {
    &view.e_lifted[k] * &view.f_lifted[k]
}

fn joint_membership(view: &SchemeView, bases: &[Vec<Ket>]) -> Worst {
    let mut w = Worst::default();
    for (k, basis) in bases.iter().enumerate() {
        let outside = &view.id_total - joint_projector(view, k);
        for (q, e) in basis.iter().enumerate() {
            let r = (&outside * (&view.evolution * e)).norm();
            w.offer(r, k, || format!("eigenvector {q} of E^{k}"));
        }
    }
    w
}

fn joint_subspace(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    for k in 0..view.n() {
        let outside = &view.id_total - joint_projector(view, k);
        let r = (&outside * &view.evolution * &view.e[k]).norm();
        w.offer(r, k, || format!("image of the E^{k} eigenspace"));
    }
    w
}

fn twin(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let v = &view.evolution;
    let diffs: Vec<Op> = (0..view.n())
        .map(|k| &view.e_lifted[k] - &view.f_lifted[k])
        .collect();
    for (k, d) in diffs.iter().enumerate() {
        w.offer((d * v).norm(), k, || format!("operator identity for k={k}"));
    }
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    for t in 0..cfg.trials {
        let fin = v * random_ket(view.scheme.dims().a, &mut rng);
        for (k, d) in diffs.iter().enumerate() {
            w.offer((d * &fin).norm(), k, || format!("random initial state {t}"));
        }
    }
    w
}

/// Sample inputs: `trials` random states followed by every eigenvector.
fn sample_inputs(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Vec<(String, Ket)> {
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    let dim_a = view.scheme.dims().a;
    let mut out: Vec<(String, Ket)> = (0..cfg.trials)
        .map(|t| {
            (
                format!("random initial state {t}"),
                random_ket(dim_a, &mut rng),
            )
        })
        .collect();
    for (k, basis) in view.e_basis_eig.iter().enumerate() {
        for (q, e) in basis.iter().enumerate() {
            out.push((format!("eigenvector {q} of E^{k}"), e.clone()));
        }
    }
    out
}

fn repeat(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    for (label, phi) in sample_inputs(view, cfg, offset) {
        let fin = &view.evolution * &phi;
        for k in 0..view.n() {
            let branch = &view.f_lifted[k] * &fin;
            let norm = branch.norm();
            if norm * norm <= cfg.tol.prob {
                continue;
            }
            let outside = &branch - &view.e_lifted[k] * &branch;
            w.offer(outside.norm() / norm, k, || label.clone());
        }
    }
    w
}

fn extended_prc(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let v = &view.evolution;
    for k in 0..view.n() {
        let r = (v.adjoint() * &view.e_lifted[k] * v - &view.e[k]).norm();
        w.offer(r, k, || format!("operator identity for k={k}"));
    }
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    for t in 0..cfg.trials {
        let phi = random_ket(view.scheme.dims().a, &mut rng);
        let fin = v * &phi;
        for k in 0..view.n() {
            let r = (expectation(&phi, &view.e[k]) - expectation(&fin, &view.e_lifted[k])).abs();
            w.offer(r, k, || format!("random initial state {t}"));
        }
    }
    w
}

fn expansion_nd(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    let dim_a = view.scheme.dims().a;
    let id_a = crate::qlin::identity(dim_a);
    for k in 0..view.n() {
        let outside = &id_a - &view.e[k];
        let basis = range_basis(view.scheme.pointer().projector(k));
        let leak = |b: &Ket| (&outside * expansion_coefficient_map(view, b)).norm();
        for (s, b) in basis.iter().enumerate() {
            w.offer(leak(b), k, || {
                format!("index-ordered pointer vector {s}, k={k}")
            });
        }
        if basis.is_empty() {
            continue;
        }
        for r in 0..RANDOM_POINTER_BASES {
            for (s, b) in random_orthonormal_in(&basis, basis.len(), &mut rng)
                .iter()
                .enumerate()
            {
                w.offer(leak(b), k, || {
                    format!("random pointer basis {r}, vector {s}, k={k}")
                });
            }
        }
        for t in 0..cfg.trials.min(10) {
            let phi = random_ket(dim_a, &mut rng);
            for b in &basis {
                let c = expansion_coefficient_map(view, b) * &phi;
                w.offer((&outside * c).norm(), k, || {
                    format!("random initial state {t}")
                });
            }
        }
    }
    w
}

/// For each sampled final state: group the Schmidt coefficients, check
/// that every group's right span is invariant under all `F^k`, and that
/// the left partners of a basis of `F^k R_g` lie in `ℛ(E^k)`.
fn twin_schmidt(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let dims = view.scheme.dims();
    let pointer = view.scheme.pointer();
    let mut rng = rng(cfg.seed.wrapping_add(offset).wrapping_add(1));
    let id_a = crate::qlin::identity(dims.a);
    for (label, phi) in sample_inputs(view, cfg, offset) {
        let fin = &view.evolution * &phi;
        let Ok(sd) = schmidt(&fin, dims, &cfg.tol) else {
            w.offer(f64::NAN, 0, || label.clone());
            continue;
        };
        for (c, group) in group_schmidt(&sd.coefficients, cfg.tol.schmidt_group) {
            let p_g = projector_onto_span(
                dims.b,
                &group
                    .iter()
                    .map(|&i| sd.right[i].clone())
                    .collect::<Vec<_>>(),
            );
            for k in 0..view.n() {
                let f = pointer.projector(k);
                let comm = (f * &p_g - &p_g * f).norm();
                w.offer(comm, k, || {
                    format!("{label}: Schmidt group is not F^{k}-invariant")
                });

                let block = f * &p_g * f;
                let (values, vectors) = eigh(&block);
                let basis: Vec<Ket> = values
                    .into_iter()
                    .zip(vectors)
                    .filter(|(v, _)| *v > 0.5)
                    .map(|(_, v)| v)
                    .collect();
                if basis.is_empty() {
                    continue;
                }
                let outside = &id_a - &view.e[k];
                let mut check = |r: &Ket, which: &str| {
                    if let Ok(partner) = partial_inner_b(r, &fin, dims) {
                        let res = (&outside * partner).norm() / c;
                        w.offer(res, k, || format!("{label}: {which} partner outside E^{k}"));
                    }
                };
                for r in &basis {
                    check(r, "eigenbasis");
                }
                for r in random_orthonormal_in(&basis, basis.len(), &mut rng) {
                    check(&r, "rotated");
                }
            }
        }
    }
    w
}

/// Groups indices of descending Schmidt coefficients whose consecutive
/// gaps are within `tol`; returns the mean coefficient of each group.
fn group_schmidt(coefficients: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &c) in coefficients.iter().enumerate() {
        match groups.last_mut() {
            Some((_, g)) if coefficients[*g.last().unwrap_or(&i)] - c <= tol => g.push(i),
            _ => groups.push((c, vec![i])),
        }
    }
    for (mean, g) in groups.iter_mut() {
        *mean = g.iter().map(|&i| coefficients[i]).sum::<f64>() / g.len() as f64;
    }
    groups
}

/// Decoherence-like consequences of the twin condition for one final state.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceReport {
    /// Whether the twin criterion holds, so the residuals below are
    /// expected to vanish.
    pub twin_holds: bool,
    /// `‖ρ_A − Σ_k E^k ρ_A E^k‖`
    pub rho_a_residual: f64,
    /// `‖ρ_B − Σ_k F^k ρ_B F^k‖`
    pub rho_b_residual: f64,
    /// `max_k ‖[E^k, ρ_A]‖`
    pub commutator_a: f64,
    /// `max_k ‖[F^k, ρ_B]‖`
    pub commutator_b: f64,
}

impl CoherenceReport {
    pub fn max_residual(&self) -> f64 {
        self.rho_a_residual
            .max(self.rho_b_residual)
            .max(self.commutator_a)
            .max(self.commutator_b)
    }
}

pub fn coherence_report(
    s: &MeasurementScheme,
    o: &SpectralForm,
    phi_a: &Ket,
    cfg: &CheckConfig,
) -> Result<CoherenceReport> {
    let view = SchemeView::new(s, o)?;
    ensure_dim(phi_a.len(), s.dims().a)?;
    ensure_unit(phi_a, &cfg.tol)?;
    let twin_holds = Outcome::from_residual(
        twin(&view, cfg, NdCriterion::Twin.seed_offset()).residual,
        cfg.tol.op,
        &cfg.tol,
    ) == Outcome::Pass;
    let fin = &view.evolution * phi_a;
    let dims = s.dims();
    let rho_a = reduced_state(&fin, dims, Subsystem::B)?;
    let rho_b = reduced_state(&fin, dims, Subsystem::A)?;
    let pointer = s.pointer();
    let pinch = |rho: &Op, ps: &mut dyn Iterator<Item = Op>| -> (f64, f64) {
        let mut pinched = Op::zeros(rho.nrows(), rho.ncols());
        let mut comm: f64 = 0.0;
        for p in ps {
            pinched += &p * rho * &p;
            comm = comm.max((&p * rho - rho * &p).norm());
        }
        ((rho - pinched).norm(), comm)
    };
    let (rho_a_residual, commutator_a) = pinch(&rho_a, &mut view.e.iter().cloned());
    let (rho_b_residual, commutator_b) = pinch(&rho_b, &mut pointer.projectors().iter().cloned());
    Ok(CoherenceReport {
        twin_holds,
        rho_a_residual,
        rho_b_residual,
        commutator_a,
        commutator_b,
    })
}

/// A scheme for `f(O)` obtained by merging pointer positions along `f`.
#[derive(Debug, Clone)]
pub struct Overmeasurement {
    pub observable: SpectralForm,
    pub scheme: MeasurementScheme,
}

/// Coarsens a calibrated scheme for `o` into one for `f(o)`; the pointer
/// is merged along the same function and labelled with `f`'s values.
pub fn overmeasure(
    s: &MeasurementScheme,
    o: &SpectralForm,
    f: &IndexFunction,
    cfg: &CheckConfig,
) -> Result<Overmeasurement> {
    let view = SchemeView::new(s, o)?;
    if s.pointer().len() != o.len() {
        return Err(Error::InvalidFunction(format!(
            "pointer has {} positions but the observable has {} eigenvalues",
            s.pointer().len(),
            o.len()
        )));
    }
    if f.sources() != o.len() {
        return Err(Error::InvalidFunction(format!(
            "function is defined on {} indices but the observable has {}",
            f.sources(),
            o.len()
        )));
    }
    if !cc_established(&view, cfg) {
        return Err(Error::Precondition(
            "calibration condition does not hold for the fine observable".into(),
        ));
    }
    let observable = apply_function(o, f, &cfg.tol)?;
    let pointer = coarsen_pointer(s.pointer(), f, f.target_values().to_vec(), &cfg.tol)?;
    let scheme = s.with_pointer(pointer, &cfg.tol)?;
    Ok(Overmeasurement { observable, scheme })
}

#[cfg(test)]
mod tests {
    use super::super::{verify_all_general, Equivalence};
    use super::*;
    use crate::fixtures;
    use crate::qlin::real_ket;
    use crate::random::random_unitary;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn cfg() -> CheckConfig {
        CheckConfig::default()
    }

    #[test]
    fn nondemolition_fixtures_pass_all() {
        for f in [
            fixtures::s_ideal3(),
            fixtures::s_nd_rot(),
            fixtures::s_nd_ent(),
            fixtures::s_ideal2(),
        ] {
            let r = verify_all_nd(&f.scheme, &f.observable, &cfg()).unwrap();
            assert_eq!(
                r.equivalence,
                Equivalence::AllPass,
                "{}: {:#?}",
                f.name,
                r.verdicts
            );
            assert!(r.verdicts.iter().all(|v| v.note.is_none()));
        }
    }

    #[test]
    fn demolition_fixtures_fail_all() {
        for f in [
            fixtures::s_demo3(),
            fixtures::s_demo_ent(),
            fixtures::s_mixed(),
        ] {
            let r = verify_all_nd(&f.scheme, &f.observable, &cfg()).unwrap();
            assert_eq!(
                r.equivalence,
                Equivalence::AllFail,
                "{}: {:#?}",
                f.name,
                r.verdicts
            );
        }
    }

    #[test]
    fn demo3_witness_is_second_index() {
        let f = fixtures::s_demo3();
        let v = verify_nd(&f.scheme, &f.observable, NdCriterion::NdInv, &cfg()).unwrap();
        assert_eq!(v.outcome, Outcome::Fail);
        let w = v.witness.unwrap();
        assert_eq!(w.k, 1);
        // ‖(I − E^1⊗I)((|0⟩+|1⟩)/√2)|1⟩‖ = 1.
        assert!((v.residual - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uncalibrated_schemes_carry_a_note() {
        let f = fixtures::s_ideal3();
        let s = f
            .scheme
            .with_interaction(random_unitary(6, &mut rng(8)), &cfg().tol)
            .unwrap();
        let r = verify_all_nd(&s, &f.observable, &cfg()).unwrap();
        assert!(r
            .verdicts
            .iter()
            .all(|v| v.note.as_deref() == Some(CC_NOT_ESTABLISHED)));
    }

    #[test]
    fn schmidt_grouping() {
        let g = group_schmidt(&[0.6, 0.6 - 1e-10, 0.3, 0.1], 1e-8);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].1, vec![0, 1]);
    }

    #[test]
    fn coherence_on_twin_scheme() {
        let f = fixtures::s_nd_ent();
        let phi = real_ket(&[0.6, 0.0, 0.8]);
        let c = coherence_report(&f.scheme, &f.observable, &phi, &cfg()).unwrap();
        assert!(c.twin_holds);
        assert!(c.max_residual() < 1e-12, "{c:?}");

        // Independent oracle: ρ_A is diagonal with weights 0.36 and 0.64.
        let fin = f.scheme.final_ket(&phi).unwrap();
        let rho_a = reduced_state(&fin, f.scheme.dims(), Subsystem::B).unwrap();
        assert!((rho_a[(0, 0)].re - 0.36).abs() < 1e-14);
        assert!(rho_a[(0, 2)].norm() < 1e-14);
    }

    #[test]
    fn coherence_detects_demolition() {
        let f = fixtures::s_demo3();
        let phi = real_ket(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let c = coherence_report(&f.scheme, &f.observable, &phi, &cfg()).unwrap();
        assert!(!c.twin_holds);
    }

    #[test]
    fn overmeasurement_merges_positions() {
        let f = fixtures::s_ideal3();
        let g = IndexFunction::constant(2, 7.0);
        let om = overmeasure(&f.scheme, &f.observable, &g, &cfg()).unwrap();
        assert_eq!(om.observable.len(), 1);
        let r = verify_all_general(&om.scheme, &om.observable, &cfg()).unwrap();
        assert_eq!(r.equivalence, Equivalence::AllPass);
        let nd = verify_all_nd(&om.scheme, &om.observable, &cfg()).unwrap();
        assert_eq!(nd.equivalence, Equivalence::AllPass);
    }

    #[test]
    fn coherence_on_uniform_input() {
        let f = fixtures::s_nd_ent();
        let x = 1.0 / 3f64.sqrt();
        let phi = real_ket(&[x, x, x]);
        let c = coherence_report(&f.scheme, &f.observable, &phi, &cfg()).unwrap();
        assert!(c.max_residual() <= 1e-10);
        // Oracle: ρ_B is diag(1/3, 1/3, 1/3), already pinched.
        let fin = f.scheme.final_ket(&phi).unwrap();
        let rho_b = reduced_state(&fin, f.scheme.dims(), Subsystem::A).unwrap();
        assert!((rho_b - crate::qlin::diag(&[x * x, x * x, x * x])).norm() < 1e-14);
    }

    #[test]
    fn coherence_inapplicable_without_twin() {
        let f = fixtures::s_demo_ent();
        let phi = random_ket(3, &mut rng(6));
        let c = coherence_report(&f.scheme, &f.observable, &phi, &cfg()).unwrap();
        assert!(!c.twin_holds);
        // Φ = a|0,0⟩ + b|2,1⟩ + c|2,2⟩: ρ_A stays block diagonal, while ρ_B
        // keeps the coherence b·c̄ between levels 1 and 2, which sit in
        // different pointer positions. Pinching removes it twice over.
        let (b, cc) = (phi[1], phi[2]);
        let expected = std::f64::consts::SQRT_2 * (b * cc.conj()).norm();
        assert!(c.rho_a_residual < 1e-12);
        assert!((c.rho_b_residual - expected).abs() < 1e-12);
        assert!(c.rho_b_residual > 1e-3);
    }

    #[test]
    fn merging_a_complete_observable() {
        let t = cfg().tol;
        let o = crate::random::standard_observable(&[1, 1, 1], &t);
        let p = crate::random::standard_observable(&[1, 1, 1], &t);
        let s = crate::kinds::build_ideal(&o, &p, &crate::qlin::basis_ket(3, 0), &t).unwrap();
        let f = IndexFunction::new(vec![0, 0, 1], vec![0.0, 1.0]).unwrap();
        let om = overmeasure(&s, &o, &f, &cfg()).unwrap();
        assert_eq!(om.observable.len(), 2);
        let r = verify_all_general(&om.scheme, &om.observable, &cfg()).unwrap();
        assert_eq!(r.equivalence, Equivalence::AllPass);
    }

    #[test]
    fn identity_function_keeps_verdicts() {
        let f = fixtures::s_nd_rot();
        let id = IndexFunction::identity(f.observable.eigenvalues().to_vec());
        let om = overmeasure(&f.scheme, &f.observable, &id, &cfg()).unwrap();
        let before = verify_all_nd(&f.scheme, &f.observable, &cfg()).unwrap();
        let after = verify_all_nd(&om.scheme, &om.observable, &cfg()).unwrap();
        for (a, b) in before.verdicts.iter().zip(&after.verdicts) {
            assert_eq!(a.outcome, b.outcome);
        }
    }

    #[test]
    fn overmeasurement_is_functorial() {
        let t = cfg().tol;
        let o = crate::random::standard_observable(&[1, 1, 1, 1], &t);
        let p = crate::random::standard_observable(&[1, 1, 1, 1], &t);
        let s = crate::kinds::build_ideal(&o, &p, &crate::qlin::basis_ket(4, 0), &t).unwrap();
        let f = IndexFunction::new(vec![0, 1, 1, 2], vec![0.0, 1.0, 2.0]).unwrap();
        let g = IndexFunction::new(vec![0, 0, 1], vec![5.0, 6.0]).unwrap();
        let step = overmeasure(&s, &o, &f, &cfg()).unwrap();
        let twice = overmeasure(&step.scheme, &step.observable, &g, &cfg()).unwrap();
        let once = overmeasure(&s, &o, &f.then(&g).unwrap(), &cfg()).unwrap();
        assert_eq!(twice.observable, once.observable);
        assert_eq!(twice.scheme.pointer(), once.scheme.pointer());
        let a = verify_all_nd(&twice.scheme, &twice.observable, &cfg()).unwrap();
        let b = verify_all_nd(&once.scheme, &once.observable, &cfg()).unwrap();
        assert_eq!(a.equivalence, b.equivalence);
    }

    #[test]
    fn overmeasurement_requires_calibration() {
        let f = fixtures::s_ideal3();
        let s = f
            .scheme
            .with_interaction(random_unitary(6, &mut rng(3)), &cfg().tol)
            .unwrap();
        let g = IndexFunction::identity(vec![1.0, -1.0]);
        assert!(matches!(
            overmeasure(&s, &f.observable, &g, &cfg()),
            Err(Error::Precondition(_))
        ));
        let bad = IndexFunction::identity(vec![1.0, 2.0, 3.0]);
        assert!(matches!(
            overmeasure(&f.scheme, &f.observable, &bad, &cfg()),
            Err(Error::InvalidFunction(_))
        ));
    }
}
