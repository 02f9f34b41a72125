//! Measurements on one half of an entangled pair: no-influence, the
//! conditional state of the distant system, and twin observables.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::SpectralForm;
use crate::qlin::{
    ensure_dim, ensure_unit, ensure_unitary, identity, lift_a, lift_b, projector_residual,
    real_ket, reduced_state, BipartiteDims, Ket, Op, Subsystem, DIM_CAP,
};
use crate::scheme::MeasurementScheme;
use crate::tol::Tolerances;
use crate::verify::general::cc_invariance;
use crate::verify::{Outcome, SchemeView};

/// Dimensions of `ℋ_{A1} ⊗ ℋ_{A2} ⊗ ℋ_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripartiteDims {
    pub a1: usize,
    pub a2: usize,
    pub b: usize,
}

impl TripartiteDims {
    pub fn new(a1: usize, a2: usize, b: usize) -> Result<Self> {
        for d in [a1, a2, b] {
            if d == 0 {
                return Err(Error::ZeroDimension);
            }
        }
        let total = a1 * a2 * b;
        if total > DIM_CAP {
            return Err(Error::DimensionCap(total));
        }
        Ok(Self { a1, a2, b })
    }

    pub fn total(&self) -> usize {
        self.a1 * self.a2 * self.b
    }

    /// `A1 | A2`.
    pub fn pair(&self) -> BipartiteDims {
        BipartiteDims {
            a: self.a1,
            b: self.a2,
        }
    }

    /// `A1 | A2B`.
    pub fn split_a1(&self) -> BipartiteDims {
        BipartiteDims {
            a: self.a1,
            b: self.a2 * self.b,
        }
    }

    /// `A1A2 | B`.
    pub fn split_b(&self) -> BipartiteDims {
        BipartiteDims {
            a: self.a1 * self.a2,
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    pub dims: TripartiteDims,
    pub ket: Ket,
}

impl TripartiteState {
    /// Reduced state of `A1`.
    pub fn marginal_a1(&self) -> Op {
        reduced_state(&self.ket, self.dims.split_a1(), Subsystem::B).expect("dims match")
    }
}

/// `(|z,+⟩|z,−⟩ − |z,−⟩|z,+⟩)/√2`.
pub fn singlet() -> Ket {
    real_ket(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
}

/// `(|z,+⟩ ± |z,−⟩)/√2`.
pub fn x_ket(plus: bool) -> Ket {
    let s = if plus { FRAC_1_SQRT_2 } else { -FRAC_1_SQRT_2 };
    real_ket(&[FRAC_1_SQRT_2, s])
}

/// x-spin projectors `(|x,+⟩⟨x,+|, |x,−⟩⟨x,−|)` with values ±1/2.
pub fn spin_x() -> SpectralForm {
    let p = |plus| crate::qlin::projector_onto(&x_ket(plus));
    SpectralForm::new(
        vec![0.5, -0.5],
        vec![p(true), p(false)],
        &Tolerances::default(),
    )
    .expect("valid spin observable")
}

fn check_pair(phi12: &Ket, dims: TripartiteDims, tol: &Tolerances) -> Result<()> {
    ensure_dim(phi12.len(), dims.a1 * dims.a2)?;
    ensure_unit(phi12, tol)
}

fn tripartite_dims(phi12: &Ket, a1: usize, s: &MeasurementScheme) -> Result<TripartiteDims> {
    let dims = TripartiteDims::new(a1, s.dims().a, s.dims().b)?;
    ensure_dim(phi12.len(), a1 * s.dims().a)?;
    Ok(dims)
}

/// `(U_{A1} ⊗ U_{A2B})(φ_{12} ⊗ ready)`.
fn evolve_tripartite(phi12: &Ket, s: &MeasurementScheme, u_a1: &Op) -> Ket {
    u_a1.kronecker(s.interaction()) * phi12.kronecker(s.ready())
}

#[derive(Debug, Clone)]
pub struct SubsystemPremeasurement {
    pub state: TripartiteState,
    /// `‖ρ_{A1}^final − U_{A1} ρ_{A1} U_{A1}†‖`: how much the `A2B`
    /// interaction changed the distant marginal.
    pub no_influence_residual: f64,
}

/// Premeasures `A2` with `s` while `A1` evolves freely under `u_a1`.
pub fn subsystem_premeasure(
    phi12: &Ket,
    a1: usize,
    s: &MeasurementScheme,
    u_a1: &Op,
    tol: &Tolerances,
) -> Result<SubsystemPremeasurement> {
    let dims = tripartite_dims(phi12, a1, s)?;
    check_pair(phi12, dims, tol)?;
    ensure_dim(u_a1.nrows(), a1)?;
    ensure_unitary(u_a1, tol)?;
    let state = TripartiteState {
        dims,
        ket: evolve_tripartite(phi12, s, u_a1),
    };
    let rho1 = reduced_state(phi12, dims.pair(), Subsystem::B)?;
    let expected = u_a1 * rho1 * u_a1.adjoint();
    let no_influence_residual = (state.marginal_a1() - expected).norm();
    Ok(SubsystemPremeasurement {
        state,
        no_influence_residual,
    })
}

/// State of `A1` conditioned on `e` (acting on `A2`) being found:
/// `tr_{A2}((I⊗e)|φ⟩⟨φ|(I⊗e)) / p`.
pub fn conditional_state(phi12: &Ket, e: &Op, a1: usize, tol: &Tolerances) -> Result<Op> {
    let a2 = e.nrows();
    let dims = BipartiteDims::new(a1, a2)?;
    ensure_dim(phi12.len(), dims.total())?;
    let v = lift_b(e, dims) * phi12;
    let p = v.norm_squared();
    if p <= tol.prob {
        return Err(Error::ZeroProbability(p));
    }
    Ok(reduced_state(&v, dims, Subsystem::B)?.unscale(p))
}

#[derive(Debug, Clone)]
pub struct DistantOutcome {
    pub probability: f64,
    /// `A1` marginal after selecting pointer position `k`.
    pub state: Op,
    /// `U_{A1} ρ_{A1|E^k} U_{A1}†`.
    pub predicted: Op,
    pub residual: f64,
}

/// Conditions the tripartite final state on pointer position `k` and
/// compares the resulting `A1` state with the conditional state predicted
/// from `E^k` on `A2` alone.
pub fn distant_state_after_complete(
    phi12: &Ket,
    a1: usize,
    s: &MeasurementScheme,
    o_a2: &SpectralForm,
    u_a1: &Op,
    k: usize,
    tol: &Tolerances,
) -> Result<DistantOutcome> {
    let dims = tripartite_dims(phi12, a1, s)?;
    check_pair(phi12, dims, tol)?;
    ensure_dim(u_a1.nrows(), a1)?;
    ensure_unitary(u_a1, tol)?;
    let view = SchemeView::new(s, o_a2)?;
    let cc = cc_invariance(&view, &view.e_basis_eig);
    if Outcome::from_residual(cc.residual, tol.op, tol) != Outcome::Pass {
        return Err(Error::Precondition(
            "calibration condition does not hold".into(),
        ));
    }
    if k >= o_a2.len() {
        return Err(Error::Precondition(format!(
            "index {k} is past the observable's {} eigenvalues",
            o_a2.len()
        )));
    }
    let fin = evolve_tripartite(phi12, s, u_a1);
    let selected = lift_b(s.pointer().projector(k), dims.split_b()) * fin;
    let probability = selected.norm_squared();
    if probability <= tol.prob {
        return Err(Error::ZeroProbability(probability));
    }
    let state = reduced_state(&selected, dims.split_a1(), Subsystem::B)?.unscale(probability);
    let predicted = u_a1 * conditional_state(phi12, o_a2.projector(k), a1, tol)? * u_a1.adjoint();
    let residual = (&state - &predicted).norm();
    Ok(DistantOutcome {
        probability,
        state,
        predicted,
        residual,
    })
}

/// An `A1` observable whose outcomes are perfectly correlated with an
/// `A2` observable in a given pair state.
#[derive(Debug, Clone)]
pub struct Twin {
    pub observable: SpectralForm,
    /// `max_k ‖(E_1^k ⊗ I − I ⊗ E_2^k)φ‖`
    pub residual: f64,
    /// `max_k` distance between the `A1` states conditioned on `E_1^k`
    /// and on `E_2^k`.
    pub consistency_residual: f64,
}

/// Looks for a twin of `o_a2` in `phi12`.
///
/// The candidate is `E_1^k = Ψ (E_2^k)ᵀ Ψ⁺` on the support of `ρ_{A1}`,
/// with `Ψ` the coefficient matrix and `Ψ⁺` its pseudo-inverse; the
/// complement of the support is added to the first projector. `None` when
/// the candidates are not orthogonal projectors or fail the twin identity.
pub fn find_twin(
    phi12: &Ket,
    a1: usize,
    o_a2: &SpectralForm,
    tol: &Tolerances,
) -> Result<Option<Twin>> {
    let a2 = o_a2.dim();
    let dims = BipartiteDims::new(a1, a2)?;
    ensure_dim(phi12.len(), dims.total())?;
    ensure_unit(phi12, tol)?;
    let psi = crate::qlin::coefficient_matrix(phi12, dims);
    let pinv = crate::qlin::pseudo_inverse(&psi, tol.vec);
    let support = &psi * &pinv;
    let off_support = identity(a1) - &support;

    let mut projectors: Vec<Op> = o_a2
        .projectors()
        .iter()
        .map(|e| &psi * e.transpose() * &pinv)
        .collect();
    if let Some(first) = projectors.first_mut() {
        *first += off_support;
    }
    let defect = projectors
        .iter()
        .map(projector_residual)
        .fold(0.0, f64::max);
    if defect > tol.op {
        return Ok(None);
    }
    let Ok(observable) = SpectralForm::new(o_a2.eigenvalues().to_vec(), projectors, tol) else {
        return Ok(None);
    };

    let mut residual: f64 = 0.0;
    let mut consistency_residual: f64 = 0.0;
    for k in 0..o_a2.len() {
        let d = lift_a(observable.projector(k), dims) - lift_b(o_a2.projector(k), dims);
        residual = residual.max((d * phi12).norm());
        let v1 = lift_a(observable.projector(k), dims) * phi12;
        let p1 = v1.norm_squared();
        if p1 > tol.prob {
            let via_twin = reduced_state(&v1, dims, Subsystem::B)?.unscale(p1);
            let via_a2 = conditional_state(phi12, o_a2.projector(k), a1, tol)?;
            consistency_residual = consistency_residual.max((via_twin - via_a2).norm());
        }
    }
    if residual > tol.vec {
        return Ok(None);
    }
    Ok(Some(Twin {
        observable,
        residual,
        consistency_residual,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::qlin::{basis_ket, diag, projector_onto};
    use crate::random::{random_ket, random_unitary, rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn singlet_twin_of_z_is_flipped_z() {
        let t = find_twin(&singlet(), 2, &fixtures::spin_z(), &tol())
            .unwrap()
            .unwrap();
        assert!((t.observable.projector(0) - diag(&[0.0, 1.0])).norm() < 1e-12);
        assert!((t.observable.projector(1) - diag(&[1.0, 0.0])).norm() < 1e-12);
        assert!(t.residual < 1e-12 && t.consistency_residual < 1e-12);
    }

    #[test]
    fn singlet_twin_of_x_is_flipped_x() {
        let t = find_twin(&singlet(), 2, &spin_x(), &tol())
            .unwrap()
            .unwrap();
        assert!((t.observable.projector(0) - projector_onto(&x_ket(false))).norm() < 1e-12);
    }

    #[test]
    fn product_state_has_no_twin_for_spread_observable() {
        // A2 in |x,+⟩ gives both z outcomes probability 1/2.
        let phi = basis_ket(2, 0).kronecker(&x_ket(true));
        assert!(find_twin(&phi, 2, &fixtures::spin_z(), &tol())
            .unwrap()
            .is_none());
    }

    #[test]
    fn distant_states_after_z_and_x() {
        let s = fixtures::s_ideal2().scheme;
        let id = identity(2);
        // Outcome z− on A2 (k=1) leaves A1 in |z,+⟩.
        let out =
            distant_state_after_complete(&singlet(), 2, &s, &fixtures::spin_z(), &id, 1, &tol())
                .unwrap();
        assert!((out.probability - 0.5).abs() < 1e-12);
        assert!((out.state - diag(&[1.0, 0.0])).norm() < 1e-12);
        assert!(out.residual < 1e-12);

        let sx =
            crate::kinds::build_ideal(&spin_x(), &fixtures::pointer2(), &basis_ket(2, 0), &tol())
                .unwrap();
        let out =
            distant_state_after_complete(&singlet(), 2, &sx, &spin_x(), &id, 1, &tol()).unwrap();
        assert!((out.state - projector_onto(&x_ket(true))).norm() < 1e-12);
    }

    #[test]
    fn distant_marginal_is_untouched() {
        let mut r = rng(21);
        let s = fixtures::s_nd_ent().scheme;
        let phi = random_ket(2 * 3, &mut r);
        let u1 = random_unitary(2, &mut r);
        let p = subsystem_premeasure(&phi, 2, &s, &u1, &tol()).unwrap();
        assert!(p.no_influence_residual < 1e-12);
    }

    #[test]
    fn singlet_properties() {
        let s = singlet();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let sd = crate::qlin::schmidt(&s, BipartiteDims::new(2, 2).unwrap(), &tol()).unwrap();
        assert_eq!(sd.rank(), 2);
        for c in sd.coefficients {
            assert!((c - FRAC_1_SQRT_2).abs() < 1e-14);
        }
        let sz = fixtures::spin_z().operator();
        let dims = BipartiteDims::new(2, 2).unwrap();
        let total = lift_a(&sz, dims) + lift_b(&sz, dims);
        assert!(crate::qlin::expectation(&s, &total).abs() < 1e-15);
    }

    #[test]
    fn singlet_marginal_is_maximally_mixed() {
        let pair = BipartiteDims::new(2, 2).unwrap();
        let half = diag(&[0.5, 0.5]);
        assert!((reduced_state(&singlet(), pair, Subsystem::B).unwrap() - &half).norm() < 1e-15);
        let s2 = fixtures::s_ideal2().scheme;
        let p = subsystem_premeasure(&singlet(), 2, &s2, &identity(2), &tol()).unwrap();
        assert!((p.state.marginal_a1() - half).norm() < 1e-12);
    }

    #[test]
    fn product_inputs_leave_a1_alone() {
        let mut r = rng(2);
        let a1 = random_ket(2, &mut r);
        let a2 = random_ket(2, &mut r);
        let phi = a1.kronecker(&a2);
        let u1 = random_unitary(2, &mut r);
        let s = fixtures::s_ideal2().scheme;
        let expected = projector_onto(&(&u1 * &a1));
        for k in 0..2 {
            let out =
                distant_state_after_complete(&phi, 2, &s, &fixtures::spin_z(), &u1, k, &tol())
                    .unwrap();
            assert!((out.state - &expected).norm() < 1e-12);
        }
        let p = subsystem_premeasure(&phi, 2, &s, &identity(2), &tol()).unwrap();
        assert!((p.state.marginal_a1() - projector_onto(&a1)).norm() < 1e-12);
    }

    #[test]
    fn demolition_scheme_gives_same_distant_state() {
        // A demolition scheme for z: |0⟩|0⟩ ↦ |1⟩|0⟩, |1⟩|0⟩ ↦ |0⟩|1⟩.
        let t = tol();
        let d = BipartiteDims::new(2, 2).unwrap();
        let demolition = crate::scheme::build_premeasurement(
            &fixtures::spin_z(),
            &fixtures::pointer2(),
            &basis_ket(2, 0),
            &[
                crate::scheme::AssignmentEntry::basis(d, 0, 1, 0),
                crate::scheme::AssignmentEntry::basis(d, 1, 0, 1),
            ],
            &t,
        )
        .unwrap();
        let ideal = fixtures::s_ideal2().scheme;
        let phi = random_ket(4, &mut rng(12));
        for k in 0..2 {
            let a = distant_state_after_complete(
                &phi,
                2,
                &ideal,
                &fixtures::spin_z(),
                &identity(2),
                k,
                &t,
            )
            .unwrap();
            let b = distant_state_after_complete(
                &phi,
                2,
                &demolition,
                &fixtures::spin_z(),
                &identity(2),
                k,
                &t,
            )
            .unwrap();
            assert!((a.state - b.state).norm() < 1e-12);
        }
    }

    #[test]
    fn product_state_with_certain_outcome_has_twin() {
        let phi = x_ket(true).kronecker(&basis_ket(2, 1));
        let t = find_twin(&phi, 2, &fixtures::spin_z(), &tol())
            .unwrap()
            .unwrap();
        // E_2^1 is certain, so its twin is the identity and E_1^0 gets nothing
        // on the support; the off-support complement goes to index 0.
        assert!((t.observable.projector(1) - projector_onto(&x_ket(true))).norm() < 1e-12);
        assert!((t.observable.projector(0) - projector_onto(&x_ket(false))).norm() < 1e-12);
    }

    #[test]
    fn zero_probability_is_rejected() {
        let phi = basis_ket(2, 0).kronecker(&basis_ket(2, 0));
        assert!(matches!(
            conditional_state(&phi, &diag(&[0.0, 1.0]), 2, &tol()),
            Err(Error::ZeroProbability(_))
        ));
    }
}
