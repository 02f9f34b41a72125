//! Premeasurement schemes: a ready state of the instrument, a pointer
//! observable and the object–instrument interaction unitary.

use crate::error::{Error, Result};
use crate::observables::SpectralForm;
use crate::qlin::{
    basis_ket, complete_to_unitary, ensure_dim, ensure_unit, ensure_unitary, identity, lift_a,
    lift_b, null_space, rank_of_projector, BipartiteDims, Ket, Op, Tensor,
};
use crate::tol::Tolerances;

/// The triple `(ready state, pointer observable, interaction)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementScheme {
    dims: BipartiteDims,
    ready: Ket,
    pointer: SpectralForm,
    interaction: Op,
}

impl MeasurementScheme {
    pub fn new(
        dims: BipartiteDims,
        ready: Ket,
        pointer: SpectralForm,
        interaction: Op,
        tol: &Tolerances,
    ) -> Result<Self> {
        ensure_dim(ready.len(), dims.b)?;
        ensure_dim(pointer.dim(), dims.b)?;
        ensure_dim(interaction.nrows(), dims.total())?;
        ensure_unit(&ready, tol)?;
        ensure_unitary(&interaction, tol)?;
        Ok(Self {
            dims,
            ready,
            pointer,
            interaction,
        })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn ready(&self) -> &Ket {
        &self.ready
    }

    pub fn pointer(&self) -> &SpectralForm {
        &self.pointer
    }

    pub fn interaction(&self) -> &Op {
        &self.interaction
    }

    /// Same interaction and ready state with a different pointer.
    pub fn with_pointer(&self, pointer: SpectralForm, tol: &Tolerances) -> Result<Self> {
        Self::new(
            self.dims,
            self.ready.clone(),
            pointer,
            self.interaction.clone(),
            tol,
        )
    }

    /// Same pointer and ready state with a different interaction.
    pub fn with_interaction(&self, interaction: Op, tol: &Tolerances) -> Result<Self> {
        Self::new(
            self.dims,
            self.ready.clone(),
            self.pointer.clone(),
            interaction,
            tol,
        )
    }

    /// `I_A ⊗ |ready⟩`, the isometric embedding of `ℋ_A` at the ready state.
    pub fn ready_embedding(&self) -> Op {
        identity(self.dims.a).kronecker(&self.ready)
    }

    /// `U·(I_A ⊗ |ready⟩)`: maps an object state to its final composite state.
    pub fn evolution_map(&self) -> Op {
        &self.interaction * self.ready_embedding()
    }

    /// `U(φ_A ⊗ ready)`.
    pub fn final_ket(&self, phi_a: &Ket) -> Result<Ket> {
        ensure_dim(phi_a.len(), self.dims.a)?;
        Ok(&self.interaction * phi_a.kronecker(&self.ready))
    }

    /// Checks that `o` lives on the object space and that the pointer has a
    /// position for each of its eigenvalues.
    pub fn check_observable(&self, o: &SpectralForm) -> Result<()> {
        ensure_dim(o.dim(), self.dims.a)?;
        if self.pointer.len() < o.len() {
            return Err(Error::InsufficientPointer {
                needed: o.len(),
                available: self.pointer.len(),
            });
        }
        Ok(())
    }

    /// Number of paired indices: one per pointer position. Positions beyond
    /// the observable's eigenvalues pair with the zero projector.
    pub fn branch_count(&self) -> usize {
        self.pointer.len()
    }
}

/// One index `k` of a final state.
#[derive(Debug, Clone)]
pub struct Branch {
    pub k: usize,
    /// `E^k φ_A`
    pub initial_component: Ket,
    /// `(I ⊗ F^k) Φ`
    pub final_component: Ket,
    /// `‖(I ⊗ F^k) Φ‖²`
    pub probability: f64,
}

#[derive(Debug, Clone)]
pub struct FinalState {
    pub ket: Ket,
    pub branches: Vec<Branch>,
}

/// Evolves `φ_A ⊗ ready` and splits the result along the pointer positions.
pub fn evolve(
    s: &MeasurementScheme,
    o: &SpectralForm,
    phi_a: &Ket,
    tol: &Tolerances,
) -> Result<FinalState> {
    s.check_observable(o)?;
    ensure_dim(phi_a.len(), s.dims.a)?;
    ensure_unit(phi_a, tol)?;
    let ket = s.final_ket(phi_a)?;
    let branches = (0..s.branch_count())
        .map(|k| {
            let fk = lift_b(s.pointer.projector(k), s.dims);
            let final_component = &fk * &ket;
            let probability = final_component.norm_squared();
            Branch {
                k,
                initial_component: o.projector_or_zero(k) * phi_a,
                final_component,
                probability,
            }
        })
        .collect();
    Ok(FinalState { ket, branches })
}

/// One term of the expansion of a final state into normalized branches.
#[derive(Debug, Clone)]
pub struct ExpansionTerm {
    pub k: usize,
    pub probability: f64,
    pub ket: Ket,
}

/// `Φ = Σ_k √p_k · (F^k Φ / ‖F^k Φ‖)`, omitting branches with vanishing
/// component.
pub fn complete_measurement_expansion(f: &FinalState, tol: &Tolerances) -> Vec<ExpansionTerm> {
    f.branches
        .iter()
        .filter_map(|b| {
            let n = b.final_component.norm();
            (n > tol.vec).then(|| ExpansionTerm {
                k: b.k,
                probability: b.probability,
                ket: b.final_component.unscale(n),
            })
        })
        .collect()
}

/// Where the assignment sends one object eigenvector (with the instrument in
/// its ready state).
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentEntry {
    /// Eigenvector of the measured observable, on `ℋ_A`.
    pub source: Ket,
    /// Image of `source ⊗ ready`, on `ℋ_A ⊗ ℋ_B`.
    pub target: Ket,
}

impl AssignmentEntry {
    pub fn new(source: Ket, target: Ket) -> Self {
        Self { source, target }
    }

    /// Entry for standard basis labels `|a_in⟩ ↦ |a_out⟩|b_out⟩`.
    pub fn basis(dims: BipartiteDims, a_in: usize, a_out: usize, b_out: usize) -> Self {
        Self {
            source: basis_ket(dims.a, a_in),
            target: basis_ket(dims.total(), dims.index(a_out, b_out)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TargetRange {
    /// `ℛ(I ⊗ F^k)`
    Pointer,
    /// `ℛ(E^k ⊗ F^k)`
    ObjectAndPointer,
}

/// Builds a scheme whose interaction sends each assigned
/// `|k,q⟩ ⊗ ready` into `ℛ(I ⊗ F^k)`; the remaining columns of the unitary
/// come from [`complete_to_unitary`].
pub fn build_premeasurement(
    o: &SpectralForm,
    pointer: &SpectralForm,
    ready: &Ket,
    assignment: &[AssignmentEntry],
    tol: &Tolerances,
) -> Result<MeasurementScheme> {
    build(o, pointer, ready, assignment, TargetRange::Pointer, tol)
}

/// As [`build_premeasurement`], with targets confined to `ℛ(E^k ⊗ F^k)`.
pub fn build_nondemolition(
    o: &SpectralForm,
    pointer: &SpectralForm,
    ready: &Ket,
    assignment: &[AssignmentEntry],
    tol: &Tolerances,
) -> Result<MeasurementScheme> {
    build(
        o,
        pointer,
        ready,
        assignment,
        TargetRange::ObjectAndPointer,
        tol,
    )
}

fn build(
    o: &SpectralForm,
    pointer: &SpectralForm,
    ready: &Ket,
    assignment: &[AssignmentEntry],
    range: TargetRange,
    tol: &Tolerances,
) -> Result<MeasurementScheme> {
    let dims = BipartiteDims::new(o.dim(), pointer.dim())?;
    ensure_dim(ready.len(), dims.b)?;
    ensure_unit(ready, tol)?;
    if pointer.len() < o.len() {
        return Err(Error::InsufficientPointer {
            needed: o.len(),
            available: pointer.len(),
        });
    }

    for k in 0..o.len() {
        let needed = rank_of_projector(o.projector(k));
        let per_factor = rank_of_projector(pointer.projector(k));
        let available = match range {
            TargetRange::Pointer => dims.a * per_factor,
            TargetRange::ObjectAndPointer => needed * per_factor,
        };
        if needed > available {
            return Err(Error::Uncompletable {
                k,
                needed,
                available,
            });
        }
    }

    let mut counts = vec![0usize; o.len()];
    let mut domain = Vec::with_capacity(assignment.len());
    let mut image = Vec::with_capacity(assignment.len());
    for (index, entry) in assignment.iter().enumerate() {
        ensure_dim(entry.source.len(), dims.a)?;
        ensure_dim(entry.target.len(), dims.total())?;
        let k = (0..o.len())
            .find(|&k| (o.projector(k) * &entry.source - &entry.source).norm() <= tol.vec)
            .ok_or(Error::SourceNotEigenvector { index })?;
        let admissible = match range {
            TargetRange::Pointer => lift_b(pointer.projector(k), dims),
            TargetRange::ObjectAndPointer => o.projector(k).kronecker(pointer.projector(k)),
        };
        let residual = (&admissible * &entry.target - &entry.target).norm();
        if residual > tol.vec {
            return Err(Error::OutsideRange { index, k, residual });
        }
        counts[k] += 1;
        domain.push(entry.source.tensor(ready)?);
        image.push(entry.target.clone());
    }
    for (k, &found) in counts.iter().enumerate() {
        let needed = rank_of_projector(o.projector(k));
        if found != needed {
            return Err(Error::AssignmentCount { k, needed, found });
        }
    }

    let u = complete_to_unitary(&domain, &image, dims.total(), tol)?;
    MeasurementScheme::new(dims, ready.clone(), pointer.clone(), u, tol)
}

/// Orthonormal basis of all instrument states for which `interaction`
/// satisfies the calibration condition for `o` with pointer `pointer`.
///
/// Computed as the joint null space of the maps
/// `φ_B ↦ (I − I⊗F^k)·U(|k,q⟩ ⊗ φ_B)` over every `k` and every basis
/// vector `|k,q⟩` of `ℛ(E^k)`. An empty result is valid.
pub fn ready_subspace(
    interaction: &Op,
    o: &SpectralForm,
    pointer: &SpectralForm,
    tol: &Tolerances,
) -> Result<Vec<Ket>> {
    let dims = BipartiteDims::new(o.dim(), pointer.dim())?;
    ensure_dim(interaction.nrows(), dims.total())?;
    ensure_unitary(interaction, tol)?;
    if pointer.len() < o.len() {
        return Err(Error::InsufficientPointer {
            needed: o.len(),
            available: pointer.len(),
        });
    }
    let id_b = identity(dims.b);
    let blocks = constraint_blocks(interaction, o, pointer, dims, &id_b);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = Op::zeros(rows, dims.b);
    let mut r = 0;
    for b in &blocks {
        stacked.view_mut((r, 0), (b.nrows(), dims.b)).copy_from(b);
        r += b.nrows();
    }
    let basis = null_space(&stacked, tol.vec);
    for v in &basis {
        let residual = (&stacked * v).norm();
        debug_assert!(
            residual <= 10.0 * tol.vec,
            "null vector residual {residual}"
        );
    }
    Ok(basis)
}

fn constraint_blocks(
    u: &Op,
    o: &SpectralForm,
    pointer: &SpectralForm,
    dims: BipartiteDims,
    id_b: &Op,
) -> Vec<Op> {
    let id = identity(dims.total());
    let mut blocks = Vec::new();
    for k in 0..o.len() {
        let outside = &id - lift_b(pointer.projector(k), dims);
        let to_outside = &outside * u;
        for e in crate::qlin::range_basis(o.projector(k)) {
            blocks.push(&to_outside * e.kronecker(id_b));
        }
    }
    blocks
}

/// `E^k ⊗ I_B` for every paired index of `s`.
pub(crate) fn lifted_object_projectors(s: &MeasurementScheme, o: &SpectralForm) -> Vec<Op> {
    (0..s.branch_count())
        .map(|k| lift_a(&o.projector_or_zero(k), s.dims()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::qlin::{real_ket, C64};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn t() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn ideal3_branch_probabilities() {
        let f = fixtures::s_ideal3();
        let phi = real_ket(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let fs = evolve(&f.scheme, &f.observable, &phi, &t()).unwrap();
        // explicit 6-dim product: |0⟩|0⟩/√2 + |2⟩|1⟩/√2
        let mut expected = Ket::zeros(6);
        expected[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        expected[5] = C64::new(FRAC_1_SQRT_2, 0.0);
        assert!((&fs.ket - &expected).norm() < 1e-14);
        assert!((fs.branches[0].probability - 0.5).abs() < 1e-14);
        assert!((fs.branches[1].probability - 0.5).abs() < 1e-14);
        let sum: Ket = fs
            .branches
            .iter()
            .fold(Ket::zeros(6), |a, b| a + &b.final_component);
        assert!((sum - &fs.ket).norm() < 1e-14);
    }

    #[test]
    fn sharp_input_has_single_branch() {
        let f = fixtures::s_demo3();
        let phi = basis_ket(3, 2);
        let fs = evolve(&f.scheme, &f.observable, &phi, &t()).unwrap();
        assert!(fs.branches[0].probability < 1e-20);
        assert!((fs.branches[1].probability - 1.0).abs() < 1e-14);
        let terms = complete_measurement_expansion(&fs, &t());
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].k, 1);
    }

    #[test]
    fn identity_interaction() {
        let o = crate::random::standard_observable(&[1, 1], &t());
        let p = crate::random::standard_observable(&[1, 1], &t());
        let dims = BipartiteDims::new(2, 2).unwrap();
        let s = MeasurementScheme::new(dims, basis_ket(2, 0), p, identity(4), &t()).unwrap();
        let phi = real_ket(&[0.6, 0.8]);
        let fs = evolve(&s, &o, &phi, &t()).unwrap();
        assert!((&fs.ket - phi.kronecker(&basis_ket(2, 0))).norm() < 1e-15);
        assert!((fs.branches[0].probability - 1.0).abs() < 1e-15);
    }

    #[test]
    fn evolve_rejects_wrong_dim() {
        let f = fixtures::s_ideal3();
        assert!(matches!(
            evolve(&f.scheme, &f.observable, &basis_ket(2, 0), &t()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expansion_reconstructs() {
        let f = fixtures::s_ideal3();
        let phi = real_ket(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]);
        let fs = evolve(&f.scheme, &f.observable, &phi, &t()).unwrap();
        let terms = complete_measurement_expansion(&fs, &t());
        assert_eq!(terms.len(), 2);
        let rebuilt = terms.iter().fold(Ket::zeros(6), |a, term| {
            a + term.ket.scale(term.probability.sqrt())
        });
        assert!((rebuilt - &fs.ket).norm() < 1e-14);
        for term in &terms {
            assert!((term.probability.sqrt() - FRAC_1_SQRT_2).abs() < 1e-14);
        }
        // orthogonal to ℛ(E²): second term disappears
        let fs = evolve(&f.scheme, &f.observable, &real_ket(&[0.6, 0.8, 0.0]), &t()).unwrap();
        let terms = complete_measurement_expansion(&fs, &t());
        assert_eq!(terms.iter().map(|t| t.k).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn wrong_pointer_range_rejected() {
        let f = fixtures::s_ideal3();
        let dims = f.scheme.dims();
        let mut a = fixtures::ideal3_assignment();
        a[2] = AssignmentEntry::basis(dims, 2, 2, 0);
        let r = build_premeasurement(
            &f.observable,
            f.scheme.pointer(),
            f.scheme.ready(),
            &a,
            &t(),
        );
        assert!(matches!(r, Err(Error::OutsideRange { index: 2, k: 1, .. })));
    }

    #[test]
    fn nondemolition_range_enforced() {
        let f = fixtures::s_demo3();
        let dims = f.scheme.dims();
        let mut a = fixtures::ideal3_assignment();
        a[2] = AssignmentEntry::new(
            basis_ket(3, 2),
            real_ket(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).kronecker(&basis_ket(2, 1)),
        );
        let r = build_nondemolition(
            &f.observable,
            f.scheme.pointer(),
            f.scheme.ready(),
            &a,
            &t(),
        );
        assert!(matches!(r, Err(Error::OutsideRange { index: 2, k: 1, .. })));
        assert!(build_premeasurement(
            &f.observable,
            f.scheme.pointer(),
            f.scheme.ready(),
            &a,
            &t()
        )
        .is_ok());
        let ideal = build_nondemolition(
            &f.observable,
            f.scheme.pointer(),
            f.scheme.ready(),
            &fixtures::ideal3_assignment(),
            &t(),
        );
        assert!(ideal.is_ok());
        let _ = dims;
    }

    #[test]
    fn uncompletable_and_counts() {
        let t = t();
        let o = crate::random::standard_observable(&[3], &t);
        // a pointer position of rank 0 leaves no room
        let p = SpectralForm::new(vec![0.0, 1.0], vec![Op::zeros(2, 2), identity(2)], &t).unwrap();
        let r = build_premeasurement(&o, &p, &basis_ket(2, 0), &[], &t);
        assert!(matches!(
            r,
            Err(Error::Uncompletable {
                k: 0,
                needed: 3,
                available: 0
            })
        ));

        let f = fixtures::s_ideal3();
        let mut a = fixtures::ideal3_assignment();
        a.pop();
        let r = build_premeasurement(&f.observable, f.scheme.pointer(), f.scheme.ready(), &a, &t);
        assert_eq!(
            r,
            Err(Error::AssignmentCount {
                k: 1,
                needed: 1,
                found: 0
            })
        );
    }

    #[test]
    fn build_is_deterministic() {
        let a = fixtures::s_demo_ent();
        let b = fixtures::s_demo_ent();
        assert_eq!(a.scheme.interaction(), b.scheme.interaction());
    }

    #[test]
    fn ready_subspace_of_ideal3_contains_ready() {
        let f = fixtures::s_ideal3();
        let basis = ready_subspace(
            f.scheme.interaction(),
            &f.observable,
            f.scheme.pointer(),
            &t(),
        )
        .unwrap();
        assert!(!basis.is_empty());
        let ready = f.scheme.ready();
        let proj = crate::qlin::projector_onto_span(2, &basis);
        assert!((&proj * ready - ready).norm() < 1e-10);
    }

    #[test]
    fn ready_subspace_of_identity_is_empty() {
        let t = t();
        let o = crate::random::standard_observable(&[1, 1], &t);
        let p = crate::random::standard_observable(&[1, 1], &t);
        // U = I can never move |1⟩_A's pointer away from φ_B, and |0⟩_A needs F¹
        let basis = ready_subspace(&identity(4), &o, &p, &t).unwrap();
        assert!(basis.is_empty());
    }
}
