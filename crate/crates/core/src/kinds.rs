//! Disentanglement, state transformers, ideal measurements and the
//! five-way classification of calibrated schemes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::SpectralForm;
use crate::qlin::{
    eigh, ensure_dim, ensure_unit, identity, projector_onto, range_basis, reduced_state,
    BipartiteDims, Ket, Op, Subsystem, C64,
};
use crate::scheme::{build_nondemolition, AssignmentEntry, MeasurementScheme};
use crate::tol::Tolerances;
use crate::verify::general::cc_invariance;
use crate::verify::{CheckConfig, Outcome, SchemeView};

/// Measurement classes, ordered from most to least benign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MClass {
    /// Ideal: nondemolition and disentangled with `M_k = E^k`.
    M11a,
    /// Nondemolition and disentangled, not ideal.
    M11b,
    /// Nondemolition, entangled.
    M12,
    /// Demolition, disentangled.
    M21,
    /// Demolition, entangled.
    M22,
}

impl MClass {
    pub const ALL: [MClass; 5] = [
        MClass::M11a,
        MClass::M11b,
        MClass::M12,
        MClass::M21,
        MClass::M22,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            MClass::M11a => "M11a",
            MClass::M11b => "M11b",
            MClass::M12 => "M12",
            MClass::M21 => "M21",
            MClass::M22 => "M22",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    fn of(nondemolition: bool, disentangled: bool, ideal: bool) -> Self {
        match (nondemolition, disentangled) {
            (true, true) if ideal => MClass::M11a,
            (true, true) => MClass::M11b,
            (true, false) => MClass::M12,
            (false, true) => MClass::M21,
            (false, false) => MClass::M22,
        }
    }
}

impl fmt::Display for MClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

fn cc_established(view: &SchemeView, tol: &Tolerances) -> bool {
    let w = cc_invariance(view, &view.e_basis_eig);
    Outcome::from_residual(w.residual, tol.op, tol) == Outcome::Pass
}

/// Pointer marginal of one branch.
#[derive(Debug, Clone, Serialize)]
pub struct BranchMarginal {
    pub k: usize,
    /// Number of eigenvalues of the marginal above `rank_rel` times the
    /// largest one; zero for an empty branch.
    pub rank: usize,
    /// Descending eigenvalues of `Σ_q tr_A |v_q⟩⟨v_q|`.
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub top_vector: Option<Ket>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Disentanglement {
    pub cc_established: bool,
    pub disentangled: bool,
    pub branches: Vec<BranchMarginal>,
}

impl Disentanglement {
    /// First entangling branch, if any.
    pub fn witness(&self) -> Option<&BranchMarginal> {
        self.branches.iter().find(|b| b.rank > 1)
    }
}

/// Decides per branch whether `(I ⊗ F^k) U (ℛ(E^k) ⊗ ready)` factorizes
/// through a single pointer vector, via the rank of the summed pointer
/// marginal of the images of an eigenbasis.
pub fn is_disentangled(
    s: &MeasurementScheme,
    o: &SpectralForm,
    tol: &Tolerances,
) -> Result<Disentanglement> {
    let view = SchemeView::new(s, o)?;
    Ok(disentanglement(&view, tol))
}

fn disentanglement(view: &SchemeView, tol: &Tolerances) -> Disentanglement {
    let dims = view.scheme.dims();
    let branches: Vec<BranchMarginal> = (0..view.n())
        .map(|k| {
            let mut marginal = Op::zeros(dims.b, dims.b);
            for e in &view.e_basis_eig[k] {
                let v = &view.f_lifted[k] * (&view.evolution * e);
                marginal += reduced_state(&v, dims, Subsystem::A).expect("dims match");
            }
            let (values, vectors) = eigh(&marginal);
            let top = values.first().copied().unwrap_or(0.0);
            let rank = if top <= tol.norm {
                0
            } else {
                values.iter().filter(|&&l| l > tol.rank_rel * top).count()
            };
            BranchMarginal {
                k,
                rank,
                eigenvalues: values,
                top_vector: (rank > 0).then(|| vectors[0].clone()),
            }
        })
        .collect();
    Disentanglement {
        cc_established: cc_established(view, tol),
        disentangled: branches.iter().all(|b| b.rank <= 1),
        branches,
    }
}

/// Kraus-type operators `M_k` with `U(φ ⊗ ready) = Σ_k M_k φ ⊗ b_k`.
#[derive(Debug, Clone)]
pub struct StateTransformerSet {
    pub transformers: Vec<Op>,
    pub pointer_vectors: Vec<Ket>,
    /// `‖Σ_k M_k†M_k − I‖`
    pub completeness_residual: f64,
    /// `max_k ‖M_k†M_k − E^k‖`
    pub partial_isometry_residual: f64,
    /// `‖U(I ⊗ ready) − Σ_k M_k ⊗ b_k‖`
    pub reconstruction_residual: f64,
    /// `M_k†M_l = 0` for all `k ≠ l`.
    pub orthogonal_family: bool,
}

/// Extracts the state transformers of a calibrated disentangled scheme.
///
/// Phase gauge: each pointer vector is rotated so that `tr M_k` is real
/// and positive; when the trace vanishes, the first component of `b_k`
/// above `1e-6` is made real and positive instead.
pub fn extract_state_transformers(
    s: &MeasurementScheme,
    o: &SpectralForm,
    tol: &Tolerances,
) -> Result<StateTransformerSet> {
    let view = SchemeView::new(s, o)?;
    if !cc_established(&view, tol) {
        return Err(Error::Precondition(
            "calibration condition does not hold".into(),
        ));
    }
    let d = disentanglement(&view, tol);
    if let Some(b) = d.witness() {
        return Err(Error::Entangled {
            k: b.k,
            rank: b.rank,
        });
    }
    Ok(transformers_of(&view, &d, tol))
}

fn transformers_of(
    view: &SchemeView,
    d: &Disentanglement,
    tol: &Tolerances,
) -> StateTransformerSet {
    let dims = view.scheme.dims();
    let mut transformers = Vec::with_capacity(view.n());
    let mut pointer_vectors = Vec::with_capacity(view.n());
    for (k, branch) in d.branches.iter().enumerate() {
        let b = match &branch.top_vector {
            Some(v) => v.clone(),
            None => range_basis(view.scheme.pointer().projector(k))
                .into_iter()
                .next()
                .unwrap_or_else(|| Ket::zeros(dims.b)),
        };
        let m = transformer(view, &b, k);
        let (m, b) = gauge(m, b);
        transformers.push(m);
        pointer_vectors.push(b);
    }
    let id = identity(dims.a);
    let completeness_residual = (transformers
        .iter()
        .fold(Op::zeros(dims.a, dims.a), |acc, m| acc + m.adjoint() * m)
        - id)
        .norm();
    let partial_isometry_residual = transformers
        .iter()
        .zip(&view.e)
        .map(|(m, e)| (m.adjoint() * m - e).norm())
        .fold(0.0, f64::max);
    let rebuilt = transformers
        .iter()
        .zip(&pointer_vectors)
        .fold(Op::zeros(dims.total(), dims.a), |acc, (m, b)| {
            acc + kron_col(m, b)
        });
    let reconstruction_residual = (&view.evolution - rebuilt).norm();
    let mut orthogonal_family = true;
    for k in 0..transformers.len() {
        for l in 0..transformers.len() {
            if k != l && (transformers[k].adjoint() * &transformers[l]).norm() > tol.op {
                orthogonal_family = false;
            }
        }
    }
    StateTransformerSet {
        transformers,
        pointer_vectors,
        completeness_residual,
        partial_isometry_residual,
        reconstruction_residual,
        orthogonal_family,
    }
}

/// `M = (I ⊗ ⟨b|) U (I ⊗ ready) E^k`.
fn transformer(view: &SchemeView, b: &Ket, k: usize) -> Op {
    let dim_a = view.scheme.dims().a;
    identity(dim_a).kronecker(&b.adjoint()) * &view.evolution * &view.e[k]
}

/// `M ⊗ |b⟩` as a `dim_a·dim_b × dim_a` map.
fn kron_col(m: &Op, b: &Ket) -> Op {
    m.kronecker(b)
}

fn gauge(m: Op, b: Ket) -> (Op, Ket) {
    let t = m.trace();
    let c = if t.norm() > 1e-6 {
        t / t.norm()
    } else {
        match b.iter().find(|x| x.norm() > 1e-6) {
            Some(x) => x.conj() / x.norm(),
            None => return (m, b),
        }
    };
    // b' = c·b turns ⟨b| into c̄⟨b|, so M' = c̄·M.
    (m * c.conj(), b * c)
}

/// `max_k ‖M_k − E^k M_k‖`: each transformer maps into its eigenspace.
pub fn is_nondemolition_kraus(
    t: &StateTransformerSet,
    o: &SpectralForm,
    tol: &Tolerances,
) -> (bool, f64) {
    let residual = t
        .transformers
        .iter()
        .enumerate()
        .map(|(k, m)| (m - o.projector_or_zero(k) * m).norm())
        .fold(0.0, f64::max);
    (residual <= tol.op, residual)
}

/// One selective outcome of the Lüders rule.
#[derive(Debug, Clone)]
pub struct LudersBranch {
    pub k: usize,
    pub probability: f64,
    /// `E^k φ / ‖E^k φ‖`
    pub state: Ket,
}

/// Nonselective Lüders state `Σ_k E^k |φ⟩⟨φ| E^k`.
pub fn luders_channel(phi: &Ket, o: &SpectralForm, tol: &Tolerances) -> Result<Op> {
    ensure_dim(phi.len(), o.dim())?;
    ensure_unit(phi, tol)?;
    Ok(o.projectors()
        .iter()
        .fold(Op::zeros(o.dim(), o.dim()), |acc, e| {
            acc + projector_onto(&(e * phi))
        }))
}

/// Selective Lüders states for every outcome with probability above
/// `tol.prob`.
pub fn luders_branches(phi: &Ket, o: &SpectralForm, tol: &Tolerances) -> Result<Vec<LudersBranch>> {
    ensure_dim(phi.len(), o.dim())?;
    ensure_unit(phi, tol)?;
    Ok(o.projectors()
        .iter()
        .enumerate()
        .filter_map(|(k, e)| {
            let v = e * phi;
            let p = v.norm_squared();
            (p > tol.prob).then(|| LudersBranch {
                k,
                probability: p,
                state: v.unscale(p.sqrt()),
            })
        })
        .collect())
}

/// Outcome of the three definitions of an ideal measurement.
#[derive(Debug, Clone, Serialize)]
pub struct IdealReport {
    pub cc_established: bool,
    /// Canonical final state: disentangled with `M_k = E^k`.
    pub canonical: bool,
    pub canonical_residual: f64,
    /// Final object marginal equals the Lüders state.
    pub luders: bool,
    pub luders_residual: f64,
    /// Sharp initial states are left unchanged.
    pub sharp_unchanged: bool,
    pub sharp_residual: f64,
}

impl IdealReport {
    pub fn ideal(&self) -> bool {
        self.canonical
    }

    pub fn definitions_agree(&self) -> bool {
        self.canonical == self.luders && self.luders == self.sharp_unchanged
    }
}

pub fn is_ideal(s: &MeasurementScheme, o: &SpectralForm, tol: &Tolerances) -> Result<IdealReport> {
    let view = SchemeView::new(s, o)?;
    let cc = cc_established(&view, tol);
    let dims = s.dims();

    let d = disentanglement(&view, tol);
    let canonical_residual = if d.disentangled {
        let t = transformers_of(&view, &d, tol);
        t.transformers
            .iter()
            .zip(&view.e)
            .map(|(m, e)| (m - e).norm())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let luders_residual = polarization_set(dims.a)
        .iter()
        .map(|phi| {
            let rho = marginal_a(&view, phi, dims);
            let target = view.e.iter().fold(Op::zeros(dims.a, dims.a), |acc, e| {
                acc + projector_onto(&(e * phi))
            });
            (rho - target).norm()
        })
        .fold(0.0, f64::max);

    let mut sharp_residual: f64 = 0.0;
    for basis in &view.e_basis_eig {
        for phi in pairwise_inputs(basis) {
            let rho = marginal_a(&view, &phi, dims);
            sharp_residual = sharp_residual.max((rho - projector_onto(&phi)).norm());
        }
    }

    Ok(IdealReport {
        cc_established: cc,
        canonical: canonical_residual <= tol.op,
        canonical_residual,
        luders: luders_residual <= tol.op,
        luders_residual,
        sharp_unchanged: sharp_residual <= tol.op,
        sharp_residual,
    })
}

fn marginal_a(view: &SchemeView, phi: &Ket, dims: BipartiteDims) -> Op {
    reduced_state(&(&view.evolution * phi), dims, Subsystem::B).expect("dims match")
}

/// Basis kets together with `(e_i + e_j)/√2` and `(e_i + i·e_j)/√2`, which
/// determine a linear map on density operators.
fn polarization_set(dim: usize) -> Vec<Ket> {
    let basis: Vec<Ket> = (0..dim).map(|i| crate::qlin::basis_ket(dim, i)).collect();
    pairwise_inputs(&basis)
}

fn pairwise_inputs(basis: &[Ket]) -> Vec<Ket> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = basis.to_vec();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            out.push((&basis[i] + &basis[j]).scale(s));
            out.push((&basis[i] + &basis[j] * C64::i()).scale(s));
        }
    }
    out
}

/// Ideal scheme for `o`: each eigenvector `e` of `E^k` goes to `e ⊗ b_k`
/// with `b_k` the first vector of an index-ordered basis of `ℛ(F^k)`.
pub fn build_ideal(
    o: &SpectralForm,
    pointer: &SpectralForm,
    ready: &Ket,
    tol: &Tolerances,
) -> Result<MeasurementScheme> {
    if pointer.len() < o.len() {
        return Err(Error::InsufficientPointer {
            needed: o.len(),
            available: pointer.len(),
        });
    }
    let mut assignment = Vec::new();
    for k in 0..o.len() {
        let b =
            range_basis(pointer.projector(k))
                .into_iter()
                .next()
                .ok_or(Error::Uncompletable {
                    k,
                    needed: 1,
                    available: 0,
                })?;
        for e in range_basis(o.projector(k)) {
            let target = e.kronecker(&b);
            assignment.push(AssignmentEntry::new(e, target));
        }
    }
    build_nondemolition(o, pointer, ready, &assignment, tol)
}

/// Per-branch sub-verdicts behind a classification.
#[derive(Debug, Clone, Serialize)]
pub struct BranchClass {
    pub k: usize,
    pub nondemolition: bool,
    pub nondemolition_residual: f64,
    pub disentangled: bool,
    pub marginal_rank: usize,
    pub ideal: bool,
    pub class: MClass,
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub class: MClass,
    pub cc_established: bool,
    pub branches: Vec<BranchClass>,
}

/// Classifies each branch separately; the scheme's class is the worst
/// branch class in reading order.
pub fn classify(
    s: &MeasurementScheme,
    o: &SpectralForm,
    cfg: &CheckConfig,
) -> Result<Classification> {
    let tol = &cfg.tol;
    let view = SchemeView::new(s, o)?;
    let cc = cc_established(&view, tol);
    let d = disentanglement(&view, tol);
    let mut branches = Vec::with_capacity(o.len());
    for k in 0..o.len() {
        let outside = &view.id_total - &view.e_lifted[k];
        let nondemolition_residual = view.e_basis_eig[k]
            .iter()
            .map(|e| (&outside * (&view.evolution * e)).norm())
            .fold(0.0, f64::max);
        let nondemolition = nondemolition_residual <= tol.op;
        let marginal = &d.branches[k];
        let disentangled = marginal.rank <= 1;
        let ideal = disentangled
            && marginal.top_vector.as_ref().is_some_and(|b| {
                let (m, _) = gauge(transformer(&view, b, k), b.clone());
                (m - &view.e[k]).norm() <= tol.op
            });
        branches.push(BranchClass {
            k,
            nondemolition,
            nondemolition_residual,
            disentangled,
            marginal_rank: marginal.rank,
            ideal,
            class: MClass::of(nondemolition, disentangled, ideal),
        });
    }
    let class = branches
        .iter()
        .map(|b| b.class)
        .max()
        .unwrap_or(MClass::M11a);
    Ok(Classification {
        class,
        cc_established: cc,
        branches,
    })
}
