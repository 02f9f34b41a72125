//! The eight equivalent criteria for general premeasurement, and the
//! reversed-role probability check.

use serde::Serialize;

use super::{CheckConfig, FamilyReport, Outcome, SchemeView, VerdictReport, Worst};
use crate::error::{Error, Result};
use crate::observables::SpectralForm;
use crate::qlin::{ensure_dim, ensure_unit, expectation, identity, range_basis, Ket, Op};
use crate::random::{random_ket, random_orthonormal_in, rng};
use crate::scheme::MeasurementScheme;

const FAMILY: &str = "general";

/// Number of extra randomized pointer eigenbases for the expansion check.
const RANDOM_POINTER_BASES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GeneralCriterion {
    /// Sharp values are detected with probability one.
    CcStat,
    /// Sharp eigenvectors end up invariant under the matching pointer position.
    CcInv,
    /// Invariance in both directions.
    StrongInv,
    /// Initial and pointer probabilities coincide.
    Prc,
    /// `F^k U = U E^k` on the ready subspace.
    Dynamical,
    /// Eigenbasis images lie in `ℛ(I ⊗ F^k)`.
    BasisDyn,
    /// Eigenspace images lie in `ℛ(I ⊗ F^k)`.
    SubspaceDyn,
    /// Expansion in pointer eigenbases has the right coefficient weights.
    Expansion,
}

impl GeneralCriterion {
    pub const ALL: [GeneralCriterion; 8] = [
        GeneralCriterion::CcStat,
        GeneralCriterion::CcInv,
        GeneralCriterion::StrongInv,
        GeneralCriterion::Prc,
        GeneralCriterion::Dynamical,
        GeneralCriterion::BasisDyn,
        GeneralCriterion::SubspaceDyn,
        GeneralCriterion::Expansion,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            GeneralCriterion::CcStat => "CC_STAT",
            GeneralCriterion::CcInv => "CC_INV",
            GeneralCriterion::StrongInv => "STRONG_INV",
            GeneralCriterion::Prc => "PRC",
            GeneralCriterion::Dynamical => "DYNAMICAL",
            GeneralCriterion::BasisDyn => "BASIS_DYN",
            GeneralCriterion::SubspaceDyn => "SUBSPACE_DYN",
            GeneralCriterion::Expansion => "EXPANSION",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            GeneralCriterion::CcStat => "calibration, statistical form",
            GeneralCriterion::CcInv => "calibration, invariance form",
            GeneralCriterion::StrongInv => "calibration, strong invariance form",
            GeneralCriterion::Prc => "probability reproducibility",
            GeneralCriterion::Dynamical => "dynamical condition",
            GeneralCriterion::BasisDyn => "basis-dynamical condition",
            GeneralCriterion::SubspaceDyn => "subspace-dynamical condition",
            GeneralCriterion::Expansion => "pointer-basis expansion",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.tag() == tag)
    }

    fn seed_offset(&self) -> u64 {
        Self::ALL.iter().position(|c| c == self).unwrap_or(0) as u64 + 1
    }
}

/// Evaluates a single criterion.
pub fn verify_general(
    s: &MeasurementScheme,
    o: &SpectralForm,
    criterion: GeneralCriterion,
    cfg: &CheckConfig,
) -> Result<VerdictReport> {
    let view = SchemeView::new(s, o)?;
    Ok(evaluate(&view, criterion, cfg))
}

/// Evaluates all eight criteria and reports whether they agree.
pub fn verify_all_general(
    s: &MeasurementScheme,
    o: &SpectralForm,
    cfg: &CheckConfig,
) -> Result<FamilyReport> {
    let view = SchemeView::new(s, o)?;
    let verdicts = GeneralCriterion::ALL
        .iter()
        .map(|&c| evaluate(&view, c, cfg))
        .collect();
    Ok(FamilyReport::new(verdicts))
}

pub(crate) fn evaluate(
    view: &SchemeView,
    criterion: GeneralCriterion,
    cfg: &CheckConfig,
) -> VerdictReport {
    let worst = match criterion {
        GeneralCriterion::CcStat => cc_statistical(view),
        GeneralCriterion::CcInv => cc_invariance(view, &view.e_basis_eig),
        GeneralCriterion::StrongInv => strong_invariance(view),
        GeneralCriterion::Prc => probability_reproducibility(view, cfg, criterion.seed_offset()),
        GeneralCriterion::Dynamical => dynamical(view),
        GeneralCriterion::BasisDyn => cc_invariance(view, &view.e_basis_gs),
        GeneralCriterion::SubspaceDyn => subspace_dynamical(view),
        GeneralCriterion::Expansion => expansion(view, cfg, criterion.seed_offset()),
    };
    let tolerance = match criterion {
        GeneralCriterion::CcStat => cfg.tol.prob,
        _ => cfg.tol.op,
    };
    worst.into_report(FAMILY, criterion.tag(), tolerance, &cfg.tol)
}

/// `‖(I − I⊗F^k) U(|k,q⟩ ⊗ ready)‖` over a basis of each eigenspace.
pub(crate) fn cc_invariance(view: &SchemeView, bases: &[Vec<Ket>]) -> Worst {
    let mut w = Worst::default();
    for (k, basis) in bases.iter().enumerate() {
        let outside = &view.id_total - &view.f_lifted[k];
        for (q, e) in basis.iter().enumerate() {
            let r = (&outside * (&view.evolution * e)).norm();
            w.offer(r, k, || format!("eigenvector {q} of E^{k}"));
        }
    }
    w
}

/// `1 − ⟨Φ|I⊗F^k|Φ⟩` for sharp inputs, evaluated as the probability of the
/// complementary event and judged against the probability tolerance.
fn cc_statistical(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    for (k, basis) in view.e_basis_eig.iter().enumerate() {
        let outside = &view.id_total - &view.f_lifted[k];
        for (q, e) in basis.iter().enumerate() {
            let phi = &view.evolution * e;
            let deficit = expectation(&phi, &outside).max(0.0);
            w.offer(deficit, k, || format!("eigenvector {q} of E^{k}"));
        }
    }
    w
}

fn strong_invariance(view: &SchemeView) -> Worst {
    let mut w = cc_invariance(view, &view.e_basis_eig);
    for (k, basis) in view.e_complement_basis.iter().enumerate() {
        for (q, x) in basis.iter().enumerate() {
            let r = (&view.f_lifted[k] * (&view.evolution * x)).norm();
            w.offer(r, k, || {
                format!("vector {q} orthogonal to E^{k} reaches F^{k}")
            });
        }
    }
    w
}

fn probability_reproducibility(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let v = &view.evolution;
    for k in 0..view.n() {
        let r = (v.adjoint() * &view.f_lifted[k] * v - &view.e[k]).norm();
        w.offer(r, k, || format!("operator identity for k={k}"));
    }
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    let dim_a = view.scheme.dims().a;
    for t in 0..cfg.trials {
        let phi = random_ket(dim_a, &mut rng);
        let fin = v * &phi;
        for k in 0..view.n() {
            let r = (expectation(&phi, &view.e[k]) - expectation(&fin, &view.f_lifted[k])).abs();
            w.offer(r, k, || format!("random initial state {t}"));
        }
    }
    w
}

fn dynamical(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    let v = &view.evolution;
    for k in 0..view.n() {
        let r = (&view.f_lifted[k] * v - v * &view.e[k]).norm();
        w.offer(r, k, || format!("k={k}"));
    }
    w
}

fn subspace_dynamical(view: &SchemeView) -> Worst {
    let mut w = Worst::default();
    for k in 0..view.n() {
        let outside = &view.id_total - &view.f_lifted[k];
        let r = (&outside * &view.evolution * &view.e[k]).norm();
        w.offer(r, k, || format!("image of the E^{k} eigenspace"));
    }
    w
}

/// `C_{k,s} = (I ⊗ ⟨k,s|) U (I ⊗ |ready⟩)` maps `φ_A` to the expansion
/// coefficient of pointer eigenvector `|k,s⟩`.
pub(crate) fn expansion_coefficient_map(view: &SchemeView, pointer_vector: &Ket) -> Op {
    let dim_a = view.scheme.dims().a;
    identity(dim_a).kronecker(&pointer_vector.adjoint()) * &view.evolution
}

fn expansion(view: &SchemeView, cfg: &CheckConfig, offset: u64) -> Worst {
    let mut w = Worst::default();
    let pointer = view.scheme.pointer();
    let mut rng = rng(cfg.seed.wrapping_add(offset));
    let dim_a = view.scheme.dims().a;

    let weight_defect = |basis: &[Ket], k: usize| -> (Op, Vec<Op>) {
        let maps: Vec<Op> = basis
            .iter()
            .map(|b| expansion_coefficient_map(view, b))
            .collect();
        let gram = maps
            .iter()
            .fold(Op::zeros(dim_a, dim_a), |acc, c| acc + c.adjoint() * c);
        (gram - &view.e[k], maps)
    };

    for k in 0..view.n() {
        let basis = range_basis(pointer.projector(k));
        let (defect, maps) = weight_defect(&basis, k);
        w.offer(defect.norm(), k, || {
            format!("index-ordered pointer basis, k={k}")
        });

        for t in 0..cfg.trials {
            let phi = random_ket(dim_a, &mut rng);
            let weight: f64 = maps.iter().map(|c| (c * &phi).norm_squared()).sum();
            let r = (weight - expectation(&phi, &view.e[k])).abs();
            w.offer(r, k, || format!("random initial state {t}"));
        }

        if !basis.is_empty() {
            for b in 0..RANDOM_POINTER_BASES {
                let rotated = random_orthonormal_in(&basis, basis.len(), &mut rng);
                let (defect, _) = weight_defect(&rotated, k);
                w.offer(defect.norm(), k, || {
                    format!("random pointer basis {b}, k={k}")
                });
            }
        }
    }
    w
}

/// Result of the reversed-role probability check for one initial state.
#[derive(Debug, Clone, Serialize)]
pub struct TimeReversal {
    pub verdict: VerdictReport,
    /// `⟨φ|E^k|φ⟩`
    pub initial: Vec<f64>,
    /// `⟨Ψ|I⊗F^k|Ψ⟩` in the final state.
    pub pointer: Vec<f64>,
}

/// With the final state taken as the initial one and the pointer as the
/// measured observable, the object's eigenprojectors reproduce the pointer
/// probabilities.
pub fn check_time_reversal(
    s: &MeasurementScheme,
    o: &SpectralForm,
    phi_a: &Ket,
    cfg: &CheckConfig,
) -> Result<TimeReversal> {
    let view = SchemeView::new(s, o)?;
    ensure_dim(phi_a.len(), s.dims().a)?;
    ensure_unit(phi_a, &cfg.tol)?;
    let cc = cc_invariance(&view, &view.e_basis_eig);
    if Outcome::from_residual(cc.residual, cfg.tol.op, &cfg.tol) != Outcome::Pass {
        return Err(Error::Precondition(format!(
            "calibration condition does not hold (residual {:.3e})",
            cc.residual
        )));
    }
    let fin = &view.evolution * phi_a;
    let initial: Vec<f64> = view.e.iter().map(|e| expectation(phi_a, e)).collect();
    let pointer: Vec<f64> = view.f_lifted.iter().map(|f| expectation(&fin, f)).collect();
    let mut w = Worst::default();
    for k in 0..view.n() {
        w.offer((initial[k] - pointer[k]).abs(), k, || format!("k={k}"));
    }
    let verdict = w.into_report(FAMILY, "TIME_REVERSAL", cfg.tol.prob, &cfg.tol);
    Ok(TimeReversal {
        verdict,
        initial,
        pointer,
    })
}
