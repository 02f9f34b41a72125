//! Independent criteria for general and nondemolition premeasurement.
//!
//! Every criterion quantified over all initial object states is decided
//! on operator level, restricted to `ℋ_A ⊗ span(ready)`; random initial
//! states are an extra sampling layer on top.

pub mod general;
pub mod nd;

use serde::Serialize;

use crate::observables::SpectralForm;
use crate::qlin::{eigh, identity, lift_b, range_basis, Op};
use crate::scheme::MeasurementScheme;
use crate::tol::Tolerances;

pub use general::{
    check_time_reversal, verify_all_general, verify_general, GeneralCriterion, TimeReversal,
};
pub use nd::{
    coherence_report, overmeasure, verify_all_nd, verify_nd, CoherenceReport, NdCriterion,
    Overmeasurement,
};

/// Settings for one verification run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub tol: Tolerances,
    /// Size of the random-state sampling layer.
    pub trials: usize,
    pub seed: u64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            trials: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Indeterminate,
}

impl Outcome {
    /// Pass at or below `tolerance`, fail above the band, indeterminate
    /// in between.
    pub fn from_residual(residual: f64, tolerance: f64, tol: &Tolerances) -> Self {
        if residual.is_nan() {
            Outcome::Indeterminate
        } else if residual <= tolerance {
            Outcome::Pass
        } else if residual > tol.band_high {
            Outcome::Fail
        } else {
            Outcome::Indeterminate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Indeterminate => "indeterminate",
        }
    }
}

/// Where a criterion was violated worst.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub k: usize,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    pub family: &'static str,
    pub criterion: &'static str,
    pub outcome: Outcome,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerdictReport {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

/// Aggregate agreement of a family of equivalent criteria.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    AllPass,
    AllFail,
    /// Some criterion is indeterminate.
    Indeterminate,
    /// Definite verdicts disagree.
    Inconsistent,
}

impl Equivalence {
    pub fn of(verdicts: &[VerdictReport]) -> Self {
        if verdicts.iter().any(|v| v.outcome == Outcome::Indeterminate) {
            Equivalence::Indeterminate
        } else if verdicts.iter().all(|v| v.outcome == Outcome::Pass) {
            Equivalence::AllPass
        } else if verdicts.iter().all(|v| v.outcome == Outcome::Fail) {
            Equivalence::AllFail
        } else {
            Equivalence::Inconsistent
        }
    }

    pub fn consistent(&self) -> bool {
        matches!(self, Equivalence::AllPass | Equivalence::AllFail)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub verdicts: Vec<VerdictReport>,
    pub equivalence: Equivalence,
}

impl FamilyReport {
    pub fn new(verdicts: Vec<VerdictReport>) -> Self {
        let equivalence = Equivalence::of(&verdicts);
        Self {
            verdicts,
            equivalence,
        }
    }

    pub fn equivalence_consistent(&self) -> bool {
        self.equivalence.consistent()
    }

    pub fn max_residual(&self) -> f64 {
        self.verdicts.iter().map(|v| v.residual).fold(0.0, f64::max)
    }

    /// True when every residual sits outside the indeterminate band.
    pub fn outside_band(&self, tol: &Tolerances) -> bool {
        self.verdicts.iter().all(|v| !tol.in_band(v.residual))
    }

    pub fn get(&self, criterion: &str) -> Option<&VerdictReport> {
        self.verdicts.iter().find(|v| v.criterion == criterion)
    }
}

/// Running maximum of a residual together with where it occurred.
#[derive(Debug, Clone, Default)]
pub(crate) struct Worst {
    pub residual: f64,
    pub witness: Option<Witness>,
}

impl Worst {
    pub fn offer(&mut self, residual: f64, k: usize, label: impl FnOnce() -> String) {
        if residual > self.residual || (residual.is_nan() && !self.residual.is_nan()) {
            self.residual = residual;
            self.witness = Some(Witness { k, label: label() });
        }
    }

    pub fn into_report(
        self,
        family: &'static str,
        criterion: &'static str,
        tolerance: f64,
        tol: &Tolerances,
    ) -> VerdictReport {
        let outcome = Outcome::from_residual(self.residual, tolerance, tol);
        VerdictReport {
            family,
            criterion,
            outcome,
            residual: self.residual,
            tolerance,
            witness: if outcome == Outcome::Pass {
                None
            } else {
                self.witness
            },
            note: None,
        }
    }
}

/// Precomputed pieces of a scheme/observable pair shared by the criteria.
pub(crate) struct SchemeView<'a> {
    pub scheme: &'a MeasurementScheme,
    /// `U (I_A ⊗ |ready⟩)`, `dim_a·dim_b × dim_a`.
    pub evolution: Op,
    /// `E^k` on `ℋ_A`, zero past the observable's last index.
    pub e: Vec<Op>,
    /// `I ⊗ F^k`.
    pub f_lifted: Vec<Op>,
    /// `E^k ⊗ I`.
    pub e_lifted: Vec<Op>,
    /// Index-ordered Gram–Schmidt basis of `ℛ(E^k)`.
    pub e_basis_gs: Vec<Vec<crate::qlin::Ket>>,
    /// Eigenvector basis of `ℛ(E^k)`.
    pub e_basis_eig: Vec<Vec<crate::qlin::Ket>>,
    /// Eigenvector basis of `ℛ(I − E^k)`.
    pub e_complement_basis: Vec<Vec<crate::qlin::Ket>>,
    pub id_total: Op,
}

impl<'a> SchemeView<'a> {
    pub fn new(
        scheme: &'a MeasurementScheme,
        observable: &'a SpectralForm,
    ) -> crate::error::Result<Self> {
        scheme.check_observable(observable)?;
        let dims = scheme.dims();
        let n = scheme.branch_count();
        let e: Vec<Op> = (0..n).map(|k| observable.projector_or_zero(k)).collect();
        let f_lifted = (0..n)
            .map(|k| lift_b(scheme.pointer().projector(k), dims))
            .collect();
        let e_lifted = crate::scheme::lifted_object_projectors(scheme, observable);
        let e_basis_gs = e.iter().map(range_basis).collect();
        let e_basis_eig = e.iter().map(eigen_range).collect();
        let e_complement_basis = e
            .iter()
            .map(|p| eigen_range(&(identity(dims.a) - p)))
            .collect();
        Ok(Self {
            scheme,
            evolution: scheme.evolution_map(),
            e,
            f_lifted,
            e_lifted,
            e_basis_gs,
            e_basis_eig,
            e_complement_basis,
            id_total: identity(dims.total()),
        })
    }

    pub fn n(&self) -> usize {
        self.e.len()
    }
}

/// Eigenvectors of a projector with eigenvalue 1.
pub(crate) fn eigen_range(e: &Op) -> Vec<crate::qlin::Ket> {
    let (values, vectors) = eigh(e);
    values
        .into_iter()
        .zip(vectors)
        .filter(|(v, _)| *v > 0.5)
        .map(|(_, k)| k)
        .collect()
}
