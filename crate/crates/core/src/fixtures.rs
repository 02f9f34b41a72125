//! Canonical schemes used across tests, the acceptance suite and the CLI
//! fixture catalog. Indices are 0-based: `k = 0` is the first eigenvalue.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::kinds::{build_ideal, MClass};
use crate::observables::SpectralForm;
use crate::qlin::{basis_ket, diag, real_ket, BipartiteDims, Ket};
use crate::scheme::{
    build_nondemolition, build_premeasurement, AssignmentEntry, MeasurementScheme,
};
use crate::tol::Tolerances;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub observable: SpectralForm,
    pub scheme: MeasurementScheme,
    pub intended: MClass,
}

fn tol() -> Tolerances {
    Tolerances::default()
}

/// `E⁰ = |0⟩⟨0| + |1⟩⟨1|` (value +1), `E¹ = |2⟩⟨2|` (value −1) on `C³`.
pub fn observable3() -> SpectralForm {
    SpectralForm::new(
        vec![1.0, -1.0],
        vec![diag(&[1.0, 1.0, 0.0]), diag(&[0.0, 0.0, 1.0])],
        &tol(),
    )
    .expect("valid observable")
}

/// Two rank-1 positions on `C²`.
pub fn pointer2() -> SpectralForm {
    SpectralForm::new(
        vec![0.0, 1.0],
        vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
        &tol(),
    )
    .expect("valid pointer")
}

/// Positions of ranks (2, 1) on `C³`.
pub fn pointer3_degenerate() -> SpectralForm {
    SpectralForm::new(
        vec![0.0, 1.0],
        vec![diag(&[1.0, 1.0, 0.0]), diag(&[0.0, 0.0, 1.0])],
        &tol(),
    )
    .expect("valid pointer")
}

/// Positions of ranks (1, 2) on `C³`.
pub fn pointer3_split() -> SpectralForm {
    SpectralForm::new(
        vec![0.0, 1.0],
        vec![diag(&[1.0, 0.0, 0.0]), diag(&[0.0, 1.0, 1.0])],
        &tol(),
    )
    .expect("valid pointer")
}

fn dims(a: usize, b: usize) -> BipartiteDims {
    BipartiteDims::new(a, b).expect("small dims")
}

pub fn ideal3_assignment() -> Vec<AssignmentEntry> {
    let d = dims(3, 2);
    vec![
        AssignmentEntry::basis(d, 0, 0, 0),
        AssignmentEntry::basis(d, 1, 1, 0),
        AssignmentEntry::basis(d, 2, 2, 1),
    ]
}

fn plus01() -> Ket {
    real_ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0])
}

/// Ideal scheme: every eigenvector is copied unchanged and the pointer
/// records its index.
pub fn s_ideal3() -> Fixture {
    let scheme = build_premeasurement(
        &observable3(),
        &pointer2(),
        &basis_ket(2, 0),
        &ideal3_assignment(),
        &tol(),
    )
    .expect("S_IDEAL3 builds");
    Fixture {
        name: "S_IDEAL3",
        observable: observable3(),
        scheme,
        intended: MClass::M11a,
    }
}

/// As [`s_ideal3`] but `|2⟩ ↦ ((|0⟩+|1⟩)/√2)|1⟩`.
pub fn s_demo3() -> Fixture {
    let mut a = ideal3_assignment();
    a[2] = AssignmentEntry::new(basis_ket(3, 2), plus01().kronecker(&basis_ket(2, 1)));
    let scheme = build_premeasurement(&observable3(), &pointer2(), &basis_ket(2, 0), &a, &tol())
        .expect("S_DEMO3 builds");
    Fixture {
        name: "S_DEMO3",
        observable: observable3(),
        scheme,
        intended: MClass::M21,
    }
}

/// Nondemolition with an entangling degenerate branch.
pub fn s_nd_ent() -> Fixture {
    let d = dims(3, 3);
    let a = vec![
        AssignmentEntry::basis(d, 0, 0, 0),
        AssignmentEntry::basis(d, 1, 1, 1),
        AssignmentEntry::basis(d, 2, 2, 2),
    ];
    let scheme = build_nondemolition(
        &observable3(),
        &pointer3_degenerate(),
        &basis_ket(3, 0),
        &a,
        &tol(),
    )
    .expect("S_ND_ENT builds");
    Fixture {
        name: "S_ND_ENT",
        observable: observable3(),
        scheme,
        intended: MClass::M12,
    }
}

/// Swaps `|0⟩` and `|1⟩` inside the first eigenspace.
pub fn s_nd_rot() -> Fixture {
    let d = dims(3, 2);
    let a = vec![
        AssignmentEntry::basis(d, 0, 1, 0),
        AssignmentEntry::basis(d, 1, 0, 0),
        AssignmentEntry::basis(d, 2, 2, 1),
    ];
    let scheme = build_nondemolition(&observable3(), &pointer2(), &basis_ket(2, 0), &a, &tol())
        .expect("S_ND_ROT builds");
    Fixture {
        name: "S_ND_ROT",
        observable: observable3(),
        scheme,
        intended: MClass::M11b,
    }
}

/// `|1⟩ ↦ |2⟩|1⟩` leaves the first eigenspace while entangling.
pub fn s_demo_ent() -> Fixture {
    let d = dims(3, 3);
    let a = vec![
        AssignmentEntry::basis(d, 0, 0, 0),
        AssignmentEntry::basis(d, 1, 2, 1),
        AssignmentEntry::basis(d, 2, 2, 2),
    ];
    let scheme = build_premeasurement(
        &observable3(),
        &pointer3_degenerate(),
        &basis_ket(3, 0),
        &a,
        &tol(),
    )
    .expect("S_DEMO_ENT builds");
    Fixture {
        name: "S_DEMO_ENT",
        observable: observable3(),
        scheme,
        intended: MClass::M22,
    }
}

/// Branch 0 ideal, branch 1 demolition and entangled:
/// `|2⟩ ↦ (|0⟩|1⟩ + |1⟩|2⟩)/√2`.
pub fn s_mixed() -> Fixture {
    let d = dims(3, 3);
    let mut target = Ket::zeros(9);
    target[d.index(0, 1)] = FRAC_1_SQRT_2.into();
    target[d.index(1, 2)] = FRAC_1_SQRT_2.into();
    let a = vec![
        AssignmentEntry::basis(d, 0, 0, 0),
        AssignmentEntry::basis(d, 1, 1, 0),
        AssignmentEntry::new(basis_ket(3, 2), target),
    ];
    let scheme = build_premeasurement(
        &observable3(),
        &pointer3_split(),
        &basis_ket(3, 0),
        &a,
        &tol(),
    )
    .expect("S_MIXED builds");
    Fixture {
        name: "S_MIXED",
        observable: observable3(),
        scheme,
        intended: MClass::M22,
    }
}

/// z-spin projectors `(|z,+⟩⟨z,+|, |z,−⟩⟨z,−|)` with values ±1/2.
pub fn spin_z() -> SpectralForm {
    SpectralForm::new(
        vec![0.5, -0.5],
        vec![diag(&[1.0, 0.0]), diag(&[0.0, 1.0])],
        &tol(),
    )
    .expect("valid spin observable")
}

/// Ideal two-level scheme for the z spin with two rank-1 pointer positions.
pub fn s_ideal2() -> Fixture {
    let scheme =
        build_ideal(&spin_z(), &pointer2(), &basis_ket(2, 0), &tol()).expect("S_IDEAL2 builds");
    Fixture {
        name: "S_IDEAL2",
        observable: spin_z(),
        scheme,
        intended: MClass::M11a,
    }
}

/// The five canonical fixtures, one per class in reading order.
pub fn canonical() -> Vec<Fixture> {
    vec![s_ideal3(), s_nd_rot(), s_nd_ent(), s_demo3(), s_demo_ent()]
}
