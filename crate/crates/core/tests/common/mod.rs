//! Seeded scheme populations shared by the integration suites.

#![allow(dead_code)]

use premeasure::observables::SpectralForm;
use premeasure::qlin::{lift_b, range_basis, BipartiteDims, Ket, Op};
use premeasure::random::{
    exp_i_hermitian, random_hermitian, random_ket, random_observable, random_orthonormal_in,
    random_unitary, standard_observable, SeededRng,
};
use premeasure::scheme::{build_nondemolition, build_premeasurement, AssignmentEntry};
use premeasure::{MeasurementScheme, Tolerances};
use rand::Rng;

/// Observable ranks and pointer ranks; every shape stays within `(4,4)`.
pub const SHAPES: [(&[usize], &[usize]); 10] = [
    (&[1, 1], &[1, 1]),
    (&[1, 1], &[2, 2]),
    (&[2, 1], &[1, 1]),
    (&[2, 1], &[2, 1]),
    (&[1, 1, 1], &[1, 1, 1]),
    (&[1, 1, 1], &[2, 1, 1]),
    (&[2, 2], &[1, 1]),
    (&[2, 2], &[2, 2]),
    (&[1, 1, 1, 1], &[1, 1, 1, 1]),
    (&[3, 1], &[1, 3]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Built,
    Random,
    Perturbed(f64),
    Nondemolition,
}

#[derive(Debug, Clone)]
pub struct Case {
    pub origin: Origin,
    pub observable: SpectralForm,
    pub scheme: MeasurementScheme,
}

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn observable_and_pointer(shape: usize, rng: &mut SeededRng) -> (SpectralForm, SpectralForm) {
    let (o_ranks, p_ranks) = SHAPES[shape % SHAPES.len()];
    let o = if rng.random_bool(0.5) {
        random_observable(o_ranks, rng, &tol())
    } else {
        standard_observable(o_ranks, &tol())
    };
    (o, standard_observable(p_ranks, &tol()))
}

/// Each eigenvector of `E^k` goes to a random unit vector of `target(k)`,
/// the targets of one `k` being orthonormal.
fn random_assignment(
    o: &SpectralForm,
    target: impl Fn(usize) -> Op,
    rng: &mut SeededRng,
) -> Vec<AssignmentEntry> {
    let mut out = Vec::new();
    for k in 0..o.len() {
        let sources = range_basis(o.projector(k));
        let targets = random_orthonormal_in(&range_basis(&target(k)), sources.len(), rng);
        out.extend(
            sources
                .into_iter()
                .zip(targets)
                .map(|(s, t)| AssignmentEntry::new(s, t)),
        );
    }
    out
}

pub fn built(shape: usize, rng: &mut SeededRng) -> Case {
    let (o, p) = observable_and_pointer(shape, rng);
    let dims = BipartiteDims::new(o.dim(), p.dim()).unwrap();
    let ready = random_ket(dims.b, rng);
    let a = random_assignment(&o, |k| lift_b(p.projector(k), dims), rng);
    let scheme = build_premeasurement(&o, &p, &ready, &a, &tol()).unwrap();
    Case {
        origin: Origin::Built,
        observable: o,
        scheme,
    }
}

pub fn nondemolition(shape: usize, rng: &mut SeededRng) -> Case {
    let (o, p) = observable_and_pointer(shape, rng);
    let ready = random_ket(p.dim(), rng);
    let a = random_assignment(&o, |k| o.projector(k).kronecker(p.projector(k)), rng);
    let scheme = build_nondemolition(&o, &p, &ready, &a, &tol()).unwrap();
    Case {
        origin: Origin::Nondemolition,
        observable: o,
        scheme,
    }
}

pub fn random_scheme(shape: usize, rng: &mut SeededRng) -> Case {
    let (o, p) = observable_and_pointer(shape, rng);
    let dims = BipartiteDims::new(o.dim(), p.dim()).unwrap();
    let ready = random_ket(dims.b, rng);
    let u = random_unitary(dims.total(), rng);
    let scheme = MeasurementScheme::new(dims, ready, p, u, &tol()).unwrap();
    Case {
        origin: Origin::Random,
        observable: o,
        scheme,
    }
}

/// `e^{iεH}·U` for a valid built scheme `U`.
pub fn perturbed(shape: usize, eps: f64, rng: &mut SeededRng) -> Case {
    let base = if rng.random_bool(0.5) {
        built(shape, rng)
    } else {
        nondemolition(shape, rng)
    };
    let n = base.scheme.dims().total();
    let u = exp_i_hermitian(&random_hermitian(n, rng), eps) * base.scheme.interaction();
    Case {
        origin: Origin::Perturbed(eps),
        scheme: base.scheme.with_interaction(u, &tol()).unwrap(),
        observable: base.observable,
    }
}

/// 50 built, 50 random and 100 perturbed schemes.
pub fn general_population(rng: &mut SeededRng) -> Vec<Case> {
    let mut out = Vec::with_capacity(200);
    for i in 0..50 {
        out.push(built(i, rng));
    }
    for i in 0..50 {
        out.push(random_scheme(i, rng));
    }
    for i in 0..100 {
        let eps = if i % 2 == 0 { 1e-6 } else { 1e-2 };
        out.push(perturbed(i, eps, rng));
    }
    out
}

pub fn nondemolition_population(count: usize, rng: &mut SeededRng) -> Vec<Case> {
    (0..count).map(|i| nondemolition(i, rng)).collect()
}

/// Random unit ket on `dim` levels.
pub fn ket(dim: usize, rng: &mut SeededRng) -> Ket {
    random_ket(dim, rng)
}
