//! Seeded random states, unitaries and observables for the sampling layers
//! and property tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::observables::SpectralForm;
use crate::qlin::{eigh, identity, projector_onto, Ket, Op, C64};
use crate::tol::Tolerances;

pub use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SeededRng;

pub fn rng(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Gaussian matrix.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Op {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Uniformly distributed unit ket.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    let v = Ket::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v.unscale(n)
}

/// Unit ket in the span of the orthonormal `basis`.
pub fn random_ket_in<R: Rng + ?Sized>(basis: &[Ket], rng: &mut R) -> Ket {
    let c = random_ket(basis.len(), rng);
    basis
        .iter()
        .zip(c.iter())
        .fold(Ket::zeros(basis[0].len()), |acc, (b, x)| acc + b * *x)
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `R`'s diagonal folded back into `Q`.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Op {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// `count` orthonormal vectors drawn uniformly from the span of `basis`.
pub fn random_orthonormal_in<R: Rng + ?Sized>(
    basis: &[Ket],
    count: usize,
    rng: &mut R,
) -> Vec<Ket> {
    let u = random_unitary(basis.len(), rng);
    (0..count)
        .map(|j| {
            basis
                .iter()
                .enumerate()
                .fold(Ket::zeros(basis[0].len()), |acc, (i, b)| {
                    acc + b * u[(i, j)]
                })
        })
        .collect()
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Op {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// `exp(i·eps·h)` for Hermitian `h`.
pub fn exp_i_hermitian(h: &Op, eps: f64) -> Op {
    let (values, vectors) = eigh(h);
    let dim = h.nrows();
    values
        .iter()
        .zip(&vectors)
        .fold(Op::zeros(dim, dim), |acc, (l, v)| {
            acc + projector_onto(v) * C64::from_polar(1.0, eps * l)
        })
}

/// Observable with eigenspaces of the given ranks, in a random basis.
pub fn random_observable<R: Rng + ?Sized>(
    ranks: &[usize],
    rng: &mut R,
    tol: &Tolerances,
) -> SpectralForm {
    let dim: usize = ranks.iter().sum();
    let u = random_unitary(dim, rng);
    let mut start = 0;
    let mut projectors = Vec::with_capacity(ranks.len());
    for &r in ranks {
        let p = (start..start + r).fold(Op::zeros(dim, dim), |acc, j| {
            acc + projector_onto(&u.column(j).into_owned())
        });
        projectors.push(p);
        start += r;
    }
    let values = (0..ranks.len()).map(|k| k as f64).collect();
    SpectralForm::new(values, projectors, tol).expect("random observable is valid")
}

/// Observable diagonal in the standard basis with eigenspaces of the given
/// ranks, taken in index order.
pub fn standard_observable(ranks: &[usize], tol: &Tolerances) -> SpectralForm {
    let dim: usize = ranks.iter().sum();
    let id = identity(dim);
    let mut start = 0;
    let mut projectors = Vec::new();
    for &r in ranks {
        let mut p = Op::zeros(dim, dim);
        for j in start..start + r {
            p[(j, j)] = id[(j, j)];
        }
        projectors.push(p);
        start += r;
    }
    let values = (0..ranks.len()).map(|k| k as f64).collect();
    SpectralForm::new(values, projectors, tol).expect("standard observable is valid")
}
