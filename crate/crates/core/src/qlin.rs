//! Dense complex linear algebra on small finite-dimensional Hilbert spaces.
//!
//! Composite indices follow the A-major convention: for `ℋ_A ⊗ ℋ_B` the
//! basis vector `|a⟩⊗|b⟩` sits at index `a·dim_b + b`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::observables::SpectralForm;
use crate::tol::Tolerances;

pub type C64 = Complex64;
/// State vector, not necessarily normalized.
pub type Ket = DVector<C64>;
/// Square complex matrix.
pub type Op = DMatrix<C64>;

/// Largest composite dimension accepted by [`Tensor::tensor`].
pub const DIM_CAP: usize = 64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Factor dimensions of a bipartite space `ℋ_A ⊗ ℋ_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BipartiteDims {
    pub a: usize,
    pub b: usize,
}

impl BipartiteDims {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::ZeroDimension);
        }
        let total = a.checked_mul(b).ok_or(Error::DimensionCap(usize::MAX))?;
        if total > DIM_CAP {
            return Err(Error::DimensionCap(total));
        }
        Ok(Self { a, b })
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }

    #[inline]
    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.b + b
    }
}

/// Which factor of a bipartite space an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Kronecker product with A-major index ordering.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

impl Tensor for Ket {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let n = checked_product(self.len(), other.len())?;
        let mut out = Ket::zeros(n);
        for (i, x) in self.iter().enumerate() {
            for (j, y) in other.iter().enumerate() {
                out[i * other.len() + j] = x * y;
            }
        }
        Ok(out)
    }
}

impl Tensor for Op {
    fn tensor(&self, other: &Self) -> Result<Self> {
        checked_product(self.nrows(), other.nrows())?;
        checked_product(self.ncols(), other.ncols())?;
        Ok(self.kronecker(other))
    }
}

fn checked_product(a: usize, b: usize) -> Result<usize> {
    if a == 0 || b == 0 {
        return Err(Error::ZeroDimension);
    }
    let n = a.checked_mul(b).ok_or(Error::DimensionCap(usize::MAX))?;
    if n > DIM_CAP {
        return Err(Error::DimensionCap(n));
    }
    Ok(n)
}

pub fn basis_ket(dim: usize, i: usize) -> Ket {
    let mut k = Ket::zeros(dim);
    k[i] = ONE;
    k
}

/// Builds a ket from real amplitudes.
pub fn real_ket(amps: &[f64]) -> Ket {
    Ket::from_iterator(amps.len(), amps.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn identity(dim: usize) -> Op {
    Op::identity(dim, dim)
}

/// `|ket⟩⟨ket|`, without normalization.
pub fn projector_onto(ket: &Ket) -> Op {
    ket * ket.adjoint()
}

/// Orthogonal projector onto the span of orthonormal `kets`.
pub fn projector_onto_span(dim: usize, kets: &[Ket]) -> Op {
    kets.iter()
        .fold(Op::zeros(dim, dim), |acc, k| acc + projector_onto(k))
}

pub fn diag(values: &[f64]) -> Op {
    let n = values.len();
    Op::from_fn(n, n, |i, j| {
        if i == j {
            C64::new(values[i], 0.0)
        } else {
            ZERO
        }
    })
}

/// `X ⊗ I_B`.
pub fn lift_a(x: &Op, dims: BipartiteDims) -> Op {
    x.kronecker(&identity(dims.b))
}

/// `I_A ⊗ Y`.
pub fn lift_b(y: &Op, dims: BipartiteDims) -> Op {
    identity(dims.a).kronecker(y)
}

pub fn ensure_square(x: &Op) -> Result<usize> {
    if x.nrows() != x.ncols() {
        return Err(Error::NotSquare {
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    Ok(x.nrows())
}

pub fn ensure_dim(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Partial trace of a composite operator over subsystem `over`.
pub fn partial_trace(x: &Op, dims: BipartiteDims, over: Subsystem) -> Result<Op> {
    ensure_square(x)?;
    ensure_dim(x.nrows(), dims.total())?;
    let out = match over {
        Subsystem::B => Op::from_fn(dims.a, dims.a, |i, j| {
            (0..dims.b)
                .map(|b| x[(dims.index(i, b), dims.index(j, b))])
                .sum()
        }),
        Subsystem::A => Op::from_fn(dims.b, dims.b, |i, j| {
            (0..dims.a)
                .map(|a| x[(dims.index(a, i), dims.index(a, j))])
                .sum()
        }),
    };
    Ok(out)
}

/// Reduced density operator of a pure composite state, keeping the factor
/// that is not traced out. Avoids forming the full composite projector.
pub fn reduced_state(ket: &Ket, dims: BipartiteDims, over: Subsystem) -> Result<Op> {
    ensure_dim(ket.len(), dims.total())?;
    let m = coefficient_matrix(ket, dims);
    Ok(match over {
        Subsystem::B => &m * m.adjoint(),
        Subsystem::A => (m.adjoint() * &m).transpose(),
    })
}

/// Reshapes a composite ket into its `dim_a × dim_b` coefficient matrix.
pub fn coefficient_matrix(ket: &Ket, dims: BipartiteDims) -> Op {
    Op::from_fn(dims.a, dims.b, |a, b| ket[dims.index(a, b)])
}

/// Partial scalar product `⟨bra|_B |ket⟩_AB`, a vector in `ℋ_A`.
pub fn partial_inner_b(bra: &Ket, ket: &Ket, dims: BipartiteDims) -> Result<Ket> {
    ensure_dim(bra.len(), dims.b)?;
    ensure_dim(ket.len(), dims.total())?;
    Ok(Ket::from_fn(dims.a, |a, _| {
        (0..dims.b)
            .map(|b| bra[b].conj() * ket[dims.index(a, b)])
            .sum()
    }))
}

/// Partial scalar product `⟨bra|_A |ket⟩_AB`, a vector in `ℋ_B`.
pub fn partial_inner_a(bra: &Ket, ket: &Ket, dims: BipartiteDims) -> Result<Ket> {
    ensure_dim(bra.len(), dims.a)?;
    ensure_dim(ket.len(), dims.total())?;
    Ok(Ket::from_fn(dims.b, |b, _| {
        (0..dims.a)
            .map(|a| bra[a].conj() * ket[dims.index(a, b)])
            .sum()
    }))
}

pub fn hermiticity_residual(x: &Op) -> f64 {
    (x - x.adjoint()).norm()
}

pub fn unitarity_residual(u: &Op) -> f64 {
    (u.adjoint() * u - identity(u.nrows())).norm()
}

/// The larger of the idempotency and hermiticity defects.
pub fn projector_residual(e: &Op) -> f64 {
    let idem = (e * e - e).norm();
    idem.max(hermiticity_residual(e))
}

pub fn is_projector(e: &Op, tol: &Tolerances) -> bool {
    e.nrows() == e.ncols() && projector_residual(e) <= tol.op
}

pub fn ensure_unitary(u: &Op, tol: &Tolerances) -> Result<()> {
    ensure_square(u)?;
    let r = unitarity_residual(u);
    if r > tol.op {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

pub fn ensure_unit(ket: &Ket, tol: &Tolerances) -> Result<()> {
    let n = ket.norm();
    if !n.is_finite() || (n - 1.0).abs() > tol.norm {
        return Err(Error::NotUnit(n));
    }
    Ok(())
}

/// `⟨ψ|X|ψ⟩`, real part.
pub fn expectation(ket: &Ket, x: &Op) -> f64 {
    ket.dotc(&(x * ket)).re
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
pub fn eigh(h: &Op) -> (Vec<f64>, Vec<Ket>) {
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Unique spectral form of a Hermitian operator.
///
/// Eigenvalues within `grouping_tol` of their sorted neighbour share an
/// eigenspace; the group's value is the mean of its members.
pub fn spectral_decompose(h: &Op, grouping_tol: f64, tol: &Tolerances) -> Result<SpectralForm> {
    let dim = ensure_square(h)?;
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    let herm = hermiticity_residual(h);
    if herm > tol.op {
        return Err(Error::NotHermitian(herm));
    }
    let (values, vectors) = eigh(h);
    let mut groups: Vec<Vec<usize>> = vec![vec![0]];
    for i in 1..dim {
        let gap = values[i - 1] - values[i];
        if gap > tol.op && gap <= grouping_tol {
            return Err(Error::IllConditionedGrouping { gap });
        }
        if gap <= grouping_tol {
            groups.last_mut().expect("non-empty").push(i);
        } else {
            groups.push(vec![i]);
        }
    }
    let eigenvalues = groups
        .iter()
        .map(|g| g.iter().map(|&i| values[i]).sum::<f64>() / g.len() as f64)
        .collect();
    let projectors = groups
        .iter()
        .map(|g| {
            g.iter().fold(Op::zeros(dim, dim), |acc, &i| {
                acc + projector_onto(&vectors[i])
            })
        })
        .collect();
    SpectralForm::new(eigenvalues, projectors, tol)
}

/// Bi-orthonormal decomposition `Σ c_i |l_i⟩⊗|r_i⟩` of a bipartite ket.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Descending, strictly positive.
    pub coefficients: Vec<f64>,
    pub left: Vec<Ket>,
    pub right: Vec<Ket>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn reconstruct(&self, dims: BipartiteDims) -> Ket {
        let mut out = Ket::zeros(dims.total());
        for ((c, l), r) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            out += l.kronecker(r).scale(*c);
        }
        out
    }
}

/// Schmidt decomposition via the singular values of the coefficient matrix.
/// Terms with coefficient at or below `tol.vec` are dropped.
pub fn schmidt(ket: &Ket, dims: BipartiteDims, tol: &Tolerances) -> Result<SchmidtDecomposition> {
    ensure_dim(ket.len(), dims.total())?;
    ensure_unit(ket, tol)?;
    let (values, u, v_t) = svd_sorted(&coefficient_matrix(ket, dims));
    let mut out = SchmidtDecomposition {
        coefficients: Vec::new(),
        left: Vec::new(),
        right: Vec::new(),
    };
    for (i, &c) in values.iter().enumerate() {
        if c <= tol.vec {
            break;
        }
        out.coefficients.push(c);
        out.left.push(u.column(i).into_owned());
        // Row i of V† is r_i^T.
        out.right.push(v_t.row(i).transpose());
    }
    Ok(out)
}

/// Thin SVD `m = u·diag(values)·v_t` with singular values sorted
/// descending. Backed by faer: nalgebra's complex SVD returns wrong
/// factors for some rank-deficient inputs.
pub fn svd_sorted(m: &Op) -> (Vec<f64>, Op, Op) {
    let (rows, cols) = m.shape();
    let r = rows.min(cols);
    let fm = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| {
        faer::c64::new(m[(i, j)].re, m[(i, j)].im)
    });
    let svd = fm.thin_svd().expect("SVD converges");
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| s[j].re.total_cmp(&s[i].re));
    let values = order.iter().map(|&i| s[i].re).collect();
    let u_sorted = Op::from_fn(rows, r, |i, j| {
        let z = u[(i, order[j])];
        C64::new(z.re, z.im)
    });
    // Row j of V† is the conjugate of column j of V.
    let vt_sorted = Op::from_fn(r, cols, |j, i| {
        let z = v[(i, order[j])];
        C64::new(z.re, -z.im)
    });
    (values, u_sorted, vt_sorted)
}

/// Moore–Penrose inverse with singular values at or below `cutoff`
/// treated as zero.
pub fn pseudo_inverse(m: &Op, cutoff: f64) -> Op {
    let (values, u, v_t) = svd_sorted(m);
    let mut out = Op::zeros(m.ncols(), m.nrows());
    for (i, &s) in values.iter().enumerate() {
        if s > cutoff {
            out += v_t.row(i).adjoint() * u.column(i).adjoint().unscale(s);
        }
    }
    out
}

/// Orthonormal basis of `{x : m·x = 0}` (right null space), with singular
/// values at or below `cutoff` treated as zero.
pub fn null_space(m: &Op, cutoff: f64) -> Vec<Ket> {
    let n = m.ncols();
    // Pad to at least n rows so the SVD returns a full right basis.
    let padded = if m.nrows() < n {
        let mut p = Op::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let (values, _, v_t) = svd_sorted(&padded);
    (0..n)
        .filter(|&i| values[i] <= cutoff)
        .map(|i| v_t.row(i).adjoint())
        .collect()
}

/// Index-ordered modified Gram–Schmidt with one re-orthogonalization pass.
/// Candidates whose residual norm falls to `drop_below` or less are skipped.
pub fn gram_schmidt_extend(
    basis: &mut Vec<Ket>,
    candidates: impl IntoIterator<Item = Ket>,
    drop_below: f64,
) {
    for mut v in candidates {
        for _ in 0..2 {
            for b in basis.iter() {
                let c = b.dotc(&v);
                v -= b * c;
            }
        }
        let n = v.norm();
        if n > drop_below {
            basis.push(v.unscale(n));
        }
    }
}

/// Orthonormal basis of the range of a projector, built by Gram–Schmidt
/// over its columns in index order.
pub fn range_basis(e: &Op) -> Vec<Ket> {
    let mut basis = Vec::new();
    gram_schmidt_extend(
        &mut basis,
        (0..e.ncols()).map(|j| e.column(j).into_owned()),
        1e-6,
    );
    if basis.len() != rank_of_projector(e) {
        // Badly spread columns; fall back to the eigenvectors.
        let (values, vectors) = eigh(e);
        return values
            .into_iter()
            .zip(vectors)
            .filter(|(v, _)| *v > 0.5)
            .map(|(_, k)| k)
            .collect();
    }
    basis
}

pub fn rank_of_projector(e: &Op) -> usize {
    e.trace().re.round().max(0.0) as usize
}

/// Checks that `kets` are orthonormal, reporting the first offending pair.
pub fn check_orthonormal(kets: &[Ket], set: &'static str, tol: &Tolerances) -> Result<()> {
    for i in 0..kets.len() {
        for j in i..kets.len() {
            let g = kets[i].dotc(&kets[j]);
            let target = if i == j { ONE } else { ZERO };
            let residual = (g - target).norm();
            if residual > tol.vec {
                return Err(Error::NotOrthonormal {
                    set,
                    i,
                    j,
                    residual,
                });
            }
        }
    }
    Ok(())
}

/// Unitary `U` with `U·domain[i] = image[i]`.
///
/// Both sets are extended to full bases by Gram–Schmidt over the standard
/// basis in index order, and the leftovers are paired in order.
pub fn complete_to_unitary(
    domain: &[Ket],
    image: &[Ket],
    dim: usize,
    tol: &Tolerances,
) -> Result<Op> {
    if domain.len() != image.len() {
        return Err(Error::LengthMismatch {
            what: "domain and image sets",
            left: domain.len(),
            right: image.len(),
        });
    }
    for k in domain.iter().chain(image) {
        ensure_dim(k.len(), dim)?;
    }
    check_orthonormal(domain, "domain", tol)?;
    check_orthonormal(image, "image", tol)?;

    let mut dom = domain.to_vec();
    let mut img = image.to_vec();
    gram_schmidt_extend(&mut dom, (0..dim).map(|i| basis_ket(dim, i)), 1e-6);
    gram_schmidt_extend(&mut img, (0..dim).map(|i| basis_ket(dim, i)), 1e-6);
    debug_assert_eq!(dom.len(), dim);
    debug_assert_eq!(img.len(), dim);

    let mut u = Op::zeros(dim, dim);
    for (d, i) in dom.iter().zip(&img) {
        u += i * d.adjoint();
    }
    Ok(u)
}

/// Both forms of the certainty of an event in a pure state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certainty {
    pub certain: bool,
    /// `⟨ψ|E|ψ⟩`
    pub probability: f64,
    /// `‖E|ψ⟩ − |ψ⟩‖`
    pub invariance_residual: f64,
}

/// Decides whether projector `e` is certain in `ket`, cross-checking the
/// probability form against the invariance form.
pub fn is_certain(ket: &Ket, e: &Op, tol: &Tolerances) -> Result<Certainty> {
    ensure_square(e)?;
    ensure_dim(ket.len(), e.nrows())?;
    let pr = projector_residual(e);
    if pr > tol.op {
        return Err(Error::NotProjector(pr));
    }
    ensure_unit(ket, tol)?;
    let probability = expectation(ket, e);
    let invariance_residual = (e * ket - ket).norm();
    let by_probability = probability >= 1.0 - tol.prob;
    let by_invariance = invariance_residual <= tol.vec;
    if by_probability != by_invariance {
        return Err(Error::CertaintyDisagreement {
            probability,
            residual: invariance_residual,
        });
    }
    Ok(Certainty {
        certain: by_probability,
        probability,
        invariance_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn tensor_of_basis_kets() {
        let k = basis_ket(2, 0).tensor(&basis_ket(2, 1)).unwrap();
        assert_eq!(k, basis_ket(4, 1));
    }

    #[test]
    fn tensor_of_identities() {
        assert_eq!(identity(2).tensor(&identity(3)).unwrap(), identity(6));
    }

    #[test]
    fn tensor_superposition_by_index_arithmetic() {
        let plus = real_ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let zero = basis_ket(2, 0);
        let k = plus.tensor(&zero).unwrap();
        // a·2 + b with b fixed to 0
        let mut expected = Ket::zeros(4);
        for a in 0..2 {
            for b in 0..2 {
                expected[a * 2 + b] = plus[a] * zero[b];
            }
        }
        assert_eq!(k, expected);
        assert!((k - real_ket(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn tensor_respects_cap() {
        let a = Ket::zeros(9);
        assert!(matches!(a.tensor(&a), Err(Error::DimensionCap(81))));
    }

    #[test]
    fn partial_trace_of_product() {
        let ra = diag(&[0.25, 0.75]);
        let rb = diag(&[0.5, 0.3, 0.2]);
        let dims = BipartiteDims::new(2, 3).unwrap();
        let x = ra.tensor(&rb).unwrap();
        assert!((partial_trace(&x, dims, Subsystem::B).unwrap() - &ra).norm() < 1e-15);
        assert!((partial_trace(&x, dims, Subsystem::A).unwrap() - &rb).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_mismatch() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(matches!(
            partial_trace(&identity(3), dims, Subsystem::A),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn reduced_state_matches_partial_trace() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let ket = Ket::from_fn(6, |i, _| C64::new(i as f64 + 1.0, 0.5 - i as f64)).normalize();
        let rho = projector_onto(&ket);
        for over in [Subsystem::A, Subsystem::B] {
            let r1 = reduced_state(&ket, dims, over).unwrap();
            let r2 = partial_trace(&rho, dims, over).unwrap();
            assert!((r1 - r2).norm() < 1e-14);
        }
    }

    #[test]
    fn spectral_form_of_diagonal() {
        let sf = spectral_decompose(&diag(&[1.0, 1.0, -1.0]), 1e-8, &tol()).unwrap();
        assert_eq!(sf.len(), 2);
        assert!((sf.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((sf.eigenvalues()[1] + 1.0).abs() < 1e-12);
        assert_eq!(rank_of_projector(&sf.projectors()[0]), 2);
        assert_eq!(rank_of_projector(&sf.projectors()[1]), 1);
    }

    #[test]
    fn spectral_form_of_identity() {
        let sf = spectral_decompose(&identity(4), 1e-8, &tol()).unwrap();
        assert_eq!(sf.len(), 1);
        assert!((&sf.projectors()[0] - identity(4)).norm() < 1e-12);
    }

    #[test]
    fn spectral_form_of_pauli_x() {
        let x = Op::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let sf = spectral_decompose(&x, 1e-8, &tol()).unwrap();
        // hand eigensolve: |±⟩ = (|0⟩ ± |1⟩)/√2
        let plus = real_ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let minus = real_ket(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]);
        assert_eq!(sf.eigenvalues().len(), 2);
        assert!((sf.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((&sf.projectors()[0] - projector_onto(&plus)).norm() < 1e-12);
        assert!((&sf.projectors()[1] - projector_onto(&minus)).norm() < 1e-12);
    }

    #[test]
    fn spectral_rejects_non_hermitian() {
        let x = Op::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(
            spectral_decompose(&x, 1e-8, &tol()),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn spectral_flags_ill_conditioned_gap() {
        let h = diag(&[1.0, 1.0 + 1e-9]);
        assert!(matches!(
            spectral_decompose(&h, 1e-8, &tol()),
            Err(Error::IllConditionedGrouping { .. })
        ));
    }

    #[test]
    fn schmidt_of_product() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let a = real_ket(&[0.6, 0.8]);
        let b = real_ket(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let s = schmidt(&a.tensor(&b).unwrap(), dims, &tol()).unwrap();
        assert_eq!(s.rank(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schmidt_of_weighted_bell_pair() {
        // singular values of [[3/5, 0], [0, 4/5]] are 4/5 and 3/5
        let dims = BipartiteDims::new(2, 2).unwrap();
        let ket = real_ket(&[0.6, 0.0, 0.0, 0.8]);
        let s = schmidt(&ket, dims, &tol()).unwrap();
        assert_eq!(s.rank(), 2);
        assert!((s.coefficients[0] - 0.8).abs() < 1e-12);
        assert!((s.coefficients[1] - 0.6).abs() < 1e-12);
        assert!((s.reconstruct(dims) - &ket).norm() < 1e-12);
    }

    #[test]
    fn schmidt_rejects_non_unit() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        assert!(matches!(
            schmidt(&real_ket(&[1.0, 1.0, 0.0, 0.0]), dims, &tol()),
            Err(Error::NotUnit(_))
        ));
    }

    #[test]
    fn completion_of_empty_set_is_identity() {
        assert_eq!(
            complete_to_unitary(&[], &[], 3, &tol()).unwrap(),
            identity(3)
        );
    }

    #[test]
    fn completion_of_full_permutation() {
        let dom: Vec<Ket> = (0..3).map(|i| basis_ket(3, i)).collect();
        let img = vec![basis_ket(3, 2), basis_ket(3, 0), basis_ket(3, 1)];
        let u = complete_to_unitary(&dom, &img, 3, &tol()).unwrap();
        let mut p = Op::zeros(3, 3);
        p[(2, 0)] = ONE;
        p[(0, 1)] = ONE;
        p[(1, 2)] = ONE;
        assert_eq!(u, p);
    }

    #[test]
    fn completion_single_constraint() {
        let u = complete_to_unitary(&[basis_ket(2, 0)], &[basis_ket(2, 1)], 2, &tol()).unwrap();
        assert_eq!(u.column(0).into_owned(), basis_ket(2, 1));
        assert!(unitarity_residual(&u) < 1e-14);
        // leftovers e_1 ↦ e_0 by index order
        assert_eq!(u.column(1).into_owned(), basis_ket(2, 0));
    }

    #[test]
    fn completion_rejects_non_orthonormal() {
        let d = vec![basis_ket(2, 0), real_ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])];
        let i = vec![basis_ket(2, 0), basis_ket(2, 1)];
        assert!(matches!(
            complete_to_unitary(&d, &i, 2, &tol()),
            Err(Error::NotOrthonormal {
                set: "domain",
                i: 0,
                j: 1,
                ..
            })
        ));
    }

    #[test]
    fn certainty_examples() {
        let t = tol();
        let e0 = projector_onto(&basis_ket(2, 0));
        assert!(is_certain(&basis_ket(2, 0), &e0, &t).unwrap().certain);
        let plus = real_ket(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let c = is_certain(&plus, &e0, &t).unwrap();
        assert!(!c.certain);
        assert!((c.probability - 0.5).abs() < 1e-15);
        assert!(is_certain(&plus, &identity(2), &t).unwrap().certain);
    }

    #[test]
    fn certainty_rejects_non_projector() {
        let x = diag(&[0.5, 1.0]);
        assert!(matches!(
            is_certain(&basis_ket(2, 0), &x, &tol()),
            Err(Error::NotProjector(_))
        ));
    }

    #[test]
    fn null_space_of_rank_one_row() {
        let m = Op::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&m, 1e-10);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!((&m * v).norm() < 1e-12);
        }
    }

    #[test]
    fn range_basis_of_projector() {
        let e = diag(&[1.0, 0.0, 1.0]);
        let b = range_basis(&e);
        assert_eq!(b, vec![basis_ket(3, 0), basis_ket(3, 2)]);
    }
}
