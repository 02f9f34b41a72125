//! Discrete observables in spectral form, and functions of them.
//!
//! Only the indexed eigenprojectors enter any check; eigenvalues are carried
//! for labelling and uniqueness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlin::{ensure_square, identity, projector_residual, Op};
use crate::tol::Tolerances;

/// `Σ_k o_k E^k` with distinct `o_k` and a complete orthogonal family `E^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralForm {
    eigenvalues: Vec<f64>,
    projectors: Vec<Op>,
    dim: usize,
}

impl SpectralForm {
    /// Validates and assembles a spectral form.
    pub fn new(eigenvalues: Vec<f64>, projectors: Vec<Op>, tol: &Tolerances) -> Result<Self> {
        if eigenvalues.len() != projectors.len() {
            return Err(Error::LengthMismatch {
                what: "eigenvalues and projectors",
                left: eigenvalues.len(),
                right: projectors.len(),
            });
        }
        let Some(first) = projectors.first() else {
            return Err(Error::IncompleteProjectors(f64::INFINITY));
        };
        let dim = ensure_square(first)?;
        for p in &projectors {
            let d = ensure_square(p)?;
            if d != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: d,
                });
            }
        }
        for i in 0..eigenvalues.len() {
            if !eigenvalues[i].is_finite() {
                return Err(Error::InvalidFunction(format!(
                    "eigenvalue {i} is not finite"
                )));
            }
            for j in (i + 1)..eigenvalues.len() {
                if (eigenvalues[i] - eigenvalues[j]).abs() <= tol.grouping {
                    return Err(Error::DuplicateEigenvalue { i, j });
                }
            }
        }
        for p in &projectors {
            let r = projector_residual(p);
            if r > tol.op {
                return Err(Error::NotProjector(r));
            }
        }
        for i in 0..projectors.len() {
            for j in (i + 1)..projectors.len() {
                let residual = (&projectors[i] * &projectors[j]).norm();
                if residual > tol.op {
                    return Err(Error::NonOrthogonalProjectors { i, j, residual });
                }
            }
        }
        let sum = projectors
            .iter()
            .fold(Op::zeros(dim, dim), |acc, p| acc + p);
        let completeness = (sum - identity(dim)).norm();
        if completeness > tol.op {
            return Err(Error::IncompleteProjectors(completeness));
        }
        Ok(Self {
            eigenvalues,
            projectors,
            dim,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[Op] {
        &self.projectors
    }

    pub fn projector(&self, k: usize) -> &Op {
        &self.projectors[k]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    /// `Σ_k o_k E^k`.
    pub fn operator(&self) -> Op {
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(Op::zeros(self.dim, self.dim), |acc, (o, e)| {
                acc + e.scale(*o)
            })
    }

    /// Projector `k`, or the zero operator when the index is past the end.
    pub(crate) fn projector_or_zero(&self, k: usize) -> Op {
        self.projectors
            .get(k)
            .cloned()
            .unwrap_or_else(|| Op::zeros(self.dim, self.dim))
    }
}

/// A function on eigenvalue indices, given as a table `k ↦ l = f(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexFunction {
    mapping: Vec<usize>,
    target_values: Vec<f64>,
}

impl IndexFunction {
    pub fn new(mapping: Vec<usize>, target_values: Vec<f64>) -> Result<Self> {
        let n_targets = target_values.len();
        let mut hit = vec![false; n_targets];
        for (k, &l) in mapping.iter().enumerate() {
            if l >= n_targets {
                return Err(Error::InvalidFunction(format!(
                    "source index {k} maps to {l}, but only {n_targets} target values are given"
                )));
            }
            hit[l] = true;
        }
        if let Some(l) = hit.iter().position(|h| !h) {
            return Err(Error::InvalidFunction(format!(
                "target index {l} has an empty preimage"
            )));
        }
        Ok(Self {
            mapping,
            target_values,
        })
    }

    pub fn identity(values: Vec<f64>) -> Self {
        Self {
            mapping: (0..values.len()).collect(),
            target_values: values,
        }
    }

    pub fn constant(sources: usize, value: f64) -> Self {
        Self {
            mapping: vec![0; sources],
            target_values: vec![value],
        }
    }

    pub fn mapping(&self) -> &[usize] {
        &self.mapping
    }

    pub fn target_values(&self) -> &[f64] {
        &self.target_values
    }

    pub fn sources(&self) -> usize {
        self.mapping.len()
    }

    pub fn targets(&self) -> usize {
        self.target_values.len()
    }

    pub fn is_injective(&self) -> bool {
        self.sources() == self.targets()
    }

    /// `f⁻¹(l)` in increasing order.
    pub fn preimage(&self, l: usize) -> Vec<usize> {
        (0..self.mapping.len())
            .filter(|&k| self.mapping[k] == l)
            .collect()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &IndexFunction) -> Result<IndexFunction> {
        if next.sources() != self.targets() {
            return Err(Error::InvalidFunction(format!(
                "cannot compose: {} targets feed {} sources",
                self.targets(),
                next.sources()
            )));
        }
        IndexFunction::new(
            self.mapping.iter().map(|&l| next.mapping[l]).collect(),
            next.target_values.clone(),
        )
    }
}

/// `f(O)`: the spectral form whose `l`-th projector is `Σ_{k∈f⁻¹(l)} E^k`.
pub fn apply_function(
    o: &SpectralForm,
    f: &IndexFunction,
    tol: &Tolerances,
) -> Result<SpectralForm> {
    coarsen_pointer(o, f, f.target_values().to_vec(), tol)
}

/// Merges pointer positions along `f`, labelling the merged positions with
/// freely chosen distinct `target_values`.
pub fn coarsen_pointer(
    p: &SpectralForm,
    f: &IndexFunction,
    target_values: Vec<f64>,
    tol: &Tolerances,
) -> Result<SpectralForm> {
    if f.sources() != p.len() {
        return Err(Error::InvalidFunction(format!(
            "function is defined on {} indices but the observable has {}",
            f.sources(),
            p.len()
        )));
    }
    if target_values.len() != f.targets() {
        return Err(Error::LengthMismatch {
            what: "target values and function targets",
            left: target_values.len(),
            right: f.targets(),
        });
    }
    let dim = p.dim();
    let projectors = (0..f.targets())
        .map(|l| {
            f.preimage(l)
                .into_iter()
                .fold(Op::zeros(dim, dim), |acc, k| acc + p.projector(k))
        })
        .collect();
    SpectralForm::new(target_values, projectors, tol)
}
