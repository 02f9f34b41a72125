//! Scenario documents: JSON schema and conversion into core types.
//!
//! Complex entries are either a plain number or a `[re, im]` pair.
//! Matrices are arrays of rows.

use std::path::Path;

use premeasure::observables::IndexFunction;
use premeasure::qlin::{spectral_decompose, BipartiteDims, Ket, Op, C64};
use premeasure::scheme::{build_premeasurement, AssignmentEntry, MeasurementScheme};
use premeasure::{SpectralForm, Tolerances};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{context}: {source}")]
    Rejected {
        context: String,
        #[source]
        source: premeasure::Error,
    },
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> InputError {
    InputError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

fn rejected(context: impl Into<String>) -> impl FnOnce(premeasure::Error) -> InputError {
    let context = context.into();
    move |source| InputError::Rejected { context, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    VerifyGeneral,
    VerifyNd,
    Classify,
    Overmeasure,
    Distant,
    ReadySubspace,
}

impl Kind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Kind::VerifyGeneral => "verify-general",
            Kind::VerifyNd => "verify-nd",
            Kind::Classify => "classify",
            Kind::Overmeasure => "overmeasure",
            Kind::Distant => "distant",
            Kind::ReadySubspace => "ready-subspace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexDoc {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexDoc {
    fn value(self) -> C64 {
        match self {
            ComplexDoc::Real(re) => C64::new(re, 0.0),
            ComplexDoc::Pair([re, im]) => C64::new(re, im),
        }
    }

    fn from_value(z: C64) -> Self {
        if z.im == 0.0 {
            ComplexDoc::Real(z.re)
        } else {
            ComplexDoc::Pair([z.re, z.im])
        }
    }
}

pub type KetDoc = Vec<ComplexDoc>;
pub type MatrixDoc = Vec<Vec<ComplexDoc>>;

pub fn ket_doc(k: &Ket) -> KetDoc {
    k.iter().map(|z| ComplexDoc::from_value(*z)).collect()
}

pub fn matrix_doc(m: &Op) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| ComplexDoc::from_value(m[(i, j)]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimsDoc {
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<usize>,
    #[serde(rename = "A1", skip_serializing_if = "Option::is_none")]
    pub a1: Option<usize>,
    #[serde(rename = "A2", skip_serializing_if = "Option::is_none")]
    pub a2: Option<usize>,
    #[serde(rename = "B")]
    pub b: usize,
}

/// Either a Hermitian matrix or an explicit spectral form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projectors: Option<Vec<MatrixDoc>>,
}

impl ObservableDoc {
    pub fn spectral(o: &SpectralForm) -> Self {
        Self {
            matrix: None,
            eigenvalues: Some(o.eigenvalues().to_vec()),
            projectors: Some(o.projectors().iter().map(matrix_doc).collect()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDoc {
    pub source: KetDoc,
    pub target: KetDoc,
}

/// Either a unitary matrix or an assignment to be completed.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<AssignmentDoc>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDoc {
    pub mapping: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectDoc {
    /// Expected class tag for `classify`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    /// Expected family outcome for the verify kinds: `all_pass` or `all_fail`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equivalence: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub kind: Kind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub dims: DimsDoc,
    /// Measured observable (on `A`, or on `A2` for `distant`).
    pub observable: ObservableDoc,
    pub pointer: ObservableDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ready: Option<KetDoc>,
    pub interaction: InteractionDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<FunctionDoc>,
    /// Initial `A1A2` state for `distant`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair_state: Option<KetDoc>,
    /// Free evolution of `A1` for `distant`; identity when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub u_a1: Option<MatrixDoc>,
    /// Object states for the coherence check of `verify-nd`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inputs: Option<Vec<KetDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expect: Option<ExpectDoc>,
}

pub fn load(path: &Path) -> Result<ScenarioDoc, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<ScenarioDoc, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(
            if path == "." {
                "$".into()
            } else {
                format!("$.{path}")
            },
            e.into_inner().to_string(),
        )
    })
}

pub fn ket(doc: &KetDoc, path: &str, dim: usize) -> Result<Ket, InputError> {
    if doc.len() != dim {
        return Err(schema(
            path,
            format!("expected {dim} amplitudes, found {}", doc.len()),
        ));
    }
    Ok(Ket::from_iterator(dim, doc.iter().map(|z| z.value())))
}

pub fn matrix(doc: &MatrixDoc, path: &str, dim: usize) -> Result<Op, InputError> {
    if doc.len() != dim {
        return Err(schema(
            path,
            format!("expected {dim} rows, found {}", doc.len()),
        ));
    }
    for (i, row) in doc.iter().enumerate() {
        if row.len() != dim {
            return Err(schema(
                format!("{path}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
    }
    Ok(Op::from_fn(dim, dim, |i, j| doc[i][j].value()))
}

pub fn observable(
    doc: &ObservableDoc,
    path: &str,
    dim: usize,
    tol: &Tolerances,
) -> Result<SpectralForm, InputError> {
    match (&doc.matrix, &doc.eigenvalues, &doc.projectors) {
        (Some(m), None, None) => {
            let h = matrix(m, &format!("{path}.matrix"), dim)?;
            spectral_decompose(&h, tol.grouping, tol).map_err(rejected(path))
        }
        (None, Some(values), Some(projectors)) => {
            let ps = projectors
                .iter()
                .enumerate()
                .map(|(i, p)| matrix(p, &format!("{path}.projectors[{i}]"), dim))
                .collect::<Result<Vec<_>, _>>()?;
            SpectralForm::new(values.clone(), ps, tol).map_err(rejected(path))
        }
        _ => Err(schema(
            path,
            "expected either \"matrix\" or both \"eigenvalues\" and \"projectors\"",
        )),
    }
}

/// Bipartite dimensions of the measured system and the instrument.
pub fn scheme_dims(doc: &ScenarioDoc) -> Result<BipartiteDims, InputError> {
    let a = if doc.kind == Kind::Distant {
        doc.dims
            .a2
            .ok_or_else(|| schema("$.dims", "distant scenarios need \"A1\", \"A2\" and \"B\""))?
    } else {
        doc.dims
            .a
            .ok_or_else(|| schema("$.dims", "missing \"A\""))?
    };
    BipartiteDims::new(a, doc.dims.b).map_err(rejected("$.dims"))
}

pub fn interaction_matrix(doc: &ScenarioDoc, dims: BipartiteDims) -> Result<Op, InputError> {
    match &doc.interaction.matrix {
        Some(m) => matrix(m, "$.interaction.matrix", dims.total()),
        None => Err(schema(
            "$.interaction",
            "this scenario kind needs an explicit \"matrix\"",
        )),
    }
}

pub fn scheme(
    doc: &ScenarioDoc,
    o: &SpectralForm,
    pointer: &SpectralForm,
    dims: BipartiteDims,
    tol: &Tolerances,
) -> Result<MeasurementScheme, InputError> {
    let ready_doc = doc
        .ready
        .as_ref()
        .ok_or_else(|| schema("$", "missing \"ready\""))?;
    let ready = ket(ready_doc, "$.ready", dims.b)?;
    match (&doc.interaction.matrix, &doc.interaction.assignment) {
        (Some(_), None) => {
            let u = interaction_matrix(doc, dims)?;
            MeasurementScheme::new(dims, ready, pointer.clone(), u, tol)
                .map_err(rejected("$.interaction"))
        }
        (None, Some(entries)) => {
            let assignment = entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let p = format!("$.interaction.assignment[{i}]");
                    Ok(AssignmentEntry::new(
                        ket(&e.source, &format!("{p}.source"), dims.a)?,
                        ket(&e.target, &format!("{p}.target"), dims.total())?,
                    ))
                })
                .collect::<Result<Vec<_>, InputError>>()?;
            build_premeasurement(o, pointer, &ready, &assignment, tol)
                .map_err(rejected("$.interaction.assignment"))
        }
        _ => Err(schema(
            "$.interaction",
            "expected exactly one of \"matrix\" or \"assignment\"",
        )),
    }
}

pub fn function(doc: &ScenarioDoc) -> Result<IndexFunction, InputError> {
    let f = doc
        .function
        .as_ref()
        .ok_or_else(|| schema("$", "overmeasure scenarios need \"function\""))?;
    IndexFunction::new(f.mapping.clone(), f.values.clone()).map_err(rejected("$.function"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_errors_carry_a_path() {
        let err = parse(r#"{"kind": "classify", "dims": {"A": "three", "B": 2}}"#).unwrap_err();
        let text = err.to_string();
        assert!(text.starts_with("$.dims.A"), "{text}");
    }

    #[test]
    fn unknown_kind_is_rejected() {
        assert!(parse(r#"{"kind": "guess"}"#).is_err());
    }

    #[test]
    fn complex_entries() {
        let doc: KetDoc = serde_json::from_str("[1, [0.5, -0.5]]").unwrap();
        let k = ket(&doc, "$", 2).unwrap();
        assert_eq!(k[1], C64::new(0.5, -0.5));
        assert_eq!(
            serde_json::to_string(&ket_doc(&k)).unwrap(),
            "[1.0,[0.5,-0.5]]"
        );
    }
}
