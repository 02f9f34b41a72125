//! The fixture catalog: the five canonical classification scenarios and
//! the singlet distant-measurement scenario.

use std::path::Path;

use premeasure::distant::singlet;
use premeasure::fixtures::{self, Fixture};

use crate::scenario::{
    ket_doc, matrix_doc, DimsDoc, ExpectDoc, InteractionDoc, Kind, ObservableDoc, ScenarioDoc,
};

fn classify_doc(f: &Fixture) -> ScenarioDoc {
    let dims = f.scheme.dims();
    ScenarioDoc {
        name: Some(f.name.to_string()),
        kind: Kind::Classify,
        seed: Some(0),
        dims: DimsDoc {
            a: Some(dims.a),
            b: dims.b,
            ..DimsDoc::default()
        },
        observable: ObservableDoc::spectral(&f.observable),
        pointer: ObservableDoc::spectral(f.scheme.pointer()),
        ready: Some(ket_doc(f.scheme.ready())),
        interaction: InteractionDoc {
            matrix: Some(matrix_doc(f.scheme.interaction())),
            assignment: None,
        },
        function: None,
        pair_state: None,
        u_a1: None,
        inputs: None,
        expect: Some(ExpectDoc {
            class: Some(f.intended.tag().to_string()),
            equivalence: None,
        }),
    }
}

fn singlet_doc() -> ScenarioDoc {
    let f = fixtures::s_ideal2();
    ScenarioDoc {
        name: Some("SINGLET_Z".into()),
        kind: Kind::Distant,
        seed: Some(0),
        dims: DimsDoc {
            a: None,
            a1: Some(2),
            a2: Some(2),
            b: 2,
        },
        observable: ObservableDoc::spectral(&f.observable),
        pointer: ObservableDoc::spectral(f.scheme.pointer()),
        ready: Some(ket_doc(f.scheme.ready())),
        interaction: InteractionDoc {
            matrix: Some(matrix_doc(f.scheme.interaction())),
            assignment: None,
        },
        function: None,
        pair_state: Some(ket_doc(&singlet())),
        u_a1: None,
        inputs: None,
        expect: None,
    }
}

/// File name and document of every catalog entry, in a fixed order.
pub fn entries() -> Vec<(String, ScenarioDoc)> {
    let mut out: Vec<(String, ScenarioDoc)> = fixtures::canonical()
        .iter()
        .map(|f| (format!("{}.json", f.name.to_lowercase()), classify_doc(f)))
        .collect();
    out.push(("singlet_distant.json".into(), singlet_doc()));
    out
}

pub fn write_all(dir: &Path) -> std::io::Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut names = Vec::new();
    for (name, doc) in entries() {
        let mut text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(dir.join(&name), text)?;
        names.push(name);
    }
    Ok(names)
}
