//! Scenario execution and the run report.

use std::fmt::Write as _;

use premeasure::distant::{
    distant_state_after_complete, find_twin, subsystem_premeasure, TripartiteDims,
};
use premeasure::kinds::{classify, is_ideal, Classification, IdealReport, MClass};
use premeasure::qlin::identity;
use premeasure::scheme::ready_subspace;
use premeasure::verify::{
    coherence_report, overmeasure, verify_all_general, verify_all_nd, verify_general,
    CoherenceReport, Equivalence, GeneralCriterion, NdCriterion,
};
use premeasure::{CheckConfig, FamilyReport, Outcome, Tolerances};
use serde::Serialize;

use crate::scenario::{self, matrix_doc, InputError, KetDoc, Kind, MatrixDoc, ScenarioDoc};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flags {
    pub strict: bool,
    pub seed: Option<u64>,
    pub tol_scale: f64,
    pub trials: usize,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            strict: false,
            seed: None,
            tol_scale: 1.0,
            trials: 50,
        }
    }
}

/// One asserted check; the run passes iff every check does.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl Check {
    fn boolean(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            outcome: if ok { Outcome::Pass } else { Outcome::Fail },
            residual: None,
        }
    }

    fn residual(name: impl Into<String>, residual: f64, cfg: &CheckConfig) -> Self {
        Self {
            name: name.into(),
            outcome: Outcome::from_residual(residual, cfg.tol.op, &cfg.tol),
            residual: Some(residual),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OvermeasureReport {
    pub coarse_eigenvalues: Vec<f64>,
    pub source_nd_passed: bool,
    pub general: FamilyReport,
    pub nd: FamilyReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistantBranch {
    pub k: usize,
    pub probability: f64,
    pub state: MatrixDoc,
    pub predicted: MatrixDoc,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwinReport {
    pub projectors: Vec<MatrixDoc>,
    pub residual: f64,
    pub consistency_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistantReport {
    pub no_influence_residual: f64,
    pub branches: Vec<DistantBranch>,
    pub twin: Option<TwinReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadySubspaceReport {
    pub dimension: usize,
    pub basis: Vec<KetDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub indeterminate: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub kind: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub tol_scale: f64,
    pub strict: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub general: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nd: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coherence: Option<Vec<CoherenceReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<Classification>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ideal: Option<IdealReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overmeasure: Option<OvermeasureReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distant: Option<DistantReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ready_subspace: Option<ReadySubspaceReport>,
    pub checks: Vec<Check>,
    pub summary: Summary,
    pub passed: bool,
}

impl RunReport {
    fn new(doc: &ScenarioDoc, cfg: &CheckConfig, flags: &Flags) -> Self {
        Self {
            scenario: doc.name.clone().unwrap_or_else(|| "unnamed".into()),
            kind: doc.kind.as_str(),
            seed: cfg.seed,
            trials: cfg.trials,
            tol_scale: flags.tol_scale,
            strict: flags.strict,
            general: None,
            nd: None,
            coherence: None,
            classification: None,
            ideal: None,
            overmeasure: None,
            distant: None,
            ready_subspace: None,
            checks: Vec::new(),
            summary: Summary {
                checks: 0,
                passed: 0,
                failed: 0,
                indeterminate: 0,
                max_residual: 0.0,
            },
            passed: false,
        }
    }

    fn finish(mut self) -> Self {
        let count = |o: Outcome| self.checks.iter().filter(|c| c.outcome == o).count();
        let indeterminate = count(Outcome::Indeterminate);
        self.summary = Summary {
            checks: self.checks.len(),
            passed: count(Outcome::Pass),
            failed: count(Outcome::Fail),
            indeterminate,
            max_residual: self
                .checks
                .iter()
                .filter_map(|c| c.residual)
                .chain(self.general.iter().map(FamilyReport::max_residual))
                .chain(self.nd.iter().map(FamilyReport::max_residual))
                .fold(0.0, f64::max),
        };
        self.passed = self.summary.failed == 0 && !(self.strict && indeterminate > 0);
        self
    }
}

fn family_checks(family: &FamilyReport, expected: Option<&str>) -> Result<Vec<Check>, InputError> {
    match expected {
        None => Ok(family
            .verdicts
            .iter()
            .map(|v| Check {
                name: v.criterion.to_string(),
                outcome: v.outcome,
                residual: Some(v.residual),
            })
            .collect()),
        Some(tag) => {
            let want = match tag {
                "all_pass" => Equivalence::AllPass,
                "all_fail" => Equivalence::AllFail,
                other => {
                    return Err(InputError::Schema {
                        path: "$.expect.equivalence".into(),
                        message: format!("expected \"all_pass\" or \"all_fail\", found {other:?}"),
                    })
                }
            };
            Ok(vec![Check::boolean(
                format!("equivalence is {tag}"),
                family.equivalence == want,
            )])
        }
    }
}

fn expected_equivalence(doc: &ScenarioDoc) -> Option<&str> {
    doc.expect.as_ref().and_then(|e| e.equivalence.as_deref())
}

pub fn run(doc: &ScenarioDoc, flags: &Flags) -> Result<RunReport, InputError> {
    let cfg = CheckConfig {
        tol: Tolerances::scaled(flags.tol_scale),
        trials: flags.trials,
        seed: flags.seed.or(doc.seed).unwrap_or(0),
    };
    let tol = cfg.tol;
    let mut report = RunReport::new(doc, &cfg, flags);
    let dims = scenario::scheme_dims(doc)?;
    let o = scenario::observable(&doc.observable, "$.observable", dims.a, &tol)?;
    let pointer = scenario::observable(&doc.pointer, "$.pointer", dims.b, &tol)?;
    let rejected = |context: &str| {
        let context = context.to_string();
        move |source| InputError::Rejected { context, source }
    };

    match doc.kind {
        Kind::VerifyGeneral => {
            let s = scenario::scheme(doc, &o, &pointer, dims, &tol)?;
            let family = verify_all_general(&s, &o, &cfg).map_err(rejected("verify-general"))?;
            report.checks = family_checks(&family, expected_equivalence(doc))?;
            report.general = Some(family);
        }
        Kind::VerifyNd => {
            let s = scenario::scheme(doc, &o, &pointer, dims, &tol)?;
            let family = verify_all_nd(&s, &o, &cfg).map_err(rejected("verify-nd"))?;
            report.checks = family_checks(&family, expected_equivalence(doc))?;
            if let Some(inputs) = &doc.inputs {
                let mut out = Vec::new();
                for (i, k) in inputs.iter().enumerate() {
                    let path = format!("$.inputs[{i}]");
                    let phi = scenario::ket(k, &path, dims.a)?;
                    let c = coherence_report(&s, &o, &phi, &cfg).map_err(rejected(&path))?;
                    if c.twin_holds {
                        report.checks.push(Check::residual(
                            format!("coherence of input {i}"),
                            c.max_residual(),
                            &cfg,
                        ));
                    }
                    out.push(c);
                }
                report.coherence = Some(out);
            }
            report.nd = Some(family);
        }
        Kind::Classify => {
            let s = scenario::scheme(doc, &o, &pointer, dims, &tol)?;
            let c = classify(&s, &o, &cfg).map_err(rejected("classify"))?;
            report
                .checks
                .push(Check::boolean("calibration condition", c.cc_established));
            if let Some(tag) = doc.expect.as_ref().and_then(|e| e.class.as_deref()) {
                let want = MClass::from_tag(tag).ok_or_else(|| InputError::Schema {
                    path: "$.expect.class".into(),
                    message: format!("unknown class {tag:?}"),
                })?;
                report
                    .checks
                    .push(Check::boolean(format!("class is {tag}"), c.class == want));
            }
            report.ideal = Some(is_ideal(&s, &o, &tol).map_err(rejected("classify"))?);
            report.classification = Some(c);
        }
        Kind::Overmeasure => {
            let s = scenario::scheme(doc, &o, &pointer, dims, &tol)?;
            let f = scenario::function(doc)?;
            let source_nd = verify_all_nd(&s, &o, &cfg).map_err(rejected("overmeasure"))?;
            let source_nd_passed = source_nd.equivalence == Equivalence::AllPass;
            let om = overmeasure(&s, &o, &f, &cfg).map_err(rejected("overmeasure"))?;
            let general = verify_all_general(&om.scheme, &om.observable, &cfg)
                .map_err(rejected("overmeasure"))?;
            let nd =
                verify_all_nd(&om.scheme, &om.observable, &cfg).map_err(rejected("overmeasure"))?;
            report.checks.push(Check::boolean(
                "coarse scheme passes the general criteria",
                general.equivalence == Equivalence::AllPass,
            ));
            if source_nd_passed {
                report.checks.push(Check::boolean(
                    "coarse scheme passes the nondemolition criteria",
                    nd.equivalence == Equivalence::AllPass,
                ));
            }
            report.overmeasure = Some(OvermeasureReport {
                coarse_eigenvalues: om.observable.eigenvalues().to_vec(),
                source_nd_passed,
                general,
                nd,
            });
        }
        Kind::Distant => {
            let a1 = doc.dims.a1.ok_or_else(|| InputError::Schema {
                path: "$.dims".into(),
                message: "distant scenarios need \"A1\"".into(),
            })?;
            TripartiteDims::new(a1, dims.a, dims.b).map_err(rejected("$.dims"))?;
            let s = scenario::scheme(doc, &o, &pointer, dims, &tol)?;
            let pair_doc = doc.pair_state.as_ref().ok_or_else(|| InputError::Schema {
                path: "$".into(),
                message: "distant scenarios need \"pair_state\"".into(),
            })?;
            let phi = scenario::ket(pair_doc, "$.pair_state", a1 * dims.a)?;
            let u1 = match &doc.u_a1 {
                Some(m) => scenario::matrix(m, "$.u_a1", a1)?,
                None => identity(a1),
            };
            let cc = verify_general(&s, &o, GeneralCriterion::CcInv, &cfg)
                .map_err(rejected("distant"))?;
            report.checks.push(Check {
                name: "calibration condition".into(),
                outcome: cc.outcome,
                residual: Some(cc.residual),
            });
            let pre = subsystem_premeasure(&phi, a1, &s, &u1, &tol).map_err(rejected("distant"))?;
            report.checks.push(Check::residual(
                "no influence on A1",
                pre.no_influence_residual,
                &cfg,
            ));
            let mut branches = Vec::new();
            if cc.passed() {
                for k in 0..o.len() {
                    match distant_state_after_complete(&phi, a1, &s, &o, &u1, k, &tol) {
                        Ok(out) => {
                            report.checks.push(Check::residual(
                                format!("distant state for k={k}"),
                                out.residual,
                                &cfg,
                            ));
                            branches.push(DistantBranch {
                                k,
                                probability: out.probability,
                                state: matrix_doc(&out.state),
                                predicted: matrix_doc(&out.predicted),
                                residual: out.residual,
                            });
                        }
                        Err(premeasure::Error::ZeroProbability(_)) => {}
                        Err(e) => return Err(rejected("distant")(e)),
                    }
                }
            }
            let twin = find_twin(&phi, a1, &o, &tol).map_err(rejected("distant"))?;
            if let Some(t) = &twin {
                report.checks.push(Check::residual(
                    "twin consistency",
                    t.consistency_residual,
                    &cfg,
                ));
            }
            report.distant = Some(DistantReport {
                no_influence_residual: pre.no_influence_residual,
                branches,
                twin: twin.map(|t| TwinReport {
                    projectors: t.observable.projectors().iter().map(matrix_doc).collect(),
                    residual: t.residual,
                    consistency_residual: t.consistency_residual,
                }),
            });
        }
        Kind::ReadySubspace => {
            let u = scenario::interaction_matrix(doc, dims)?;
            let basis =
                ready_subspace(&u, &o, &pointer, &tol).map_err(rejected("ready-subspace"))?;
            for (i, b) in basis.iter().enumerate() {
                let s = premeasure::MeasurementScheme::new(
                    dims,
                    b.clone(),
                    pointer.clone(),
                    u.clone(),
                    &tol,
                )
                .map_err(rejected("ready-subspace"))?;
                let v = verify_general(&s, &o, GeneralCriterion::CcInv, &cfg)
                    .map_err(rejected("ready-subspace"))?;
                report.checks.push(Check {
                    name: format!("basis vector {i} is calibrated"),
                    outcome: v.outcome,
                    residual: Some(v.residual),
                });
            }
            report.ready_subspace = Some(ReadySubspaceReport {
                dimension: basis.len(),
                basis: basis.iter().map(scenario::ket_doc).collect(),
            });
        }
    }
    Ok(report.finish())
}

fn description(criterion: &str) -> &'static str {
    GeneralCriterion::from_tag(criterion)
        .map(|c| c.description())
        .or_else(|| NdCriterion::from_tag(criterion).map(|c| c.description()))
        .unwrap_or("")
}

fn write_family(out: &mut String, title: &str, family: &FamilyReport) {
    let _ = writeln!(out, "{title}");
    for v in &family.verdicts {
        let _ = write!(
            out,
            "  {:<13} {:<45} {:<13} residual {:.3e}",
            v.criterion,
            description(v.criterion),
            v.outcome.as_str(),
            v.residual
        );
        if let Some(w) = &v.witness {
            let _ = write!(out, "  witness k={} ({})", w.k, w.label);
        }
        if let Some(n) = &v.note {
            let _ = write!(out, "  [{n}]");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "  equivalence: {:?}", family.equivalence);
}

fn write_matrix(out: &mut String, indent: &str, m: &MatrixDoc) {
    for row in m {
        let cells: Vec<String> = row
            .iter()
            .map(|z| match z {
                scenario::ComplexDoc::Real(re) => format!("{re:>9.5}"),
                scenario::ComplexDoc::Pair([re, im]) => format!("{re:>9.5}{im:+.5}i"),
            })
            .collect();
        let _ = writeln!(out, "{indent}[{}]", cells.join(" "));
    }
}

/// Human-readable rendering of a report.
pub fn render_text(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "scenario {} ({}), seed {}, {} trials",
        r.scenario, r.kind, r.seed, r.trials
    );
    if let Some(f) = &r.general {
        write_family(&mut out, "general premeasurement criteria", f);
    }
    if let Some(f) = &r.nd {
        write_family(&mut out, "nondemolition criteria", f);
    }
    if let Some(cs) = &r.coherence {
        for (i, c) in cs.iter().enumerate() {
            let _ = writeln!(
                out,
                "coherence input {i}: twin {} rho_A {:.3e} rho_B {:.3e} [E,rho_A] {:.3e} [F,rho_B] {:.3e}",
                c.twin_holds, c.rho_a_residual, c.rho_b_residual, c.commutator_a, c.commutator_b
            );
        }
    }
    if let Some(c) = &r.classification {
        let _ = writeln!(out, "class: {}", c.class);
        for b in &c.branches {
            let _ = writeln!(
                out,
                "  branch k={}: {} (nondemolition {}, disentangled {} with marginal rank {}, ideal {})",
                b.k, b.class, b.nondemolition, b.disentangled, b.marginal_rank, b.ideal
            );
        }
    }
    if let Some(i) = &r.ideal {
        let _ = writeln!(
            out,
            "ideal definitions: canonical {} ({:.3e}), Lueders {} ({:.3e}), sharp unchanged {} ({:.3e})",
            i.canonical, i.canonical_residual, i.luders, i.luders_residual, i.sharp_unchanged, i.sharp_residual
        );
    }
    if let Some(om) = &r.overmeasure {
        let _ = writeln!(
            out,
            "coarse observable eigenvalues {:?}",
            om.coarse_eigenvalues
        );
        write_family(&mut out, "coarse scheme, general criteria", &om.general);
        write_family(&mut out, "coarse scheme, nondemolition criteria", &om.nd);
    }
    if let Some(d) = &r.distant {
        let _ = writeln!(out, "no-influence residual {:.3e}", d.no_influence_residual);
        for b in &d.branches {
            let _ = writeln!(
                out,
                "  k={} probability {:.6} residual {:.3e}; state of A1:",
                b.k, b.probability, b.residual
            );
            write_matrix(&mut out, "    ", &b.state);
        }
        match &d.twin {
            Some(t) => {
                let _ = writeln!(
                    out,
                    "twin on A1 found (residual {:.3e}, consistency {:.3e})",
                    t.residual, t.consistency_residual
                );
                for (k, p) in t.projectors.iter().enumerate() {
                    let _ = writeln!(out, "  projector k={k}:");
                    write_matrix(&mut out, "    ", p);
                }
            }
            None => {
                let _ = writeln!(out, "no twin on A1");
            }
        }
    }
    if let Some(rs) = &r.ready_subspace {
        let _ = writeln!(out, "ready subspace dimension {}", rs.dimension);
    }
    let _ = writeln!(out, "checks");
    for c in &r.checks {
        let _ = write!(out, "  {:<13} {}", c.outcome.as_str(), c.name);
        if let Some(res) = c.residual {
            let _ = write!(out, " (residual {res:.3e})");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "{}: {} passed, {} failed, {} indeterminate",
        if r.passed { "PASS" } else { "FAIL" },
        r.summary.passed,
        r.summary.failed,
        r.summary.indeterminate
    );
    out
}
