//! JSON reports and the checks embedded in them.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::brackets::BracketTable;
use crate::compare::{ChainStatus, Comparison};
use crate::dirac::DiracReport;
use crate::dynamics::{numeric_oracle, Check, EomStep, OracleError, OracleOutcome, Subject};
use crate::linalg::Matrix;
use crate::modelspec::ConstraintDecl;
use crate::symexpr::{expr_to_string, Expr, RewriteRule, RewriteSystem, SymbolTable};
use crate::symplectic::{AnalysisReport, Disposition, LevelRecord, Verdict};

pub const SCHEMA_VERSION: u32 = 1;
pub const JACOBI_TRIALS: usize = 10;
pub const INVERSE_TRIALS: usize = 10;
pub const DETERMINANT_TRIALS: usize = 5;

fn s(e: &Expr, t: &SymbolTable) -> String {
    expr_to_string(e, t)
}

fn names(syms: &[usize], t: &SymbolTable) -> Vec<String> {
    syms.iter().map(|&v| t.name(v).to_string()).collect()
}

fn matrix(m: &Matrix<Expr>, t: &SymbolTable) -> Value {
    json!((0..m.rows())
        .map(|i| m.row(i).iter().map(|e| s(e, t)).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn table(bt: &BracketTable, t: &SymbolTable) -> Value {
    json!({ "basis": bt.names(t), "entries": matrix(&bt.entries, t) })
}

pub fn rule_string(r: &RewriteRule, t: &SymbolTable) -> String {
    let pattern = Expr::from_poly(crate::Poly::term(num_traits::One::one(), r.pattern.clone()));
    format!("{} -> {}", s(&pattern, t), s(&r.replacement, t))
}

fn rewrites(rw: &RewriteSystem, t: &SymbolTable) -> Value {
    let branches: BTreeMap<String, String> = rw
        .branches
        .iter()
        .map(|(&k, v)| (t.name(k).to_string(), v.as_char().to_string()))
        .collect();
    json!({
        "rules": rw.rules.iter().map(|r| rule_string(r, t)).collect::<Vec<_>>(),
        "branches": branches,
    })
}

fn constraint(c: &ConstraintDecl, t: &SymbolTable) -> Value {
    json!({
        "label": c.label,
        "expr": s(&c.expr, t),
        "origin": c.origin.to_string(),
        "multiplier": c.multiplier,
        "solved_for": c.solved_for.map(|v| t.name(v).to_string()),
    })
}

fn disposition(d: &Disposition) -> Value {
    let (kind, labels): (&str, &[String]) = match d {
        Disposition::Nonsingular => ("nonsingular", &[]),
        Disposition::NewConstraints(l) => ("new-constraints", l),
        Disposition::GaugeFixing(l) => ("gauge-fixing", l),
        Disposition::Symmetry => ("symmetry", &[]),
        Disposition::Inconsistent => ("inconsistent", &[]),
    };
    json!({ "kind": kind, "labels": labels })
}

fn level(rec: &LevelRecord, t: &SymbolTable) -> Value {
    json!({
        "index": rec.index,
        "injected": rec.injected,
        "variables": names(&rec.variables, t),
        "one_form": rec.one_form.iter().map(|e| s(e, t)).collect::<Vec<_>>(),
        "potential": s(&rec.potential, t),
        "f": matrix(&rec.f.entries, t),
        "determinant": s(&rec.determinant, t),
        "zero_modes": rec.zero_modes.iter().map(|z| json!({
            "components": z.components.iter().map(|e| s(e, t)).collect::<Vec<_>>(),
            "pivot": t.name(rec.variables[z.pivot]),
        })).collect::<Vec<_>>(),
        "candidates": rec.candidates.iter().map(|c| json!({
            "mode": c.mode,
            "contraction": s(&c.contraction, t),
            "constraint": c.constraint.as_ref().map(|e| s(e, t)),
            "label": c.label,
        })).collect::<Vec<_>>(),
        "disposition": disposition(&rec.disposition),
    })
}

fn assignments(pairs: &[(usize, Expr)], t: &SymbolTable) -> Value {
    json!(pairs
        .iter()
        .map(|(v, e)| json!({ "symbol": t.name(*v), "value": s(e, t) }))
        .collect::<Vec<_>>())
}

fn verdict(v: &Verdict, t: &SymbolTable) -> Value {
    match v {
        Verdict::Brackets {
            table: bt,
            hamiltonian,
            solutions,
            rules,
            ..
        } => json!({
            "kind": v.kind(),
            "table": table(bt, t),
            "hamiltonian": hamiltonian.as_ref().map(|h| s(h, t)),
            "solutions": assignments(solutions, t),
            "rules": rules.iter().map(|r| rule_string(r, t)).collect::<Vec<_>>(),
        }),
        Verdict::Symmetry {
            generator,
            variables,
            delta_v,
        } => json!({
            "kind": v.kind(),
            "generator": {
                "variables": names(variables, t),
                "components": generator.components.iter().map(|e| s(e, t)).collect::<Vec<_>>(),
                "pivot": t.name(variables[generator.pivot]),
            },
            "delta_v": s(delta_v, t),
        }),
        Verdict::LevelLimit => json!({ "kind": v.kind() }),
        Verdict::Inconsistent { value } => json!({ "kind": v.kind(), "value": s(value, t) }),
    }
}

/// Levels, chain, verdict, Hamiltonian and rewrite rules of a symplectic run.
pub fn symplectic_section(r: &AnalysisReport) -> Map<String, Value> {
    let t = &r.final_model.symbols;
    let rw = match &r.verdict {
        Verdict::Brackets { rewrites: rw, .. } => rw,
        _ => &r.final_model.rewrites,
    };
    let mut m = Map::new();
    m.insert("engine".into(), json!(r.algorithm.tag()));
    m.insert("levels".into(), json!(r.levels.iter().map(|l| level(l, t)).collect::<Vec<_>>()));
    m.insert("chain".into(), json!(r.chain.iter().map(|c| constraint(c, t)).collect::<Vec<_>>()));
    m.insert("verdict".into(), verdict(&r.verdict, t));
    m.insert("hamiltonian".into(), json!(r.hamiltonian().map(|h| s(h, t))));
    m.insert("rewrite_rules".into(), rewrites(rw, t));
    m.insert("warnings".into(), json!(r.warnings));
    m
}

pub fn eom_section(step: &EomStep, t: &SymbolTable) -> Value {
    json!({
        "degree": step.degree,
        "equations": step.motion.rhs.iter().map(|(z, e)| json!({
            "symbol": t.name(*z),
            "rate": s(e, t),
        })).collect::<Vec<_>>(),
        "conserved": step.conserved.iter().map(|e| s(e, t)).collect::<Vec<_>>(),
        "promotion": step.promotion.as_ref().map(|p| json!({
            "source": p.source,
            "quantity": s(&p.quantity, t),
            "constraint": constraint(&p.constraint, t),
        })),
    })
}

pub fn dirac_section(d: &DiracReport) -> Map<String, Value> {
    let t = &d.symbols;
    let mut m = Map::new();
    m.insert("engine".into(), json!("dirac"));
    m.insert("hamiltonian_canonical".into(), json!(s(&d.hamiltonian, t)));
    m.insert(
        "chain".into(),
        json!(d.chain.constraints.iter().map(|c| constraint(c, t)).collect::<Vec<_>>()),
    );
    m.insert(
        "multiplier_fixings".into(),
        json!(d.chain.fixings.iter().map(|f| json!({
            "constraint": f.constraint,
            "condition": s(&f.condition, t),
            "primaries": f.primaries,
        })).collect::<Vec<_>>()),
    );
    m.insert(
        "classification".into(),
        json!(d.chain.constraints.iter().zip(&d.classes).map(|(c, k)| json!({
            "label": c.label,
            "class": k.as_str(),
        })).collect::<Vec<_>>()),
    );
    m.insert(
        "dirac_matrix".into(),
        json!({ "labels": d.dirac_matrix.labels, "entries": matrix(&d.dirac_matrix.entries, t) }),
    );
    m.insert(
        "verdict".into(),
        json!({ "kind": "brackets", "table": table(&d.table, t) }),
    );
    m.insert("hamiltonian".into(), json!(d.reduced_hamiltonian.as_ref().map(|h| s(h, t))));
    m.insert(
        "generators".into(),
        json!(d.generators.iter().map(|g| json!({
            "constraint": g.constraint,
            "variations": assignments(&g.variations, t),
            "delta_h": s(&g.delta_h, t),
        })).collect::<Vec<_>>()),
    );
    m.insert("warnings".into(), json!(d.warnings));
    m
}

pub fn comparison_section(c: &Comparison, t: &SymbolTable) -> Value {
    json!({
        "chain": c.chain.iter().map(|r| json!({
            "side": r.side,
            "label": r.label,
            "expr": s(&r.expr, t),
            "status": r.status.as_str(),
            "matched_with": match &r.status { ChainStatus::Matched(w) => json!(w), _ => Value::Null },
        })).collect::<Vec<_>>(),
        "compared_symbols": names(&c.compared, t),
        "table_differences": c.table.as_ref().map(|d| d.iter().map(|x| json!({
            "a": t.name(x.a),
            "b": t.name(x.b),
            "dirac": s(&x.dirac, t),
            "symplectic": s(&x.symplectic, t),
        })).collect::<Vec<_>>()),
        "differences": c.differences(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckWitness {
    pub point: BTreeMap<String, String>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub subject: String,
    pub method: &'static str,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub evaluated: Option<usize>,
    pub passed: bool,
    pub witness: Option<CheckWitness>,
    pub error: Option<String>,
}

impl CheckRecord {
    fn symbolic(check: &str, subject: String, passed: bool) -> Self {
        Self {
            check: check.into(),
            subject,
            method: "symbolic",
            seed: None,
            trials: None,
            evaluated: None,
            passed,
            witness: None,
            error: None,
        }
    }

    fn numeric(subject: String, seed: u64, trials: usize, r: Result<OracleOutcome, OracleError>, check: Check, t: &SymbolTable) -> Self {
        let mut out = Self {
            check: check.as_str().into(),
            subject,
            method: "numeric",
            seed: Some(seed),
            trials: Some(trials),
            evaluated: None,
            passed: false,
            witness: None,
            error: None,
        };
        match r {
            Ok(o) => {
                out.evaluated = Some(o.evaluated);
                out.passed = o.passed();
                out.witness = o.witness.map(|w| CheckWitness {
                    point: w.point.iter().map(|(k, v)| (t.name(*k).to_string(), v.to_string())).collect(),
                    detail: w.detail,
                });
            }
            Err(e) => out.error = Some(e.to_string()),
        }
        out
    }
}

fn table_checks(prefix: &str, bt: &BracketTable, seed: u64, t: &SymbolTable, out: &mut Vec<CheckRecord>) {
    out.push(CheckRecord::symbolic(
        "antisymmetry",
        prefix.to_string(),
        bt.entries.is_antisymmetric(),
    ));
    let r = numeric_oracle(Check::Jacobi, Subject::Table(bt), JACOBI_TRIALS, seed);
    out.push(CheckRecord::numeric(prefix.to_string(), seed, JACOBI_TRIALS, r, Check::Jacobi, t));
}

/// Kernel residuals, inverses, determinants and bracket-table identities for
/// everything a symplectic run emitted.
pub fn symplectic_checks(r: &AnalysisReport, seed: u64) -> Vec<CheckRecord> {
    let t = &r.final_model.symbols;
    let tag = r.algorithm.tag();
    let mut out = Vec::new();
    for rec in &r.levels {
        let f = &rec.f.entries;
        for (k, z) in rec.zero_modes.iter().enumerate() {
            let residual = f.transpose().mul_vec(&z.components);
            out.push(CheckRecord::symbolic(
                "kernel-residual",
                format!("{tag}.level{}.mode{k}", rec.index),
                residual.iter().all(num_traits::Zero::is_zero),
            ));
        }
        if rec.f.dim() % 2 == 0 {
            let subject = format!("{tag}.level{}.f", rec.index);
            let det = numeric_oracle(
                Check::Determinant,
                Subject::Determinant { matrix: f, det: &rec.determinant },
                DETERMINANT_TRIALS,
                seed,
            );
            out.push(CheckRecord::numeric(subject, seed, DETERMINANT_TRIALS, det, Check::Determinant, t));
        }
    }
    if let (Some(bt), Some(rec)) = (r.brackets(), r.levels.last()) {
        let subject = format!("{tag}.level{}.inverse", rec.index);
        out.push(CheckRecord::symbolic(
            "inverse",
            subject.clone(),
            rec.f.entries.mul(&bt.entries).is_identity(),
        ));
        let inv = numeric_oracle(
            Check::Inverse,
            Subject::Inverse { f: &rec.f.entries, inverse: &bt.entries },
            INVERSE_TRIALS,
            seed,
        );
        out.push(CheckRecord::numeric(subject, seed, INVERSE_TRIALS, inv, Check::Inverse, t));
        table_checks(&format!("{tag}.brackets"), bt, seed, t, &mut out);
    }
    out
}

pub fn dirac_checks(d: &DiracReport, seed: u64) -> Vec<CheckRecord> {
    let t = &d.symbols;
    let mut out = vec![CheckRecord::symbolic(
        "antisymmetry",
        "dirac.matrix".into(),
        d.dirac_matrix.entries.is_antisymmetric(),
    )];
    table_checks("dirac.brackets", &d.table, seed, t, &mut out);
    out
}

/// Everything needed to assemble one report.
#[derive(Debug, Clone, Copy)]
pub struct ReportInput<'a> {
    pub model: &'a str,
    pub algorithm: &'a str,
    pub seed: u64,
    pub symplectic: Option<&'a AnalysisReport>,
    pub eom: Option<&'a EomStep>,
    pub dirac: Option<&'a DiracReport>,
    /// Verdict kind and message when the Dirac engine failed.
    pub dirac_error: Option<(&'a str, &'a str)>,
    pub comparison: Option<&'a Comparison>,
    pub checks: &'a [CheckRecord],
    pub warnings: &'a [String],
}

/// The symplectic section (when present) sits at the top level; a Dirac-only
/// run puts its own section there instead, otherwise it nests under `dirac`
/// with `classification` and `dirac_matrix` also lifted to the top.
pub fn build_report(inp: &ReportInput<'_>) -> Value {
    let mut top = Map::new();
    top.insert("schema_version".into(), json!(SCHEMA_VERSION));
    top.insert("model".into(), json!(inp.model));
    top.insert("algorithm".into(), json!(inp.algorithm));
    top.insert("seed".into(), json!(inp.seed));
    if let Some(r) = inp.symplectic {
        top.extend(symplectic_section(r));
        if let Some(step) = inp.eom {
            top.insert("eom".into(), eom_section(step, &r.final_model.symbols));
        }
    }
    match (inp.dirac, inp.dirac_error) {
        (Some(d), _) => {
            let sec = dirac_section(d);
            if inp.symplectic.is_some() {
                top.insert("classification".into(), sec["classification"].clone());
                top.insert("dirac_matrix".into(), sec["dirac_matrix"].clone());
                top.insert("dirac".into(), Value::Object(sec));
            } else {
                top.extend(sec);
                top.insert("levels".into(), json!([]));
            }
        }
        (None, Some((kind, message))) => {
            let v = json!({ "kind": kind, "message": message });
            if inp.symplectic.is_some() {
                top.insert("dirac".into(), json!({ "engine": "dirac", "verdict": v }));
            } else {
                top.insert("engine".into(), json!("dirac"));
                top.insert("verdict".into(), v);
            }
        }
        (None, None) => {}
    }
    if let (Some(c), Some(r)) = (inp.comparison, inp.symplectic) {
        top.insert("comparison".into(), comparison_section(c, &r.final_model.symbols));
    }
    top.insert("checks".into(), json!(inp.checks));
    let mut warnings: Vec<String> = top
        .get("warnings")
        .and_then(Value::as_array)
        .map(|a| a.iter().filter_map(|w| w.as_str().map(str::to_string)).collect())
        .unwrap_or_default();
    warnings.extend(inp.warnings.iter().cloned());
    top.insert("warnings".into(), json!(warnings));
    Value::Object(top)
}
