use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use bwcore::compare::{compare, Comparison};
use bwcore::dirac::{run_dirac, DiracError, DiracReport};
use bwcore::dynamics::{eom_pipeline, DynamicsError, EomStep};
use bwcore::modelspec::{parse_model_with, validate_model, Model};
use bwcore::report::{build_report, dirac_checks, symplectic_checks, ReportInput};
use bwcore::symexpr::expr_to_string;
use bwcore::symplectic::{run_classic_bw, run_modified_bw, AnalysisReport, RunOptions, Verdict};
use bwcore::Expr;
use serde_json::Value;

use crate::{text, Algo, Cli, Output};

fn parse_overrides(raw: &[String]) -> Result<BTreeMap<String, i64>> {
    raw.iter()
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects K=V, got '{kv}'"))?;
            let v: i64 = v.trim().parse().with_context(|| format!("--set {kv}: not an integer"))?;
            Ok((k.trim().to_string(), v))
        })
        .collect()
}

fn load(cli: &Cli) -> Result<Model> {
    let path = &cli.model;
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let overrides = parse_overrides(&cli.overrides)?;
    let model = parse_model_with(&text, &overrides).with_context(|| path.display().to_string())?;
    let diags = validate_model(&model);
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("{}: {}: {} [{}]", path.display(), d.location, d.message, d.invariant);
        }
        bail!("{} failed validation with {} diagnostic(s)", path.display(), diags.len());
    }
    Ok(model)
}

/// Default location of the JSON report next to the model file.
pub fn default_report_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    model.with_file_name(format!("{stem}.report.json"))
}

fn dirac_kind(e: &DiracError) -> &'static str {
    match e {
        DiracError::Inconsistent(_) => "inconsistent",
        DiracError::LevelLimit(_) => "level-limit",
        _ => "error",
    }
}

fn candidates(c: &Comparison) -> Vec<(String, Expr)> {
    c.dirac_only().iter().map(|r| (r.label.clone(), r.expr.clone())).collect()
}

fn chain_warnings(c: &Comparison, r: &AnalysisReport, out: &mut Vec<String>) {
    let t = &r.final_model.symbols;
    let tag = r.algorithm.tag();
    for row in c.dirac_only() {
        out.push(format!(
            "constraint {} = {} of the Dirac chain is not generated by {tag}",
            row.label,
            expr_to_string(&row.expr, t)
        ));
    }
    for row in c.symplectic_only() {
        out.push(format!("constraint {} of the {tag} chain has no Dirac counterpart", row.label));
    }
}

struct Outcome {
    symplectic: Option<AnalysisReport>,
    eom: Option<EomStep>,
    dirac: Option<Result<DiracReport, DiracError>>,
    comparison: Option<Comparison>,
    warnings: Vec<String>,
}

fn analyse(cli: &Cli, model: &Model, opts: &RunOptions) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let symplectic = match cli.algo {
        Algo::Bw => Some(run_classic_bw(model, opts)),
        Algo::Mbw | Algo::Compare => Some(run_modified_bw(model, opts)),
        Algo::Dirac => None,
    };
    let dirac = match (&model.dirac, cli.algo) {
        (Some(_), _) => Some(run_dirac(model, opts.max_level)),
        (None, Algo::Dirac | Algo::Compare) => bail!("{}: model has no [dirac] section", cli.model.display()),
        (None, _) => None,
    };
    if let Some(Err(e)) = &dirac {
        match (cli.algo, e) {
            (Algo::Dirac, DiracError::Inconsistent(_) | DiracError::LevelLimit(_)) => {}
            (Algo::Dirac | Algo::Compare, _) => bail!("dirac: {e}"),
            _ => warnings.push(format!("dirac cross-check failed: {e}")),
        }
    }
    let Some(mut sym) = symplectic else {
        return Ok(Outcome { symplectic: None, eom: None, dirac, comparison: None, warnings });
    };
    let compare_with = |r: &AnalysisReport| match &dirac {
        Some(Ok(d)) => Some(compare(d, r)),
        _ => None,
    };
    let mut comparison = compare_with(&sym);
    let mut eom = None;
    if cli.eom_constraints {
        let cands = comparison.as_ref().map(candidates).unwrap_or_default();
        if !matches!(sym.verdict, Verdict::Brackets { .. }) {
            warnings.push(format!("eom: the {} verdict is {}; nothing to promote", sym.algorithm.tag(), sym.verdict.kind()));
        } else if cands.is_empty() && cli.promote.is_none() {
            warnings.push("eom: the Dirac chain adds no constraint; nothing promoted".into());
        } else {
            match eom_pipeline(&sym, &cands, cli.degree, cli.promote.as_deref(), opts) {
                Ok((next, step)) => {
                    if step.promotion.is_none() {
                        warnings.push(format!("eom: no conserved quantity of degree {}", cli.degree));
                    }
                    sym = next;
                    comparison = compare_with(&sym);
                    eom = Some(step);
                }
                Err(e @ (DynamicsError::UnknownPromotion(_) | DynamicsError::NotConserved(_))) => {
                    bail!("--promote: {e}")
                }
                Err(e) => warnings.push(format!("eom: {e}")),
            }
        }
    } else if cli.promote.is_some() {
        warnings.push("--promote has no effect without --eom-constraints".into());
    }
    if let Some(c) = &comparison {
        chain_warnings(c, &sym, &mut warnings);
    }
    Ok(Outcome { symplectic: Some(sym), eom, dirac, comparison, warnings })
}

fn exit_code(o: &Outcome) -> u8 {
    let bad_dirac = matches!(
        &o.dirac,
        Some(Err(DiracError::Inconsistent(_) | DiracError::LevelLimit(_)))
    );
    match &o.symplectic {
        Some(r) if !r.verdict.is_terminal_success() => 2,
        None if bad_dirac => 2,
        _ => 0,
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let model = load(cli)?;
    let max_level = cli.max_level.map_or(model.options.max_level, |n| n as usize);
    let opts = RunOptions { max_level };
    let o = analyse(cli, &model, &opts)?;

    let mut checks = Vec::new();
    if let Some(r) = &o.symplectic {
        checks.extend(symplectic_checks(r, cli.seed));
    }
    if let Some(Ok(d)) = &o.dirac {
        checks.extend(dirac_checks(d, cli.seed));
    }
    let mut warnings = o.warnings.clone();
    for c in checks.iter().filter(|c| !c.passed) {
        warnings.push(format!("check {} on {} failed", c.check, c.subject));
    }
    let dirac_error = match &o.dirac {
        Some(Err(e)) => Some((dirac_kind(e), e.to_string())),
        _ => None,
    };
    let algorithm = match cli.algo {
        Algo::Dirac => "dirac",
        Algo::Bw => "bw",
        Algo::Mbw => "mbw",
        Algo::Compare => "compare",
    };
    let report = build_report(&ReportInput {
        model: &model.name,
        algorithm,
        seed: cli.seed,
        symplectic: o.symplectic.as_ref(),
        eom: o.eom.as_ref(),
        dirac: o.dirac.as_ref().and_then(|d| d.as_ref().ok()),
        dirac_error: dirac_error.as_ref().map(|(k, m)| (*k, m.as_str())),
        comparison: o.comparison.as_ref(),
        checks: &checks,
        warnings: &warnings,
    });
    emit(cli, &report)?;
    for w in report["warnings"].as_array().into_iter().flatten().filter_map(Value::as_str) {
        eprintln!("warning: {w}");
    }
    Ok(exit_code(&o))
}

fn emit(cli: &Cli, report: &Value) -> Result<()> {
    let json = format!("{}\n", serde_json::to_string_pretty(report)?);
    match cli.output {
        Output::Text => print!("{}", text::render(report)),
        Output::Json => print!("{json}"),
        Output::Both => {
            print!("{}", text::render(report));
            let path = default_report_path(&cli.model);
            fs::write(&path, &json).with_context(|| format!("cannot write {}", path.display()))?;
        }
    }
    if let Some(path) = &cli.json {
        fs::write(path, &json).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(())
}
