use num_traits::Zero;

use super::{
    build_f, contraction, determinant, eliminate, factor_hints, invert, is_new_constraint,
    kernel_basis, normalize_constraint, strongly_impose, weakly_zero,
    SymplecticMatrix, ZeroMode,
};
use crate::brackets::BracketTable;
use crate::modelspec::{extend_with_constraint, ConstraintDecl, Model, ModelError, Origin};
use crate::symexpr::{expr_to_string, poly_to_string, Expr, RewriteRule, RewriteSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Constraints reduce the potential as soon as they appear.
    ClassicBw,
    /// Constraints enter only the kinetic sector until the final level.
    ModifiedBw,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::ClassicBw => "bw",
            Algorithm::ModifiedBw => "mbw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub max_level: usize,
}

impl RunOptions {
    pub fn from_model(m: &Model) -> Self {
        Self {
            max_level: m.options.max_level,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub mode: usize,
    pub contraction: Expr,
    /// Normalized new constraint, when the contraction is not weakly zero.
    pub constraint: Option<Expr>,
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disposition {
    Nonsingular,
    NewConstraints(Vec<String>),
    GaugeFixing(Vec<String>),
    Symmetry,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRecord {
    pub index: usize,
    /// Number of constraints carried in the kinetic sector.
    pub injected: usize,
    pub variables: Vec<usize>,
    pub one_form: Vec<Expr>,
    pub potential: Expr,
    pub f: SymplecticMatrix,
    pub determinant: Expr,
    pub zero_modes: Vec<ZeroMode>,
    pub candidates: Vec<Candidate>,
    pub disposition: Disposition,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Brackets {
        table: BracketTable,
        hamiltonian: Option<Expr>,
        solutions: Vec<(usize, Expr)>,
        rules: Vec<RewriteRule>,
        rewrites: RewriteSystem,
    },
    Symmetry {
        generator: ZeroMode,
        variables: Vec<usize>,
        delta_v: Expr,
    },
    LevelLimit,
    Inconsistent {
        value: Expr,
    },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Brackets { .. } => "brackets",
            Verdict::Symmetry { .. } => "symmetry",
            Verdict::LevelLimit => "level-limit",
            Verdict::Inconsistent { .. } => "inconsistent",
        }
    }

    pub fn is_terminal_success(&self) -> bool {
        matches!(self, Verdict::Brackets { .. } | Verdict::Symmetry { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisReport {
    pub algorithm: Algorithm,
    pub model_name: String,
    pub levels: Vec<LevelRecord>,
    pub verdict: Verdict,
    pub chain: Vec<ConstraintDecl>,
    /// Model at the last level; its symbol table covers every report entry.
    pub final_model: Model,
    pub warnings: Vec<String>,
}

impl AnalysisReport {
    pub fn brackets(&self) -> Option<&BracketTable> {
        match &self.verdict {
            Verdict::Brackets { table, .. } => Some(table),
            _ => None,
        }
    }

    pub fn hamiltonian(&self) -> Option<&Expr> {
        match &self.verdict {
            Verdict::Brackets { hamiltonian, .. } => hamiltonian.as_ref(),
            _ => None,
        }
    }

    pub fn last_level(&self) -> &LevelRecord {
        self.levels.last().expect("a run records at least one level")
    }
}

pub fn run_modified_bw(m: &Model, opts: &RunOptions) -> AnalysisReport {
    run(m, opts, Algorithm::ModifiedBw, 0)
}

pub fn run_classic_bw(m: &Model, opts: &RunOptions) -> AnalysisReport {
    run(m, opts, Algorithm::ClassicBw, 0)
}

/// Continues a finished run after injecting `c` into its final model. Level
/// indices continue from `prev`, and `opts.max_level` bounds the total.
pub fn resume_with(prev: &AnalysisReport, c: ConstraintDecl, opts: &RunOptions) -> Result<AnalysisReport, ModelError> {
    let label = c.label.clone();
    let model = extend_with_constraint(&prev.final_model, c)?;
    let done = prev.levels.len();
    let rest = RunOptions {
        max_level: opts.max_level.saturating_sub(done).max(1),
    };
    let mut next = run(&model, &rest, prev.algorithm, done);
    let mut levels = prev.levels.clone();
    levels.append(&mut next.levels);
    let mut warnings = prev.warnings.clone();
    warnings.push(format!("level {done}: {label} injected from the equations of motion"));
    warnings.append(&mut next.warnings);
    next.levels = levels;
    next.warnings = warnings;
    Ok(next)
}

fn run(m: &Model, opts: &RunOptions, algo: Algorithm, offset: usize) -> AnalysisReport {
    let mut model = m.clone();
    let mut levels = Vec::new();
    let mut warnings = Vec::new();
    let max = opts.max_level.max(1);
    let verdict = loop {
        if levels.len() >= max {
            break Verdict::LevelLimit;
        }
        let index = offset + levels.len();
        let f = build_f(&model);
        let det = determinant(&f);
        let mut rec = LevelRecord {
            index,
            injected: model.chain.len(),
            variables: model.variables.clone(),
            one_form: model.one_form.clone(),
            potential: model.potential.clone(),
            f: f.clone(),
            determinant: det.clone(),
            zero_modes: Vec::new(),
            candidates: Vec::new(),
            disposition: Disposition::Nonsingular,
        };

        if !det.is_zero() {
            if !det.numer().is_constant() {
                warnings.push(determinant_warning(index, &det, &model));
            }
            let inv = invert(&f).expect("nonzero determinant");
            let table = BracketTable::new(model.variables.clone(), inv);
            let chain = model.chain.clone();
            let verdict = match strongly_impose(&model, &chain) {
                Ok(imp) => Verdict::Brackets {
                    table,
                    hamiltonian: Some(imp.hamiltonian),
                    solutions: imp.solutions,
                    rules: imp.rules,
                    rewrites: imp.model.rewrites,
                },
                Err(e) => {
                    warnings.push(format!("strong imposition failed: {e}"));
                    Verdict::Brackets {
                        table,
                        hamiltonian: None,
                        solutions: Vec::new(),
                        rules: Vec::new(),
                        rewrites: model.rewrites.clone(),
                    }
                }
            };
            levels.push(rec);
            break verdict;
        }

        let modes = kernel_basis(&f);
        let mut fresh: Vec<ConstraintDecl> = Vec::new();
        let mut symmetric: Option<usize> = None;
        let mut inconsistent: Option<Expr> = None;
        for (k, nu) in modes.iter().enumerate() {
            let raw = model.rewrites.reduce(&contraction(nu, &model));
            let mut cand = Candidate {
                mode: k,
                contraction: raw.clone(),
                constraint: None,
                label: None,
            };
            let weak = match weakly_zero(&raw, &model.chain, &model.rewrites, &model.symbols) {
                Ok(w) => w,
                Err(e) => {
                    warnings.push(format!("level {index}: {e}"));
                    false
                }
            };
            if weak {
                symmetric.get_or_insert(k);
            } else if raw.constant_value().is_some() {
                inconsistent.get_or_insert(raw.clone());
            } else {
                let c = normalize_constraint(&raw);
                let novel = is_new_constraint(&c, &fresh, &model.rewrites, &model.symbols)
                    .unwrap_or(true);
                if novel {
                    let label = fresh_label(&model, &fresh);
                    cand.label = Some(label.clone());
                    fresh.push(ConstraintDecl::new(label, c.clone(), Origin::ZeroMode(index)));
                }
                cand.constraint = Some(c);
            }
            rec.candidates.push(cand);
        }
        rec.zero_modes = modes.clone();

        if let Some(value) = inconsistent {
            rec.disposition = Disposition::Inconsistent;
            levels.push(rec);
            warnings.push(format!(
                "level {index}: zero-mode contraction is the nonzero constant {}",
                expr_to_string(&value, &model.symbols)
            ));
            break Verdict::Inconsistent { value };
        }

        if !fresh.is_empty() {
            rec.disposition =
                Disposition::NewConstraints(fresh.iter().map(|c| c.label.clone()).collect());
            levels.push(rec);
            for c in fresh {
                if algo == Algorithm::ClassicBw {
                    match eliminate(&model.potential, &c, &model) {
                        Ok(v) => model.potential = v,
                        Err(e) => warnings.push(format!("level {index}: {e}")),
                    }
                }
                model = match extend_with_constraint(&model, c) {
                    Ok(next) => next,
                    Err(e) => {
                        warnings.push(format!("level {index}: {e}"));
                        return finish(algo, m, levels, Verdict::LevelLimit, model, warnings);
                    }
                };
            }
            continue;
        }

        if !model.pending.is_empty() {
            let pending = std::mem::take(&mut model.pending);
            rec.disposition =
                Disposition::GaugeFixing(pending.iter().map(|c| c.label.clone()).collect());
            levels.push(rec);
            for c in pending {
                if algo == Algorithm::ClassicBw {
                    if let Ok(v) = eliminate(&model.potential, &c, &model) {
                        model.potential = v;
                    }
                }
                match extend_with_constraint(&model, c) {
                    Ok(next) => model = next,
                    Err(e) => warnings.push(format!("level {index}: {e}")),
                }
            }
            continue;
        }

        rec.disposition = Disposition::Symmetry;
        levels.push(rec);
        let k = symmetric.unwrap_or(0);
        let generator = modes[k].clone();
        let delta_v = contraction(&generator, &model);
        break Verdict::Symmetry {
            generator,
            variables: model.variables.clone(),
            delta_v,
        };
    };
    finish(algo, m, levels, verdict, model, warnings)
}

fn finish(
    algorithm: Algorithm,
    m: &Model,
    levels: Vec<LevelRecord>,
    verdict: Verdict,
    model: Model,
    warnings: Vec<String>,
) -> AnalysisReport {
    AnalysisReport {
        algorithm,
        model_name: m.name.clone(),
        levels,
        verdict,
        chain: model.chain.clone(),
        final_model: model,
        warnings,
    }
}

fn fresh_label(model: &Model, batch: &[ConstraintDecl]) -> String {
    (1..)
        .map(|k| format!("Omega{k}"))
        .find(|l| {
            !model.chain.iter().chain(&model.pending).chain(batch).any(|c| &c.label == l)
        })
        .expect("unbounded labels")
}

fn determinant_warning(level: usize, det: &Expr, m: &Model) -> String {
    let factors: Vec<String> = factor_hints(det.numer())
        .into_iter()
        .map(|(p, k)| {
            let s = poly_to_string(&p, &m.symbols);
            if k > 1 {
                format!("({s})^{k}")
            } else {
                format!("({s})")
            }
        })
        .collect();
    format!(
        "level {level}: determinant {} vanishes where a factor does: {}",
        expr_to_string(det, &m.symbols),
        factors.join(", ")
    )
}

