//! Model files: symplectic variables, one-form, potential and constraints.

mod parse;
mod print;

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::symexpr::{proportional, Expr, ExprError, RewriteSystem, SymbolKind, SymbolTable};

pub use parse::{parse_model, parse_model_with};
pub use print::pretty_print;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ExprError,
    },
    #[error("line {line}: duplicate label '{label}'")]
    DuplicateLabel { line: usize, label: String },
    #[error("line {line}: range bound '{bound}' is not a concrete integer")]
    NonConcreteRange { line: usize, bound: String },
    #[error("constraint '{0}' is identically zero")]
    ZeroConstraint(String),
    #[error("constraint '{label}' is proportional to '{existing}'")]
    DuplicateConstraint { label: String, existing: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Primary,
    AdHoc,
    ZeroMode(usize),
    EomDerived,
    GaugeFixing,
    /// Secondary constraint from Dirac's consistency conditions.
    Secondary(usize),
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Primary => f.write_str("primary"),
            Origin::AdHoc => f.write_str("ad-hoc"),
            Origin::ZeroMode(k) => write!(f, "zero-mode({k})"),
            Origin::EomDerived => f.write_str("eom-derived"),
            Origin::GaugeFixing => f.write_str("gauge-fixing"),
            Origin::Secondary(k) => write!(f, "secondary({k})"),
        }
    }
}

impl Serialize for Origin {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Origin {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "primary" => Origin::Primary,
            "ad-hoc" => Origin::AdHoc,
            "eom-derived" => Origin::EomDerived,
            "gauge-fixing" => Origin::GaugeFixing,
            _ => {
                let inner = s.strip_prefix("zero-mode(")?.strip_suffix(')')?;
                Origin::ZeroMode(inner.trim().parse().ok()?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintDecl {
    pub label: String,
    pub expr: Expr,
    pub origin: Origin,
    pub solved_for: Option<usize>,
    /// Name of the velocity multiplier carrying the constraint.
    pub multiplier: Option<String>,
}

impl ConstraintDecl {
    pub fn new(label: impl Into<String>, expr: Expr, origin: Origin) -> Self {
        Self {
            label: label.into(),
            expr,
            origin,
            solved_for: None,
            multiplier: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub max_level: usize,
    pub multiplier_prefix: String,
    /// Parameter playing the role of explicit time in gauge conditions.
    pub time: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_level: 10,
            multiplier_prefix: "eta".into(),
            time: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairDecl {
    pub coordinate: usize,
    pub velocity: Option<usize>,
    pub momentum: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiracSource {
    Lagrangian(Expr),
    Hamiltonian {
        hamiltonian: Expr,
        primaries: Vec<ConstraintDecl>,
    },
}

/// Second-order description used by the Dirac engine.
#[derive(Debug, Clone, PartialEq)]
pub struct DiracSpec {
    pub pairs: Vec<PairDecl>,
    pub source: DiracSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: String,
    pub symbols: SymbolTable,
    pub constants: BTreeMap<String, i64>,
    pub parameters: Vec<usize>,
    /// Symplectic variables ξ in order.
    pub variables: Vec<usize>,
    /// A_α for each entry of `variables`.
    pub one_form: Vec<Expr>,
    pub potential: Expr,
    /// Constraints carried in the kinetic sector, in injection order.
    pub chain: Vec<ConstraintDecl>,
    /// Gauge conditions awaiting a symmetry verdict.
    pub pending: Vec<ConstraintDecl>,
    pub rewrites: RewriteSystem,
    pub options: Options,
    pub dirac: Option<DiracSpec>,
    pub(crate) declared_vars: usize,
    pub(crate) declared: Vec<ConstraintDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub invariant: String,
    pub location: String,
    pub message: String,
}

impl Model {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn position(&self, sym: usize) -> Option<usize> {
        self.variables.iter().position(|&v| v == sym)
    }

    pub fn sym(&self, name: &str) -> Option<usize> {
        self.symbols.lookup(name)
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .map(|&v| self.symbols.name(v).to_string())
            .collect()
    }

    pub fn is_multiplier(&self, sym: usize) -> bool {
        self.symbols.kind(sym) == SymbolKind::Multiplier
    }

    /// Variables that are not velocity multipliers.
    pub fn phase_variables(&self) -> Vec<usize> {
        self.variables
            .iter()
            .copied()
            .filter(|&v| !self.is_multiplier(v))
            .collect()
    }

    pub fn parse_expr(&self, text: &str) -> Result<Expr, ExprError> {
        let mut env = crate::symexpr::Env {
            constants: self.constants.clone().into_iter().collect(),
            ..Default::default()
        };
        crate::symexpr::parse_expr_in(text, &self.symbols, &mut env, 1)
    }

    pub fn fresh_label(&self, prefix: &str) -> String {
        let taken = |l: &str| {
            self.chain
                .iter()
                .chain(self.pending.iter())
                .any(|c| c.label == l)
        };
        (1..)
            .map(|k| format!("{prefix}{k}"))
            .find(|l| !taken(l))
            .expect("unbounded labels")
    }
}

/// Every invariant violation, or an empty list.
pub fn validate_model(m: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut diag = |invariant: &str, location: String, message: String| {
        out.push(Diagnostic {
            invariant: invariant.into(),
            location,
            message,
        })
    };
    if m.variables.len() != m.one_form.len() {
        diag(
            "one-form-length",
            "[one_form]".into(),
            format!(
                "{} variables but {} one-form components",
                m.variables.len(),
                m.one_form.len()
            ),
        );
    }
    let allowed = |s: usize| {
        m.symbols.kind(s).is_coefficient()
            || m.variables.contains(&s)
            || m.symbols.kind(s) == SymbolKind::Defined
    };
    for (i, a) in m.one_form.iter().enumerate() {
        for s in a.vars() {
            if !allowed(s) {
                diag(
                    "declared-symbols",
                    format!("[one_form] {}", m.symbols.name(m.variables[i])),
                    format!("'{}' is not a symplectic variable", m.symbols.name(s)),
                );
            }
        }
    }
    for s in m.potential.vars() {
        if !allowed(s) {
            diag(
                "declared-symbols",
                "[potential]".into(),
                format!("'{}' is not a symplectic variable", m.symbols.name(s)),
            );
        } else if m.symbols.kind(s) == SymbolKind::Multiplier {
            diag(
                "multiplier-kinetic-only",
                "[potential]".into(),
                format!("multiplier '{}' appears in the potential", m.symbols.name(s)),
            );
        }
    }
    for c in m.chain.iter().chain(m.pending.iter()) {
        let loc = format!("[constraints] {}", c.label);
        if c.expr.is_zero() {
            diag("nonzero-constraint", loc.clone(), "constraint is zero".into());
        }
        if let Some(s) = c.solved_for {
            let name = m.symbols.name(s);
            let deg = c.expr.numer().degree_in(s);
            if c.expr.denom().contains_var(s) || !(1..=2).contains(&deg) {
                diag(
                    "solvable-for",
                    loc,
                    format!("cannot solve for '{name}' linearly or quadratically"),
                );
            }
        }
    }
    out
}

/// Injects `c` into the kinetic sector through a fresh velocity multiplier.
pub fn extend_with_constraint(m: &Model, c: ConstraintDecl) -> Result<Model, ModelError> {
    if c.expr.is_zero() {
        return Err(ModelError::ZeroConstraint(c.label));
    }
    let is_var = |i: usize| m.symbols.is_variable(i);
    if let Some(existing) = m
        .chain
        .iter()
        .find(|e| proportional(&e.expr, &c.expr, is_var))
    {
        return Err(ModelError::DuplicateConstraint {
            label: c.label,
            existing: existing.label.clone(),
        });
    }
    let mut out = m.clone();
    let sym = match &c.multiplier {
        Some(name) => out
            .symbols
            .ensure(name, SymbolKind::Multiplier)
            .map_err(|e| ModelError::Invalid(e.to_string()))?,
        None => out.symbols.fresh(&m.options.multiplier_prefix, SymbolKind::Multiplier),
    };
    if out.variables.contains(&sym) {
        return Err(ModelError::Invalid(format!(
            "multiplier '{}' is already a symplectic variable",
            out.symbols.name(sym)
        )));
    }
    out.variables.push(sym);
    out.one_form.push(c.expr.clone());
    let mut c = c;
    c.multiplier = Some(out.symbols.name(sym).to_string());
    out.chain.push(c);
    Ok(out)
}
