//! Side-by-side comparison of a Dirac analysis and a symplectic run.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::dirac::DiracReport;
use crate::modelspec::{ConstraintDecl, Origin};
use crate::symexpr::{proportional, Expr, SymbolKind};
use crate::symplectic::{weakly_zero, AnalysisReport};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChainStatus {
    /// Weakly zero modulo the other engine's chain.
    Matched(Option<String>),
    /// Vanishes once momenta outside the symplectic variables are replaced by
    /// their one-form components; carried by the kinetic sector.
    Absorbed,
    /// Involves Dirac variables absent from the symplectic set (Lagrange
    /// multipliers and their momenta).
    MultiplierSector,
    GaugeFixing,
    DiracOnly,
    SymplecticOnly,
}

impl ChainStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChainStatus::Matched(_) => "matched",
            ChainStatus::Absorbed => "absorbed",
            ChainStatus::MultiplierSector => "multiplier-sector",
            ChainStatus::GaugeFixing => "gauge-fixing",
            ChainStatus::DiracOnly => "dirac-only",
            ChainStatus::SymplecticOnly => "symplectic-only",
        }
    }

    pub fn is_difference(&self) -> bool {
        matches!(self, ChainStatus::DiracOnly | ChainStatus::SymplecticOnly)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    pub side: &'static str,
    pub label: String,
    /// Expression in symplectic variables (Dirac side after momentum mapping).
    pub expr: Expr,
    pub status: ChainStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableDifference {
    pub a: usize,
    pub b: usize,
    pub dirac: Expr,
    pub symplectic: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub chain: Vec<ChainRow>,
    /// Symbols present in both bracket tables, outside the multiplier sector.
    pub compared: Vec<usize>,
    /// `None` when the symplectic run produced no bracket table.
    pub table: Option<Vec<TableDifference>>,
}

impl Comparison {
    pub fn dirac_only(&self) -> Vec<&ChainRow> {
        self.rows(ChainStatus::DiracOnly)
    }

    pub fn symplectic_only(&self) -> Vec<&ChainRow> {
        self.rows(ChainStatus::SymplecticOnly)
    }

    fn rows(&self, s: ChainStatus) -> Vec<&ChainRow> {
        self.chain.iter().filter(|r| r.status == s).collect()
    }

    /// Number of chain or table differences.
    pub fn differences(&self) -> usize {
        self.chain.iter().filter(|r| r.status.is_difference()).count()
            + self.table.as_ref().map_or(0, Vec::len)
    }
}

/// Dirac momenta that are not symplectic variables, replaced by the one-form
/// component of their coordinate (zero when the coordinate is absent too).
fn momentum_map(d: &DiracReport, bw: &AnalysisReport) -> BTreeMap<usize, Expr> {
    let m = &bw.final_model;
    d.phase_space
        .pairs
        .iter()
        .filter(|p| !m.variables.contains(&p.momentum))
        .map(|p| {
            let a = m
                .position(p.coordinate)
                .map(|i| m.one_form[i].clone())
                .unwrap_or_else(Expr::zero);
            (p.momentum, a)
        })
        .collect()
}

pub fn compare(d: &DiracReport, bw: &AnalysisReport) -> Comparison {
    let m = &bw.final_model;
    let symbols = &m.symbols;
    let map = momentum_map(d, bw);
    let apply = |e: &Expr| e.substitute(&map).unwrap_or_else(|_| e.clone());
    let phase = m.phase_variables();
    let outside = |e: &Expr| e.vars().iter().any(|&s| symbols.is_variable(s) && !phase.contains(&s));

    // Dirac's chain lives on the sector where integration constants vanish.
    let constants: BTreeMap<usize, Expr> = (0..symbols.len())
        .filter(|&i| symbols.kind(i) == SymbolKind::IntegrationConstant)
        .map(|i| (i, Expr::zero()))
        .collect();
    let on_shell = |e: &Expr| e.substitute(&constants).unwrap_or_else(|_| e.clone());
    let bw_chain: Vec<ConstraintDecl> = bw
        .chain
        .iter()
        .filter(|c| c.origin != Origin::GaugeFixing)
        .map(|c| ConstraintDecl { expr: on_shell(&c.expr), ..c.clone() })
        .collect();
    let matches = |e: &Expr, chain: &[ConstraintDecl]| -> Option<Option<String>> {
        if let Some(c) = chain
            .iter()
            .find(|c| proportional(e, &c.expr, |s| symbols.is_variable(s)))
        {
            return Some(Some(c.label.clone()));
        }
        match weakly_zero(e, chain, &m.rewrites, symbols) {
            Ok(true) => Some(None),
            _ => None,
        }
    };

    let mut rows = Vec::new();
    let mut kept: Vec<ConstraintDecl> = Vec::new();
    for c in &d.chain.constraints {
        let e = apply(&c.expr);
        let status = if e.is_zero() {
            ChainStatus::Absorbed
        } else if outside(&e) {
            ChainStatus::MultiplierSector
        } else {
            kept.push(ConstraintDecl::new(c.label.clone(), e.clone(), c.origin));
            match matches(&e, &bw_chain) {
                Some(with) => ChainStatus::Matched(with),
                None => ChainStatus::DiracOnly,
            }
        };
        rows.push(ChainRow {
            side: "dirac",
            label: c.label.clone(),
            expr: e,
            status,
        });
    }
    for c in &bw.chain {
        let status = if c.origin == Origin::GaugeFixing {
            ChainStatus::GaugeFixing
        } else {
            match matches(&on_shell(&c.expr), &kept) {
                Some(with) => ChainStatus::Matched(with),
                None => ChainStatus::SymplecticOnly,
            }
        };
        rows.push(ChainRow {
            side: "symplectic",
            label: c.label.clone(),
            expr: c.expr.clone(),
            status,
        });
    }

    let compared: Vec<usize> = d
        .table
        .basis
        .iter()
        .copied()
        .filter(|s| phase.contains(s))
        .collect();
    let table = bw.brackets().map(|bt| {
        let mut out = Vec::new();
        for (i, &a) in compared.iter().enumerate() {
            for &b in &compared[i + 1..] {
                let (Some(x), Some(y)) = (d.table.get(a, b), bt.get(a, b)) else {
                    continue;
                };
                let x = apply(x);
                if x != *y {
                    out.push(TableDifference {
                        a,
                        b,
                        dirac: x,
                        symplectic: y.clone(),
                    });
                }
            }
        }
        out
    });
    Comparison {
        chain: rows,
        compared,
        table,
    }
}
