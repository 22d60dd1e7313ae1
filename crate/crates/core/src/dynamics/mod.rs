//! Equations of motion from a bracket table, conserved-quantity search and
//! symmetry reports.

mod oracle;
mod pipeline;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::brackets::BracketTable;
use crate::linalg::{kernel_expr, rank_expr, rref, Matrix};
use crate::modelspec::{ConstraintDecl, Model, Origin};
use crate::symexpr::{lcm, Expr, Monomial, Poly, SymbolKind};
use crate::symplectic::{contraction, normalize_constraint, ZeroMode};

pub use oracle::{numeric_oracle, random_point, Check, OracleError, OracleOutcome, Subject};
pub use pipeline::{eom_pipeline, select_promotion, EomStep, Promotion};

/// Largest ansatz accepted by [`conserved_search`].
pub const COEFFICIENT_CAP: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DynamicsError {
    #[error("ansatz degree must be at least 1")]
    Degree,
    #[error("ansatz needs {count} coefficients, above the cap of {cap}")]
    AnsatzTooLarge { count: usize, cap: usize },
    #[error("cannot promote a constant quantity")]
    ConstantQuantity,
    #[error("the run did not end with a bracket table")]
    NoBrackets,
    #[error("no conserved quantity or constraint named '{0}'")]
    UnknownPromotion(String),
    #[error("{0} is not conserved at the searched degree")]
    NotConserved(String),
    #[error("{0}")]
    Model(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionSystem {
    pub basis: Vec<usize>,
    /// `ż` for each basis symbol, in basis order.
    pub rhs: Vec<(usize, Expr)>,
    pub hamiltonian: Expr,
}

impl MotionSystem {
    pub fn rate(&self, sym: usize) -> Option<&Expr> {
        self.rhs.iter().find(|(s, _)| *s == sym).map(|(_, e)| e)
    }

    /// `Q̇ = Σ ∂Q/∂z ż`.
    pub fn time_derivative(&self, q: &Expr) -> Expr {
        self.rhs
            .iter()
            .filter(|(_, r)| !r.is_zero())
            .fold(Expr::zero(), |acc, (z, r)| {
                let d = q.derivative(*z);
                if d.is_zero() {
                    acc
                } else {
                    &acc + &(&d * r)
                }
            })
    }
}

/// `ż = {z, H}` under `bt`.
pub fn hamilton_equations(bt: &BracketTable, h: &Expr) -> MotionSystem {
    let rhs = bt
        .basis
        .iter()
        .map(|&z| (z, bt.bracket(&Expr::var(z), h)))
        .collect();
    MotionSystem {
        basis: bt.basis.clone(),
        rhs,
        hamiltonian: h.clone(),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Monomials in `vars` of total degree `1..=degree`, highest degree first.
fn ansatz(vars: &[usize], degree: u32) -> Vec<Monomial> {
    let mut by_degree: Vec<Vec<Monomial>> = vec![vec![Monomial::one()]];
    for d in 1..=degree as usize {
        let mut next = Vec::new();
        for m in &by_degree[d - 1] {
            // Extend only with variables at or after the last one used, so each
            // power product appears once.
            let last = vars
                .iter()
                .rposition(|&v| m.exp(v) > 0)
                .unwrap_or(0);
            for &v in &vars[last..] {
                next.push(m.mul(&Monomial::var(v, 1)));
            }
        }
        by_degree.push(next);
    }
    by_degree.into_iter().skip(1).rev().flatten().collect()
}

/// Splits `p` by its power products in `keep`, returning the coefficient of
/// each as a polynomial in the remaining symbols.
fn split_by(p: &Poly, keep: &dyn Fn(usize) -> bool) -> BTreeMap<Monomial, Poly> {
    let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let inner = m.restrict(keep);
        let outer = m.restrict(|s| !keep(s));
        out.entry(inner)
            .or_insert_with(Poly::zero)
            .add_term(outer, c.clone());
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Basis of the polynomial conserved quantities of total degree at most
/// `degree` (constants excluded), lowest degree first.
pub fn conserved_search(ms: &MotionSystem, degree: u32) -> Result<Vec<Expr>, DynamicsError> {
    if degree == 0 {
        return Err(DynamicsError::Degree);
    }
    let n = ms.basis.len();
    let count = binomial(n + degree as usize, degree as usize) - 1;
    if count > COEFFICIENT_CAP {
        return Err(DynamicsError::AnsatzTooLarge {
            count,
            cap: COEFFICIENT_CAP,
        });
    }
    let cols = ansatz(&ms.basis, degree);
    let rates: Vec<Expr> = cols
        .iter()
        .map(|m| ms.time_derivative(&Expr::from_poly(Poly::term(One::one(), m.clone()))))
        .collect();
    let common = rates
        .iter()
        .fold(Poly::one(), |acc, r| if r.denom().is_constant() { acc } else { lcm(&acc, r.denom()) });
    let in_basis = |s: usize| ms.basis.contains(&s);
    let split: Vec<BTreeMap<Monomial, Poly>> = rates
        .iter()
        .map(|r| {
            let scaled = r.numer() * &common.div_exact(r.denom()).expect("lcm is a multiple");
            split_by(&scaled, &in_basis)
        })
        .collect();
    let mut rows: Vec<Monomial> = split.iter().flat_map(|s| s.keys().cloned()).collect();
    rows.sort();
    rows.dedup();
    if rows.is_empty() {
        return Ok(cols
            .iter()
            .rev()
            .map(|m| Expr::from_poly(Poly::term(One::one(), m.clone())))
            .collect());
    }
    let system = Matrix::from_fn(rows.len(), cols.len(), |i, j| {
        split[j]
            .get(&rows[i])
            .map(|c| Expr::from_poly(c.clone()))
            .unwrap_or_else(Expr::zero)
    });
    let kernel = kernel_expr(&system);
    if kernel.is_empty() {
        return Ok(Vec::new());
    }
    // Echelon form with the highest-degree columns first leaves the
    // low-degree quantities as separate rows at the bottom.
    let mut k = Matrix::from_rows(kernel);
    let pivots = rref(&mut k);
    let mut out: Vec<Expr> = (0..pivots.len())
        .map(|r| {
            let q = (0..cols.len())
                .filter(|&j| !k[(r, j)].is_zero())
                .fold(Expr::zero(), |acc, j| {
                    &acc + &(&k[(r, j)] * &Expr::from_poly(Poly::term(One::one(), cols[j].clone())))
                });
            normalize_constraint(&q)
        })
        .collect();
    out.reverse();
    Ok(out)
}

/// Whether `q` is a coefficient-field combination of `span`, comparing
/// power products in `vars`.
pub fn in_span(q: &Expr, span: &[Expr], vars: &[usize]) -> bool {
    let keep = |s: usize| vars.contains(&s);
    let coords = |e: &Expr| -> Option<BTreeMap<Monomial, Expr>> {
        if e.denom().vars().iter().any(|&s| keep(s)) {
            return None;
        }
        Some(
            split_by(e.numer(), &keep)
                .into_iter()
                .map(|(m, c)| (m, Expr::new(c, e.denom().clone()).expect("nonzero denominator")))
                .collect(),
        )
    };
    let Some(target) = coords(q) else {
        return false;
    };
    let Some(rows) = span.iter().map(coords).collect::<Option<Vec<_>>>() else {
        return false;
    };
    let mut monomials: Vec<Monomial> = target
        .keys()
        .chain(rows.iter().flat_map(|r| r.keys()))
        .cloned()
        .collect();
    monomials.sort();
    monomials.dedup();
    let build = |rs: &[&BTreeMap<Monomial, Expr>]| {
        Matrix::from_fn(rs.len(), monomials.len(), |i, j| {
            rs[i].get(&monomials[j]).cloned().unwrap_or_else(Expr::zero)
        })
    };
    let base: Vec<&BTreeMap<Monomial, Expr>> = rows.iter().collect();
    let mut with = base.clone();
    with.push(&target);
    let r0 = if base.is_empty() { 0 } else { rank_expr(&build(&base)) };
    r0 == rank_expr(&build(&with))
}

/// `Q − κ` with a fresh integration constant `κ`, carried by a fresh
/// multiplier once injected.
pub fn promote_to_constraint(q: &Expr, m: &mut Model) -> Result<ConstraintDecl, DynamicsError> {
    if q.vars().iter().all(|&s| !m.symbols.is_variable(s)) {
        return Err(DynamicsError::ConstantQuantity);
    }
    let kappa = m.symbols.fresh("kappa", SymbolKind::IntegrationConstant);
    let label = m.fresh_label("Gamma");
    Ok(ConstraintDecl::new(
        label,
        q - &Expr::var(kappa),
        Origin::EomDerived,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReport {
    /// `δξ / ε` for each symplectic variable.
    pub variations: Vec<(usize, Expr)>,
    /// `δV / ε`.
    pub delta_v: Expr,
}

impl SymmetryReport {
    pub fn scaled(&self, k: &Expr) -> Self {
        Self {
            variations: self.variations.iter().map(|(s, e)| (*s, e * k)).collect(),
            delta_v: &self.delta_v * k,
        }
    }

    pub fn variation(&self, sym: usize) -> Option<&Expr> {
        self.variations.iter().find(|(s, _)| *s == sym).map(|(_, e)| e)
    }
}

/// `δξ = ε ν` and the induced change of the potential.
pub fn symmetry_report(nu: &ZeroMode, m: &Model) -> SymmetryReport {
    SymmetryReport {
        variations: m
            .variables
            .iter()
            .copied()
            .zip(nu.components.iter().cloned())
            .collect(),
        delta_v: m.rewrites.reduce(&contraction(nu, m)),
    }
}
