//! Symplectic two-form analysis: the matrix `f`, its zero-modes, constraints
//! generated from them and the level-by-level iterations.

mod impose;
mod run;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{det_expr, inverse_expr, kernel_expr, Matrix};
use crate::modelspec::{ConstraintDecl, Model};
use crate::symexpr::{
    content_in, gcd, proportional, reduce_with, Expr, Poly, RewriteRule, RewriteSystem,
    SymbolTable,
};
use crate::Rational;

pub use impose::{eliminate, impose_expr, solve_linear, strongly_impose, Imposition};
use impose::subst1;
pub use run::{
    resume_with, run_classic_bw, run_modified_bw, Algorithm, AnalysisReport, Candidate, Disposition,
    LevelRecord, RunOptions, Verdict,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymplecticError {
    #[error("constraint {0} cannot be solved for any variable")]
    Unsolvable(String),
    #[error("constraint {label} cannot be solved for '{symbol}'")]
    NotSolvableFor { label: String, symbol: String },
    #[error("constraint {0} reduces to a nonzero constant")]
    Inconsistent(String),
    #[error("'{0}' is eliminated quadratically but no branch sign was chosen")]
    BranchRequired(String),
    #[error("singular symplectic matrix")]
    Singular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    pub variables: Vec<usize>,
    pub entries: Matrix<Expr>,
}

impl SymplecticMatrix {
    pub fn dim(&self) -> usize {
        self.variables.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroMode {
    pub components: Vec<Expr>,
    /// Component normalized to one.
    pub pivot: usize,
}

/// `f_αβ = ∂A_β/∂ξ_α − ∂A_α/∂ξ_β`.
pub fn build_f(m: &Model) -> SymplecticMatrix {
    let n = m.dim();
    let grads: Vec<Vec<Expr>> = m
        .one_form
        .iter()
        .map(|a| m.variables.iter().map(|&v| a.derivative(v)).collect())
        .collect();
    let entries = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            Expr::zero()
        } else {
            &grads[j][i] - &grads[i][j]
        }
    });
    SymplecticMatrix {
        variables: m.variables.clone(),
        entries,
    }
}

pub fn determinant(f: &SymplecticMatrix) -> Expr {
    if f.dim() % 2 == 1 {
        return Expr::zero();
    }
    det_expr(&f.entries)
}

pub fn kernel_basis(f: &SymplecticMatrix) -> Vec<ZeroMode> {
    let vecs = kernel_expr(&f.entries);
    (0..vecs.len())
        .map(|k| {
            let pivot = (0..f.dim())
                .find(|&i| {
                    vecs[k][i].is_one()
                        && vecs.iter().enumerate().all(|(j, w)| j == k || w[i].is_zero())
                })
                .expect("kernel vectors carry a free unit component");
            ZeroMode {
                components: vecs[k].clone(),
                pivot,
            }
        })
        .collect()
}

pub fn invert(f: &SymplecticMatrix) -> Result<Matrix<Expr>, SymplecticError> {
    inverse_expr(&f.entries).ok_or(SymplecticError::Singular)
}

/// `νᵀ·∂V/∂ξ`, before any normalization.
pub fn contraction(nu: &ZeroMode, m: &Model) -> Expr {
    let mut out = Expr::zero();
    for (c, &v) in nu.components.iter().zip(&m.variables) {
        if c.is_zero() {
            continue;
        }
        out = &out + &(c * &m.potential.derivative(v));
    }
    out
}

/// Constraint obtained from a zero-mode, or `None` when the contraction is
/// weakly zero.
pub fn generate_constraint(nu: &ZeroMode, m: &Model) -> Result<Option<Expr>, SymplecticError> {
    let c = m.rewrites.reduce(&contraction(nu, m));
    if weakly_zero(&c, &m.chain, &m.rewrites, &m.symbols)? {
        return Ok(None);
    }
    Ok(Some(normalize_constraint(&c)))
}

pub fn is_new_constraint(
    c: &Expr,
    chain: &[ConstraintDecl],
    rw: &RewriteSystem,
    symbols: &SymbolTable,
) -> Result<bool, SymplecticError> {
    Ok(!weakly_zero(c, chain, rw, symbols)?)
}

/// Zero modulo the rewrites and the chain. Members with `solved_for` are
/// substituted in order; the others are reduced by the earlier members and
/// then act as rewrite rules oriented by their leading variable monomial.
/// Plain proportionality to a single member is tried first.
pub fn weakly_zero(
    c: &Expr,
    chain: &[ConstraintDecl],
    rw: &RewriteSystem,
    symbols: &SymbolTable,
) -> Result<bool, SymplecticError> {
    let is_var = |i: usize| symbols.is_variable(i);
    let mut e = rw.reduce(c);
    if e.is_zero() {
        return Ok(true);
    }
    let members: Vec<Expr> = chain.iter().map(|k| rw.reduce(&k.expr)).collect();
    if members.iter().any(|k| proportional(&e, k, is_var)) {
        return Ok(true);
    }
    let mut rules: Vec<RewriteRule> = Vec::new();
    let mut subs: Vec<(usize, Expr)> = Vec::new();
    for (k, member) in chain.iter().zip(members) {
        let mut member = member;
        for (s, v) in &subs {
            member = subst1(&member, *s, v);
        }
        let member = reduce_with(&member, &rules);
        if member.is_zero() {
            continue;
        }
        let not_solvable = || SymplecticError::NotSolvableFor {
            label: k.label.clone(),
            symbol: symbols.name(k.solved_for.unwrap_or(0)).to_string(),
        };
        match k.solved_for.map(|s| (s, member.numer().degree_in(s))) {
            Some((s, 1)) => {
                let value = solve_linear(&member, s).ok_or_else(not_solvable)?;
                e = subst1(&e, s, &value);
                subs.push((s, value));
            }
            Some((_, 2)) | None => rules.extend(RewriteRule::from_constraint(&member, symbols)),
            Some(_) => return Err(not_solvable()),
        }
        if e.is_zero() {
            return Ok(true);
        }
    }
    Ok(reduce_with(&e, &rules).is_zero())
}

/// Numerator scaled to coprime integer coefficients with a positive leading
/// term.
pub fn normalize_constraint(c: &Expr) -> Expr {
    Expr::from_poly(primitive_integer(c.numer()))
}

pub(crate) fn primitive_integer(p: &Poly) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for (_, c) in p.terms() {
        num_gcd = num_gcd.gcd(c.numer());
        den_lcm = den_lcm.lcm(c.denom());
    }
    let mut s = Rational::new(den_lcm, num_gcd);
    if p.leading_coeff().is_negative() {
        s = -s;
    }
    p.scale(&s)
}

/// Square-free splitting of a polynomial into normalized factors with
/// multiplicities. Not a full factorization.
pub fn factor_hints(p: &Poly) -> Vec<(Poly, u32)> {
    let mut parts = Vec::new();
    split_factors(p, &mut parts);
    let mut out: Vec<(Poly, u32)> = Vec::new();
    for f in parts {
        match out.iter_mut().find(|(g, _)| *g == f) {
            Some((_, k)) => *k += 1,
            None => out.push((f, 1)),
        }
    }
    out
}

fn split_factors(p: &Poly, out: &mut Vec<Poly>) {
    if p.is_constant() {
        return;
    }
    for v in p.vars() {
        let c = content_in(p, v);
        if !c.is_constant() {
            split_factors(&c, out);
            split_factors(&p.div_exact(&c).expect("content divides"), out);
            return;
        }
        let g = gcd(p, &p.derivative(v));
        if !g.is_constant() {
            split_factors(&g, out);
            split_factors(&p.div_exact(&g).expect("gcd divides"), out);
            return;
        }
    }
    out.push(primitive_integer(p));
}
