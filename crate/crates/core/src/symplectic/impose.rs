use std::collections::BTreeMap;

use num_traits::Zero;

use super::SymplecticError;
use crate::modelspec::{ConstraintDecl, Model};
use crate::symexpr::{Expr, Monomial, RewriteRule, RewriteSystem, SymbolTable};
use crate::Poly;

/// Result of eliminating a constraint chain from the potential.
#[derive(Debug, Clone, PartialEq)]
pub struct Imposition {
    pub model: Model,
    pub hamiltonian: Expr,
    /// Variables solved linearly, in elimination order, with final values.
    pub solutions: Vec<(usize, Expr)>,
    pub rules: Vec<RewriteRule>,
}

/// `s` from `c = 0` when `c` is linear in `s`.
pub fn solve_linear(c: &Expr, s: usize) -> Option<Expr> {
    if c.denom().contains_var(s) || c.numer().degree_in(s) != 1 {
        return None;
    }
    let coeffs = c.numer().coeffs_in(s);
    let c0 = coeffs.get(&0).cloned().unwrap_or_else(Poly::zero);
    Expr::from_poly(-c0).try_div(&Expr::from_poly(coeffs[&1].clone())).ok()
}

enum Step {
    Solve(usize, Expr),
    Rule(RewriteRule),
}

fn orient(c: &ConstraintDecl, e: &Expr, symbols: &SymbolTable) -> Result<Step, SymplecticError> {
    if let Some(s) = c.solved_for {
        let fail = || SymplecticError::NotSolvableFor {
            label: c.label.clone(),
            symbol: symbols.name(s).to_string(),
        };
        return match e.numer().degree_in(s) {
            1 => solve_linear(e, s).map(|v| Step::Solve(s, v)).ok_or_else(fail),
            2 if !e.denom().contains_var(s) => {
                let c2 = e.numer().coeffs_in(s)[&2].clone();
                let rest = e.numer() - &Poly::from_coeffs_in(s, &BTreeMap::from([(2, c2.clone())]));
                let repl = Expr::from_poly(-rest)
                    .try_div(&Expr::from_poly(c2))
                    .map_err(|_| fail())?;
                RewriteRule::new(Monomial::var(s, 2), repl, symbols)
                    .map(Step::Rule)
                    .map_err(|_| fail())
            }
            _ => Err(fail()),
        };
    }
    let rule = RewriteRule::from_constraint(e, symbols)
        .ok_or_else(|| SymplecticError::Unsolvable(c.label.clone()))?;
    Ok(match rule.pure_power() {
        Some((v, 1)) => Step::Solve(v, rule.replacement),
        _ => Step::Rule(rule),
    })
}

/// Strongly sets every chain member to zero in the potential. Linear members
/// are solved and substituted; explicit time dependence of a solution feeds
/// back into the potential through its kinetic term. The others become
/// rewrite rules.
pub fn strongly_impose(m: &Model, chain: &[ConstraintDecl]) -> Result<Imposition, SymplecticError> {
    let symbols = &m.symbols;
    let mut v = m.potential.clone();
    let mut rw = m.rewrites.clone();
    let mut sols: Vec<(usize, Expr)> = Vec::new();
    let mut rules = Vec::new();
    let mut kinetic: BTreeMap<usize, Expr> = m
        .variables
        .iter()
        .zip(&m.one_form)
        .filter(|(&s, _)| !m.is_multiplier(s))
        .map(|(&s, a)| (s, a.clone()))
        .collect();
    for c in chain {
        let mut e = c.expr.clone();
        for (s, value) in &sols {
            e = subst1(&e, *s, value);
        }
        let e = rw.reduce(&e);
        if e.is_zero() {
            continue;
        }
        if e.constant_value().is_some() {
            return Err(SymplecticError::Inconsistent(c.label.clone()));
        }
        match orient(c, &e, symbols)? {
            Step::Solve(s, value) => {
                let value = rw.reduce(&value);
                for (_, x) in sols.iter_mut() {
                    *x = rw.reduce(&subst1(x, s, &value));
                }
                v = subst1(&v, s, &value);
                if let Some(t) = m.options.time {
                    let dt = value.derivative(t);
                    if let (false, Some(a)) = (dt.is_zero(), kinetic.get(&s)) {
                        v = &v - &(&subst1(a, s, &value) * &dt);
                    }
                }
                kinetic.remove(&s);
                for a in kinetic.values_mut() {
                    *a = subst1(a, s, &value);
                }
                sols.push((s, value));
            }
            Step::Rule(r) => {
                rw.push(r.clone());
                rules.push(r);
            }
        }
        v = rw.reduce(&v);
    }
    let v = rw.reduce(&v);
    check_branches(&v, &rw, symbols)?;

    let mut model = m.clone();
    model.variables = m
        .variables
        .iter()
        .copied()
        .filter(|s| kinetic.contains_key(s))
        .collect();
    model.one_form = model.variables.iter().map(|s| rw.reduce(&kinetic[s])).collect();
    model.potential = v.clone();
    model.chain.clear();
    model.pending.clear();
    model.rewrites = rw;
    Ok(Imposition {
        model,
        hamiltonian: v,
        solutions: sols,
        rules,
    })
}

/// Reduces `v` by the single constraint `c`, as the original iteration does
/// after each new constraint.
pub fn eliminate(v: &Expr, c: &ConstraintDecl, m: &Model) -> Result<Expr, SymplecticError> {
    let e = m.rewrites.reduce(&c.expr);
    if e.is_zero() {
        return Ok(v.clone());
    }
    if e.constant_value().is_some() {
        return Err(SymplecticError::Inconsistent(c.label.clone()));
    }
    let out = match orient(c, &e, &m.symbols)? {
        Step::Solve(s, value) => {
            let mut out = subst1(v, s, &value);
            if let (Some(t), Some(pos)) = (m.options.time, m.position(s)) {
                let dt = value.derivative(t);
                if !dt.is_zero() {
                    out = &out - &(&subst1(&m.one_form[pos], s, &value) * &dt);
                }
            }
            out
        }
        Step::Rule(r) => crate::symexpr::reduce_with(v, &[r]),
    };
    Ok(m.rewrites.reduce(&out))
}

fn check_branches(v: &Expr, rw: &RewriteSystem, symbols: &SymbolTable) -> Result<(), SymplecticError> {
    for s in rw.defined_symbols() {
        if v.contains_var(s) && !rw.branches.contains_key(&s) {
            return Err(SymplecticError::BranchRequired(symbols.name(s).to_string()));
        }
    }
    Ok(())
}

pub(crate) fn subst1(e: &Expr, s: usize, value: &Expr) -> Expr {
    if !e.contains_var(s) {
        return e.clone();
    }
    e.substitute(&BTreeMap::from([(s, value.clone())]))
        .expect("solution has a nonzero denominator")
}

/// Strong elimination of `chain` from a bare expression. Each member is
/// solved for its last-ordered variable that occurs linearly with a
/// variable-free coefficient; failing that it becomes a rewrite rule.
pub fn impose_expr(
    v: &Expr,
    chain: &[ConstraintDecl],
    rw: &RewriteSystem,
    symbols: &SymbolTable,
) -> Result<(Expr, Vec<(usize, Expr)>, RewriteSystem), SymplecticError> {
    let mut v = rw.reduce(v);
    let mut rw = rw.clone();
    let mut sols: Vec<(usize, Expr)> = Vec::new();
    for c in chain {
        let mut e = c.expr.clone();
        for (s, value) in &sols {
            e = subst1(&e, *s, value);
        }
        let e = rw.reduce(&e);
        if e.is_zero() {
            continue;
        }
        if e.constant_value().is_some() {
            return Err(SymplecticError::Inconsistent(c.label.clone()));
        }
        let linear = e.vars().into_iter().rev().find(|&s| {
            symbols.is_variable(s)
                && solve_linear(&e, s).is_some()
                && e.numer().coeffs_in(s)[&1]
                    .vars()
                    .iter()
                    .all(|&i| !symbols.is_variable(i))
        });
        let step = match (c.solved_for, linear) {
            (None, Some(s)) => Step::Solve(s, solve_linear(&e, s).expect("checked")),
            _ => orient(c, &e, symbols)?,
        };
        match step {
            Step::Solve(s, value) => {
                let value = rw.reduce(&value);
                for (_, x) in sols.iter_mut() {
                    *x = rw.reduce(&subst1(x, s, &value));
                }
                v = subst1(&v, s, &value);
                sols.push((s, value));
            }
            Step::Rule(r) => rw.push(r),
        }
        v = rw.reduce(&v);
    }
    check_branches(&v, &rw, symbols)?;
    Ok((v, sols, rw))
}
