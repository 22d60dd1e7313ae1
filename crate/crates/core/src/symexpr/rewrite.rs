//! Reduction modulo side relations.
//!
//! A rule replaces a power product of variables by an expression whose
//! variable monomials are strictly smaller in graded-lex order (parameters
//! are treated as coefficients). Any set of such rules terminates, so
//! reduction always reaches a form in which no pattern divides a term.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::monomial::Monomial;
use super::poly::Polynomial;
use super::{Expr, ExprError, Poly, SymbolTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteRule {
    pub pattern: Monomial,
    pub replacement: Expr,
}

impl RewriteRule {
    /// Validates the termination condition.
    pub fn new(pattern: Monomial, replacement: Expr, symbols: &SymbolTable) -> Result<Self, ExprError> {
        if pattern.is_one() || pattern.support().any(|(i, _)| !symbols.is_variable(i)) {
            return Err(ExprError::BadRule(
                "pattern must be a power product of variables".into(),
            ));
        }
        let lead = var_part(&pattern, symbols);
        let den_ok = replacement
            .denom()
            .terms()
            .all(|(m, _)| var_part(m, symbols).is_one());
        let num_ok = replacement
            .numer()
            .terms()
            .all(|(m, _)| var_part(m, symbols) < lead);
        if !den_ok || !num_ok {
            return Err(ExprError::BadRule(
                "replacement must be smaller than its pattern".into(),
            ));
        }
        Ok(Self {
            pattern,
            replacement,
        })
    }

    /// Orients `c = 0` as a rule: the leading variable monomial is rewritten
    /// in terms of the rest. `None` when `c` has no variables.
    pub fn from_constraint(c: &Expr, symbols: &SymbolTable) -> Option<Self> {
        let (lead, coeff) = leading_variable_term(c.numer(), symbols)?;
        let mut rest = c.numer().clone();
        for (m, k) in coeff.terms() {
            rest.add_term(m.mul(&lead), -k.clone());
        }
        let replacement = Expr::from_poly(-&rest)
            .try_div(&Expr::from_poly(coeff))
            .expect("leading coefficient is nonzero");
        Some(Self {
            pattern: lead,
            replacement,
        })
    }

    /// Single variable the rule eliminates when the pattern is a pure power.
    pub fn pure_power(&self) -> Option<(usize, u32)> {
        let mut s = self.pattern.support();
        let first = s.next()?;
        if s.next().is_some() {
            None
        } else {
            Some(first)
        }
    }
}

/// Restriction of a monomial to variables.
pub fn var_part(m: &Monomial, symbols: &SymbolTable) -> Monomial {
    m.restrict(|i| i < symbols.len() && symbols.is_variable(i))
}

/// Leading power product of variables and its coefficient, a polynomial in
/// parameters only.
pub fn leading_variable_term(p: &Poly, symbols: &SymbolTable) -> Option<(Monomial, Poly)> {
    let mut groups: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let v = var_part(m, symbols);
        let coeff_part = m.restrict(|i| i >= symbols.len() || !symbols.is_variable(i));
        groups
            .entry(v)
            .or_insert_with(Poly::zero)
            .add_term(coeff_part, c.clone());
    }
    let (lead, coeff) = groups.into_iter().next_back()?;
    if lead.is_one() {
        return None;
    }
    Some((lead, coeff))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteSystem {
    pub rules: Vec<RewriteRule>,
    /// Chosen square-root branch for symbols eliminated quadratically.
    pub branches: BTreeMap<usize, Sign>,
}

const STEP_LIMIT: usize = 200_000;

impl RewriteSystem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn push(&mut self, rule: RewriteRule) {
        self.rules.push(rule);
    }

    /// Symbols eliminated by pure-power rules (`p0^2 -> ...`).
    pub fn defined_symbols(&self) -> Vec<usize> {
        self.rules
            .iter()
            .filter_map(|r| r.pure_power().filter(|&(_, e)| e >= 2).map(|(i, _)| i))
            .collect()
    }

    pub fn reduce_poly(&self, p: &Poly) -> Expr {
        reduce_poly_with(p, &self.rules)
    }

    /// Exhaustive reduction of numerator and denominator.
    pub fn reduce(&self, e: &Expr) -> Expr {
        reduce_with(e, &self.rules)
    }
}

pub fn reduce_with(e: &Expr, rules: &[RewriteRule]) -> Expr {
    if rules.is_empty() || e.is_zero() {
        return e.clone();
    }
    let num = reduce_poly_with(e.numer(), rules);
    if e.denom().is_one() {
        return num;
    }
    let den = reduce_poly_with(e.denom(), rules);
    if den.is_zero() {
        return num
            .try_div(&Expr::from_poly(e.denom().clone()))
            .expect("denominator is nonzero");
    }
    num.try_div(&den).expect("denominator is nonzero")
}

fn reduce_poly_with(p: &Poly, rules: &[RewriteRule]) -> Expr {
    if rules.is_empty() {
        return Expr::from_poly(p.clone());
    }
    let mut work = p.clone();
    let mut done = Poly::zero();
    let mut scale = Poly::one();
    let mut steps = 0;
    while let Some((m, c)) = work.leading().map(|(m, c)| (m.clone(), c.clone())) {
        steps += 1;
        if steps > STEP_LIMIT {
            done = &done + &work;
            break;
        }
        let mut single = Polynomial::zero();
        single.add_term(m.clone(), c.clone());
        work = &work - &single;
        let hit = rules
            .iter()
            .find_map(|r| r.pattern.quotient_of(&m).map(|q| (r, q)));
        match hit {
            None => done.add_term(m, c),
            Some((rule, q)) => {
                let rd = rule.replacement.denom();
                if !rd.is_one() {
                    work = &work * rd;
                    done = &done * rd;
                    scale = &scale * rd;
                }
                let add = rule.replacement.numer().mul_monomial(&q).scale(&c);
                work = &work + &add;
            }
        }
    }
    Expr::from_poly(done)
        .try_div(&Expr::from_poly(scale))
        .expect("scale is nonzero")
}
