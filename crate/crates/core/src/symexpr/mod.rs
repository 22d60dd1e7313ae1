//! Exact multivariate rational functions over the rationals.

mod gcd;
mod monomial;
mod parse;
mod poly;
mod print;
mod ratfunc;
mod rewrite;
mod symbol;

use std::collections::BTreeMap;

use num_rational::BigRational;
use thiserror::Error;

pub use gcd::{content_in, gcd, lcm, primitive_part_in};
pub use monomial::Monomial;
pub use parse::{indexed_name, lower, parse_ast, parse_expr, parse_expr_in, Ast, Env, IndexTerm, Pos};
pub use poly::Polynomial;
pub use print::{expr_to_string, poly_to_string};
pub use ratfunc::RationalFunction;
pub use rewrite::{
    leading_variable_term, reduce_with, var_part, RewriteRule, RewriteSystem, Sign,
};
pub use symbol::{Symbol, SymbolKind, SymbolTable};

pub type Poly = Polynomial<BigRational>;
pub type Expr = RationalFunction<BigRational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("undeclared identifier '{name}' at {line}:{col}")]
    Undeclared { name: String, line: usize, col: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("division by zero at {line}:{col}")]
    DivisionByZeroAt { line: usize, col: usize },
    #[error("denominator vanishes at the evaluation point")]
    Pole,
    #[error("symbol without a value at the evaluation point")]
    Unassigned,
    #[error("duplicate symbol '{0}'")]
    DuplicateSymbol(String),
    #[error("invalid symbol name '{0}'")]
    InvalidName(String),
    #[error("binding of '{0}' refers to itself")]
    SelfReference(String),
    #[error("invalid rewrite rule: {0}")]
    BadRule(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn arith(op: ArithOp, lhs: &Expr, rhs: &Expr) -> Result<Expr, ExprError> {
    Ok(match op {
        ArithOp::Add => lhs + rhs,
        ArithOp::Sub => lhs - rhs,
        ArithOp::Mul => lhs * rhs,
        ArithOp::Div => lhs.try_div(rhs)?,
    })
}

pub fn differentiate(e: &Expr, s: usize) -> Expr {
    e.derivative(s)
}

/// Simultaneous substitution. A binding whose value mentions a bound symbol
/// is rejected, since no fixpoint is taken.
pub fn substitute(e: &Expr, bindings: &BTreeMap<usize, Expr>, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    for (s, v) in bindings {
        if v.vars().iter().any(|i| bindings.contains_key(i)) {
            return Err(ExprError::SelfReference(symbols.name(*s).to_string()));
        }
    }
    e.substitute(bindings)
}

pub fn eval_at(e: &Expr, point: &BTreeMap<usize, BigRational>) -> Result<BigRational, ExprError> {
    e.eval_at(point)
}

pub fn reduce_mod(e: &Expr, rw: &RewriteSystem) -> Expr {
    rw.reduce(e)
}

/// True when `a = k b` for some nonzero `k` free of the given variables.
pub fn proportional(a: &Expr, b: &Expr, is_variable: impl Fn(usize) -> bool) -> bool {
    if a.is_zero() || b.is_zero() {
        return a.is_zero() && b.is_zero();
    }
    match a.try_div(b) {
        Ok(k) => k.vars().into_iter().all(|i| !is_variable(i)),
        Err(_) => false,
    }
}

use num_traits::Zero;
