#![allow(dead_code)]

use std::collections::BTreeMap;

use bwcore::symexpr::{Expr, SymbolKind, SymbolTable};
use bwcore::Rational;
use num_bigint::BigInt;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

#[derive(Debug, Clone)]
pub enum Tree {
    Var(usize),
    Int(i64),
    Add(Box<Tree>, Box<Tree>),
    Sub(Box<Tree>, Box<Tree>),
    Mul(Box<Tree>, Box<Tree>),
    Div(Box<Tree>, Box<Tree>),
    Pow(Box<Tree>, u32),
}

pub const NVARS: usize = 4;

pub fn table() -> SymbolTable {
    let mut t = SymbolTable::new();
    t.declare("a", SymbolKind::Parameter).unwrap();
    for n in ["x", "y", "z"] {
        t.declare(n, SymbolKind::Coordinate).unwrap();
    }
    t
}

fn tree(polynomial: bool) -> impl Strategy<Value = Tree> {
    let leaf = prop_oneof![
        (0..NVARS).prop_map(Tree::Var),
        (-5i64..=5).prop_map(Tree::Int),
    ];
    leaf.prop_recursive(4, 24, 2, move |inner| {
        let base = prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Tree::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), 0u32..3).prop_map(|(a, e)| Tree::Pow(Box::new(a), e)),
        ];
        if polynomial {
            base.boxed()
        } else {
            prop_oneof![
                4 => base,
                1 => (inner.clone(), inner).prop_map(|(a, b)| Tree::Div(Box::new(a), Box::new(b))),
            ]
            .boxed()
        }
    })
}

pub fn expr_strategy() -> impl Strategy<Value = Expr> {
    tree(false).prop_map(|t| build(&t))
}

pub fn poly_strategy() -> impl Strategy<Value = Expr> {
    tree(true).prop_map(|t| build(&t))
}

/// Division by an identically zero subtree falls back to multiplication.
pub fn build(t: &Tree) -> Expr {
    match t {
        Tree::Var(i) => Expr::var(*i),
        Tree::Int(n) => Expr::integer(*n),
        Tree::Add(a, b) => &build(a) + &build(b),
        Tree::Sub(a, b) => &build(a) - &build(b),
        Tree::Mul(a, b) => &build(a) * &build(b),
        Tree::Div(a, b) => {
            let d = build(b);
            let n = build(a);
            n.try_div(&d).unwrap_or_else(|_| &n * &d)
        }
        Tree::Pow(a, e) => build(a).powi(*e as i64).unwrap(),
    }
}

pub fn rational() -> impl Strategy<Value = Rational> {
    (-97i64..=97, 1i64..=97).prop_map(|(n, d)| Rational::new(BigInt::from(n), BigInt::from(d)))
}

pub fn point(n: usize) -> impl Strategy<Value = BTreeMap<usize, Rational>> {
    proptest::collection::vec(rational(), n).prop_map(|v| v.into_iter().enumerate().collect())
}

/// Reproducible runs: fixed RNG seed and no failure persistence files.
pub fn fixed_seed(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x0b5e_55ed),
        failure_persistence: None,
        ..Config::default()
    }
}
