//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | '+' unary | factor
//! factor := base ('^' ['-'] integer)?
//! base   := integer | ident index? | ident '(' args ')' | '(' expr ')'
//! index  := '[' (integer | name) ']'          q[3] means q_3
//! ```
//!
//! `sum(i, lo, hi, body)` expands a finite sum with `i` bound in index
//! positions of `body`.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Expr, ExprError, SymbolTable};
use crate::scalar::Coefficient;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

#[derive(Debug, Clone)]
pub enum IndexTerm {
    Lit(i64),
    Name(String),
}

#[derive(Debug, Clone)]
pub enum Ast {
    Int(BigInt),
    Ident {
        name: String,
        index: Option<IndexTerm>,
        pos: Pos,
    },
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, Pos),
    Pow(Box<Ast>, i64, Pos),
    Sum {
        var: String,
        lo: IndexTerm,
        hi: IndexTerm,
        body: Box<Ast>,
        pos: Pos,
    },
}

struct Lexer<'a> {
    src: &'a str,
    line: usize,
    toks: Vec<(Tok, Pos)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str, line: usize) -> Result<Vec<(Tok, Pos)>, ExprError> {
        let mut lx = Lexer {
            src,
            line,
            toks: Vec::new(),
        };
        lx.lex()?;
        Ok(lx.toks)
    }

    fn lex(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let pos = Pos {
                line: self.line,
                col: i + 1,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let n: BigInt = self.src[start..i].parse().expect("digits");
                self.toks.push((Tok::Int(n), pos));
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                self.toks
                    .push((Tok::Ident(self.src[start..i].to_string()), pos));
                continue;
            }
            let tok = match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                ',' => Tok::Comma,
                other => {
                    return Err(ExprError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        msg: format!("unexpected character '{other}'"),
                    })
                }
            };
            self.toks.push((tok, pos));
            i += c.len_utf8();
        }
        Ok(())
    }
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    end: Pos,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(t, _)| t.clone());
        self.at += 1;
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        let p = self.pos();
        Err(ExprError::Syntax {
            line: p.line,
            col: p.col,
            msg: msg.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            self.err(format!("expected {what}"))
        }
    }

    fn expr(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.at += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.at += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.at += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Tok::Slash) => {
                    let pos = self.pos();
                    self.at += 1;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.unary()?), pos);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ExprError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.at += 1;
                Ok(Ast::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Plus) => {
                self.at += 1;
                self.unary()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<Ast, ExprError> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::Caret) {
            let pos = self.pos();
            self.at += 1;
            let negative = if self.peek() == Some(&Tok::Minus) {
                self.at += 1;
                true
            } else {
                false
            };
            let exp = match self.bump() {
                Some(Tok::Int(n)) => match i64::try_from(n) {
                    Ok(e) => e,
                    Err(_) => return self.err("exponent too large"),
                },
                _ => {
                    self.at -= 1;
                    return self.err("expected integer exponent");
                }
            };
            return Ok(Ast::Pow(
                Box::new(base),
                if negative { -exp } else { exp },
                pos,
            ));
        }
        Ok(base)
    }

    fn index_term(&mut self) -> Result<IndexTerm, ExprError> {
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        match self.bump() {
            Some(Tok::Int(n)) => {
                let v = i64::try_from(n).map_err(|_| ExprError::Syntax {
                    line: self.end.line,
                    col: self.end.col,
                    msg: "index too large".into(),
                })?;
                Ok(IndexTerm::Lit(if negative { -v } else { v }))
            }
            Some(Tok::Ident(name)) if !negative => Ok(IndexTerm::Name(name)),
            _ => {
                self.at -= 1;
                self.err("expected integer or index name")
            }
        }
    }

    fn base(&mut self) -> Result<Ast, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Ast::Int(n)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                if name == "sum" && self.peek() == Some(&Tok::LParen) {
                    self.at += 1;
                    let var = match self.bump() {
                        Some(Tok::Ident(v)) => v,
                        _ => {
                            self.at -= 1;
                            return self.err("expected summation index");
                        }
                    };
                    self.expect(Tok::Comma, "','")?;
                    let lo = self.index_term()?;
                    self.expect(Tok::Comma, "','")?;
                    let hi = self.index_term()?;
                    self.expect(Tok::Comma, "','")?;
                    let body = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Ast::Sum {
                        var,
                        lo,
                        hi,
                        body: Box::new(body),
                        pos,
                    });
                }
                let index = if self.peek() == Some(&Tok::LBracket) {
                    self.at += 1;
                    let t = self.index_term()?;
                    self.expect(Tok::RBracket, "']'")?;
                    Some(t)
                } else {
                    None
                };
                Ok(Ast::Ident { name, index, pos })
            }
            Some(_) => {
                self.at -= 1;
                self.err("expected number, identifier or '('")
            }
            None => self.err("unexpected end of expression"),
        }
    }
}

/// Parses `src` into an AST. `line` is reported in diagnostics.
pub fn parse_ast(src: &str, line: usize) -> Result<Ast, ExprError> {
    let toks = Lexer::run(src, line)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: Pos {
            line,
            col: src.len() + 1,
        },
    };
    if p.peek().is_none() {
        return p.err("empty expression");
    }
    let ast = p.expr()?;
    if p.peek().is_some() {
        return p.err("unexpected trailing input");
    }
    Ok(ast)
}

/// Name-resolution context: integer constants usable in index positions and
/// the currently bound summation indices.
#[derive(Debug, Clone, Default)]
pub struct Env {
    pub constants: HashMap<String, i64>,
    pub bound: HashMap<String, i64>,
}

impl Env {
    pub fn resolve_index(&self, t: &IndexTerm, pos: Pos) -> Result<i64, ExprError> {
        match t {
            IndexTerm::Lit(v) => Ok(*v),
            IndexTerm::Name(n) => self
                .bound
                .get(n)
                .or_else(|| self.constants.get(n))
                .copied()
                .ok_or_else(|| ExprError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("index '{n}' is not a concrete integer"),
                }),
        }
    }
}

/// `q` with index 3 spells `q_3`.
pub fn indexed_name(base: &str, index: i64) -> String {
    format!("{base}_{index}")
}

pub fn lower<C: Coefficient>(
    ast: &Ast,
    symbols: &SymbolTable,
    env: &mut Env,
) -> Result<super::RationalFunction<C>, ExprError> {
    use super::RationalFunction as R;
    Ok(match ast {
        Ast::Int(n) => R::constant(C::from_bigint(n.clone())),
        Ast::Ident { name, index, pos } => {
            if index.is_none() {
                if let Some(v) = env.bound.get(name).or_else(|| env.constants.get(name)) {
                    return Ok(R::integer(*v));
                }
            }
            let full = match index {
                Some(t) => indexed_name(name, env.resolve_index(t, *pos)?),
                None => name.clone(),
            };
            match symbols.lookup(&full) {
                Some(idx) => R::var(idx),
                None => {
                    return Err(ExprError::Undeclared {
                        name: full,
                        line: pos.line,
                        col: pos.col,
                    })
                }
            }
        }
        Ast::Neg(a) => -lower::<C>(a, symbols, env)?,
        Ast::Add(a, b) => &lower::<C>(a, symbols, env)? + &lower::<C>(b, symbols, env)?,
        Ast::Sub(a, b) => &lower::<C>(a, symbols, env)? - &lower::<C>(b, symbols, env)?,
        Ast::Mul(a, b) => &lower::<C>(a, symbols, env)? * &lower::<C>(b, symbols, env)?,
        Ast::Div(a, b, pos) => {
            let d = lower::<C>(b, symbols, env)?;
            if d.is_zero() {
                return Err(ExprError::DivisionByZeroAt {
                    line: pos.line,
                    col: pos.col,
                });
            }
            lower::<C>(a, symbols, env)?.try_div(&d)?
        }
        Ast::Pow(a, e, pos) => {
            let base = lower::<C>(a, symbols, env)?;
            if *e < 0 && base.is_zero() {
                return Err(ExprError::DivisionByZeroAt {
                    line: pos.line,
                    col: pos.col,
                });
            }
            base.powi(*e)?
        }
        Ast::Sum {
            var,
            lo,
            hi,
            body,
            pos,
        } => {
            let lo = env.resolve_index(lo, *pos)?;
            let hi = env.resolve_index(hi, *pos)?;
            let saved = env.bound.get(var).copied();
            let mut acc = R::zero();
            for k in lo..=hi {
                env.bound.insert(var.clone(), k);
                acc = &acc + &lower::<C>(body, symbols, env)?;
            }
            match saved {
                Some(v) => env.bound.insert(var.clone(), v),
                None => env.bound.remove(var),
            };
            acc
        }
    })
}

/// Parses and normalizes an expression against a symbol table.
pub fn parse_expr(text: &str, symbols: &SymbolTable) -> Result<Expr, ExprError> {
    parse_expr_in(text, symbols, &mut Env::default(), 1)
}

pub fn parse_expr_in(
    text: &str,
    symbols: &SymbolTable,
    env: &mut Env,
    line: usize,
) -> Result<Expr, ExprError> {
    let ast = parse_ast(text, line)?;
    lower(&ast, symbols, env)
}
