use std::fmt::Write;

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::poly::Polynomial;
use super::ratfunc::RationalFunction;
use super::SymbolTable;
use crate::scalar::Coefficient;

fn write_monomial(out: &mut String, m: &Monomial, symbols: &SymbolTable) {
    let mut first = true;
    for (i, e) in m.support() {
        if !first {
            out.push('*');
        }
        first = false;
        out.push_str(symbols.name(i));
        if e > 1 {
            let _ = write!(out, "^{e}");
        }
    }
}

/// Terms in descending graded-lex order, e.g. `a*p_x - b*x + b*y` or
/// `q_1^2/2 - 1/2`. The output re-parses to the same polynomial.
pub fn poly_to_string<C: Coefficient>(p: &Polynomial<C>, symbols: &SymbolTable) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let mag = if neg { -c.clone() } else { c.clone() };
        match (k, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let (n, d) = mag
            .as_ratio()
            .unwrap_or_else(|| panic!("coefficient {mag} is not a ratio"));
        let n_one = n.is_one();
        if m.is_one() {
            let _ = write!(out, "{n}");
        } else {
            if !n_one {
                let _ = write!(out, "{n}*");
            }
            write_monomial(&mut out, m, symbols);
        }
        if !d.is_one() {
            let _ = write!(out, "/{d}");
        }
    }
    out
}

fn needs_parens_as_denominator<C: Coefficient>(p: &Polynomial<C>) -> bool {
    if p.num_terms() != 1 {
        return true;
    }
    let (m, c) = p.leading().unwrap();
    // A bare integer or a single symbol power is safe after '/'.
    if m.is_one() {
        return false;
    }
    !(c.is_one() && m.support().count() == 1)
}

pub fn expr_to_string<C: Coefficient>(e: &RationalFunction<C>, symbols: &SymbolTable) -> String {
    let num = poly_to_string(e.numer(), symbols);
    if e.denom().is_one() {
        return num;
    }
    let num = if e.numer().num_terms() > 1 {
        format!("({num})")
    } else {
        num
    };
    let den = poly_to_string(e.denom(), symbols);
    if needs_parens_as_denominator(e.denom()) {
        format!("{num}/({den})")
    } else {
        format!("{num}/{den}")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, SymbolKind};
    use super::*;

    #[test]
    fn round_trips() {
        let mut t = SymbolTable::new();
        for n in ["a", "b"] {
            t.declare(n, SymbolKind::Parameter).unwrap();
        }
        for n in ["x", "p_x", "y"] {
            t.declare(n, SymbolKind::Coordinate).unwrap();
        }
        for src in [
            "a*p_x - b*(x - y)",
            "(b - a^2)*p_x^2/(2*b)",
            "a/(a^2 - b)",
            "-x/2 + 3",
            "1/(a*b)",
            "x^2/y",
            "0",
        ] {
            let e = parse_expr::<>(src, &t).unwrap();
            let s = expr_to_string(&e, &t);
            assert_eq!(parse_expr(&s, &t).unwrap(), e, "{src} -> {s}");
        }
        let e = parse_expr("a*p_x - b*(x - y)", &t).unwrap();
        assert_eq!(expr_to_string(&e, &t), "a*p_x - b*x + b*y");
    }
}
