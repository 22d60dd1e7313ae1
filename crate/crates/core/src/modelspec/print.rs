use std::fmt::Write;

use super::{DiracSource, Model, Origin};
use crate::symexpr::{expr_to_string, poly_to_string, Poly};

fn constraint_line(m: &Model, c: &super::ConstraintDecl, kinetic: bool) -> String {
    let mut s = format!("{} : {} [{}]", c.label, expr_to_string(&c.expr, &m.symbols), c.origin);
    if let Some(v) = c.solved_for {
        let _ = write!(s, " [solved_for={}]", m.symbols.name(v));
    }
    let injected = m.chain.iter().find(|x| kinetic && x.label == c.label);
    if let Some(name) = injected.and_then(|x| x.multiplier.as_ref()).or(c.multiplier.as_ref()) {
        let _ = write!(s, " [multiplier={name}]");
    }
    s
}

/// Canonical text form; parsing it yields the same model.
pub fn pretty_print(m: &Model) -> String {
    let t = &m.symbols;
    let mut out = String::new();
    let _ = writeln!(out, "[options]\nname = {}\nmax_level = {}", m.name, m.options.max_level);
    let _ = writeln!(out, "multiplier = {}", m.options.multiplier_prefix);
    if let Some(time) = m.options.time {
        let _ = writeln!(out, "time = {}", t.name(time));
    }
    for (s, sign) in &m.rewrites.branches {
        let _ = writeln!(out, "branch.{} = {}", t.name(*s), sign.as_char());
    }

    out.push_str("\n[parameters]\n");
    if !m.parameters.is_empty() {
        let names: Vec<&str> = m.parameters.iter().map(|&p| t.name(p)).collect();
        let _ = writeln!(out, "{}", names.join(", "));
    }
    for (k, v) in &m.constants {
        let _ = writeln!(out, "{k} = {v}");
    }

    out.push_str("\n[variables]\n");
    for &v in &m.variables[..m.declared_vars] {
        let _ = writeln!(out, "{} : {}", t.name(v), t.kind(v));
    }
    out.push_str("\n[one_form]\n");
    for (i, &v) in m.variables[..m.declared_vars].iter().enumerate() {
        let _ = writeln!(out, "{} = {}", t.name(v), expr_to_string(&m.one_form[i], t));
    }
    let _ = writeln!(out, "\n[potential]\n{}", expr_to_string(&m.potential, t));

    out.push_str("\n[constraints]\n");
    for c in &m.declared {
        let _ = writeln!(out, "{}", constraint_line(m, c, true));
    }

    out.push_str("\n[rewrites]\n");
    for r in &m.rewrites.rules {
        let pat = Poly::term(num_traits::One::one(), r.pattern.clone());
        let _ = writeln!(out, "{} -> {}", poly_to_string(&pat, t), expr_to_string(&r.replacement, t));
    }

    if let Some(d) = &m.dirac {
        out.push_str("\n[dirac]\n");
        for p in &d.pairs {
            let vel = p.velocity.map_or("-", |v| t.name(v));
            let _ = writeln!(out, "pair {} {} {}", t.name(p.coordinate), vel, t.name(p.momentum));
        }
        match &d.source {
            DiracSource::Lagrangian(l) => {
                let _ = writeln!(out, "lagrangian = {}", expr_to_string(l, t));
            }
            DiracSource::Hamiltonian {
                hamiltonian,
                primaries,
            } => {
                let _ = writeln!(out, "hamiltonian = {}", expr_to_string(hamiltonian, t));
                for c in primaries {
                    debug_assert_eq!(c.origin, Origin::Primary);
                    let _ = writeln!(out, "primary {}", constraint_line(m, c, false));
                }
            }
        }
    }
    out
}
