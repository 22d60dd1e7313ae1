use std::collections::BTreeMap;

use bwcore::compare::compare;
use bwcore::dirac::run_dirac;
use bwcore::dynamics::{
    conserved_search, eom_pipeline, hamilton_equations, in_span, numeric_oracle, promote_to_constraint,
    symmetry_report, Check, Subject,
};
use bwcore::modelspec::{parse_model_with, Model, Origin};
use bwcore::symplectic::{run_modified_bw, RunOptions, Verdict};
use bwcore::{Expr, SymbolKind};
use num_traits::Zero;

fn bundled(name: &str, over: &[(&str, i64)]) -> Model {
    let path = format!("{}/../../models/{name}.model", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let over: BTreeMap<String, i64> = over.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    parse_model_with(&text, &over).unwrap()
}

fn ex(m: &Model, s: &str) -> Expr {
    m.parse_expr(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

/// Entry-wise proportionality of two vectors over the function field.
fn proportional_vec(u: &[Expr], v: &[Expr]) -> bool {
    let Some(k) = (0..u.len()).find(|&i| !v[i].is_zero()) else {
        return u.iter().all(Expr::is_zero);
    };
    let Ok(r) = u[k].try_div(&v[k]) else {
        return false;
    };
    !r.is_zero() && u.iter().zip(v).all(|(a, b)| *a == b * &r)
}

#[test]
fn toy_hamilton_equations() {
    let m = bundled("toy", &[]);
    let r = run_modified_bw(&m, &RunOptions::from_model(&m));
    let fm = &r.final_model;
    let table = r.brackets().unwrap();
    let s = |n: &str| fm.sym(n).unwrap();
    let [x, px, y, l1] = [s("x"), s("p_x"), s("y"), s("lambda1")];

    let reduced = hamilton_equations(table, r.hamiltonian().unwrap());
    assert_eq!(reduced.rate(x).unwrap(), &ex(fm, "p_x"));
    assert!(reduced.rate(px).unwrap().is_zero());
    assert_eq!(reduced.rate(y).unwrap(), &ex(fm, "p_x"));
    assert_eq!(reduced.rate(l1).unwrap(), &ex(fm, "-a*p_x/b"));

    let full = hamilton_equations(table, &fm.potential);
    let v = ex(fm, "b/(a^2 - b)*(-p_x + a*(x - y))");
    assert_eq!(full.rate(x).unwrap(), &v);
    assert!(full.rate(px).unwrap().is_zero());
    assert_eq!(full.rate(y).unwrap(), &v);
    assert_eq!(full.rate(l1).unwrap(), &ex(fm, "(a*p_x - b*(x - y))/(a^2 - b)"));
    assert!(full.time_derivative(&fm.potential).is_zero());

    let span = conserved_search(&full, 1).unwrap();
    assert_eq!(span, vec![ex(fm, "p_x"), ex(fm, "x - y")]);
    assert!(in_span(&ex(fm, "-b*p_x + a*b*(x - y)"), &span, &full.basis));
    for q in &span {
        assert!(full.time_derivative(q).is_zero());
    }
    for q in conserved_search(&full, 2).unwrap() {
        assert!(full.time_derivative(&q).is_zero());
    }
}

#[test]
fn toy_promotion_reaches_the_symmetry() {
    let m = bundled("toy", &[]);
    let opts = RunOptions::from_model(&m);
    let bw = run_modified_bw(&m, &opts);
    let dirac = run_dirac(&m, 10).unwrap();
    let cmp = compare(&dirac, &bw);
    let only: Vec<(String, Expr)> = cmp
        .dirac_only()
        .iter()
        .map(|r| (r.label.clone(), r.expr.clone()))
        .collect();
    assert_eq!(only.len(), 1);

    let (next, step) = eom_pipeline(&bw, &only, 1, None, &opts).unwrap();
    let p = step.promotion.unwrap();
    let fm = &next.final_model;
    assert_eq!(p.quantity, ex(fm, "-b*p_x + a*b*(x - y)"));
    assert_eq!(p.constraint.origin, Origin::EomDerived);
    assert_eq!(p.constraint.expr, ex(fm, "-b*p_x + a*b*(x - y) - kappa1"));
    assert_eq!(fm.symbols.kind(fm.sym("kappa1").unwrap()), SymbolKind::IntegrationConstant);

    assert_eq!(next.levels.len(), 3);
    let lvl = &next.levels[2];
    assert_eq!(lvl.index, 2);
    assert_eq!(lvl.injected, 2);
    let expect = [
        ["0", "-1", "-a", "-b", "a*b"],
        ["1", "0", "0", "a", "-b"],
        ["a", "0", "0", "b", "-a*b"],
        ["b", "-a", "-b", "0", "0"],
        ["-a*b", "b", "a*b", "0", "0"],
    ];
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(lvl.f.entries[(i, j)], ex(fm, expect[i][j]), "f({i},{j})");
        }
    }
    let Verdict::Symmetry { generator, delta_v, .. } = &next.verdict else {
        panic!("expected a symmetry, got {}", next.verdict.kind());
    };
    let expected: Vec<Expr> = ["-b", "0", "-b", "0", "-1"].iter().map(|s| ex(fm, s)).collect();
    assert!(proportional_vec(&generator.components, &expected));
    assert!(delta_v.is_zero());
    let residual = lvl.f.entries.transpose().mul_vec(&generator.components);
    assert!(residual.iter().all(Expr::is_zero));

    let rep = symmetry_report(generator, fm);
    assert!(rep.delta_v.is_zero());
    let s = |n: &str| fm.sym(n).unwrap();
    let dx = rep.variation(s("x")).unwrap().clone();
    assert_eq!(rep.variation(s("y")).unwrap(), &dx);
    assert!(rep.variation(s("p_x")).unwrap().is_zero());
    let scale = ex(fm, "-b").try_div(&dx).unwrap();
    let scaled = rep.scaled(&scale);
    assert_eq!(scaled.variation(s("x")).unwrap(), &ex(fm, "-b"));
    assert_eq!(scaled.variation(s("lambda2")).unwrap(), &ex(fm, "-1"));
}

#[test]
fn promotion_of_momentum() {
    let m = bundled("toy", &[]);
    let mut fm = run_modified_bw(&m, &RunOptions::from_model(&m)).final_model;
    let q = ex(&fm, "p_x");
    let c = promote_to_constraint(&q, &mut fm).unwrap();
    assert_eq!(c.expr, ex(&fm, "p_x - kappa1"));
    assert!(promote_to_constraint(&Expr::zero(), &mut fm).is_err());
    assert!(promote_to_constraint(&ex(&fm, "a"), &mut fm).is_err());
}

#[test]
fn hypersphere_angular_momentum() {
    let m = bundled("hypersphere", &[("N", 2)]);
    let r = run_modified_bw(&m, &RunOptions::from_model(&m));
    let fm = &r.final_model;
    let qp: Vec<usize> = ["q_1", "q_2", "p_1", "p_2"].iter().map(|n| fm.sym(n).unwrap()).collect();
    let table = r.brackets().unwrap().restrict(&qp).unwrap();
    let ms = hamilton_equations(&table, r.hamiltonian().unwrap());
    let span = conserved_search(&ms, 2).unwrap();
    let l = ex(fm, "q_1*p_2 - q_2*p_1");
    assert!(ms.time_derivative(&l).is_zero());
    assert!(in_span(&l, &span, &ms.basis));
    for q in &span {
        assert!(ms.time_derivative(q).is_zero());
    }
}

#[test]
fn relativistic_gauge_mode() {
    let m = bundled("relativistic", &[]);
    let r = run_modified_bw(&m, &RunOptions::from_model(&m));
    let lvl = &r.levels[0];
    let mut at = m.clone();
    at.variables = lvl.variables.clone();
    at.one_form = lvl.one_form.clone();
    at.symbols = r.final_model.symbols.clone();
    let rep = symmetry_report(&lvl.zero_modes[0], &at);
    let s = |n: &str| at.sym(n).unwrap();
    assert_eq!(rep.variation(s("x0")).unwrap(), &ex(&at, "2*p0"));
    assert_eq!(rep.variation(s("x1")).unwrap(), &ex(&at, "-2*p1"));
    assert_eq!(rep.variation(s("lambda")).unwrap(), &ex(&at, "1"));
    assert!(rep.delta_v.is_zero());
}

#[test]
fn oracle_examples() {
    let m = bundled("toy", &[]);
    let r = run_modified_bw(&m, &RunOptions::from_model(&m));
    let f = &r.levels[1].f.entries;
    let inv = &r.brackets().unwrap().entries;
    let out = numeric_oracle(Check::Inverse, Subject::Inverse { f, inverse: inv }, 10, 11).unwrap();
    assert!(out.passed());
    assert_eq!(out.evaluated, 10);

    let h = bundled("hypersphere", &[("N", 3)]);
    let r = run_modified_bw(&h, &RunOptions::from_model(&h));
    let lvl = r.last_level();
    let out = numeric_oracle(
        Check::Determinant,
        Subject::Determinant { matrix: &lvl.f.entries, det: &lvl.determinant },
        5,
        3,
    )
    .unwrap();
    assert!(out.passed());

    let bad = ex(&h, "q_1");
    let out = numeric_oracle(
        Check::Determinant,
        Subject::Determinant { matrix: &lvl.f.entries, det: &bad },
        5,
        3,
    )
    .unwrap();
    assert!(!out.passed());
}
