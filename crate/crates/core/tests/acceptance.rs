//! Acceptance run: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use bwcore::brackets::BracketTable;
use bwcore::compare::compare;
use bwcore::dirac::{run_dirac, ConstraintClass, DiracReport};
use bwcore::dynamics::{
    conserved_search, eom_pipeline, hamilton_equations, in_span, numeric_oracle, symmetry_report, Check,
    Subject,
};
use bwcore::linalg::{det_expr, inverse_expr, Matrix};
use bwcore::modelspec::{parse_model_with, Model};
use bwcore::symexpr::{expr_to_string, Monomial};
use bwcore::symplectic::{run_classic_bw, run_modified_bw, AnalysisReport, RunOptions, Verdict};
use bwcore::{Coefficient, Expr};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::{TestCaseError, TestRunner};

const JACOBI_POINTS: usize = 10;
const ODD_MATRICES: u32 = 50;
const DIFF_EXPRESSIONS: u32 = 200;
const DIFF_TOLERANCE: f64 = 1e-6;
const SEED: u64 = 20;

fn bundled(name: &str, over: &[(&str, i64)]) -> Model {
    let path = format!("{}/../../models/{name}.model", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let over: BTreeMap<String, i64> = over.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    parse_model_with(&text, &over).unwrap()
}

fn ex(m: &Model, s: &str) -> Expr {
    m.parse_expr(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn opts(m: &Model) -> RunOptions {
    RunOptions::from_model(m)
}

#[derive(Default)]
struct Crit {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Crit {
    fn ok(&mut self, cond: bool, what: impl FnOnce() -> String) {
        if !cond {
            self.failures.push(what());
        }
    }

    fn same(&mut self, got: &Expr, want: &Expr, m: &Model, what: impl FnOnce() -> String) {
        if got != want {
            let t = &m.symbols;
            self.failures.push(format!(
                "{}: got {}, want {}",
                what(),
                expr_to_string(got, t),
                expr_to_string(want, t)
            ));
        }
    }

    fn matrix(&mut self, got: &Matrix<Expr>, want: &Matrix<Expr>, m: &Model, what: &str) {
        if got.rows() != want.rows() || got.cols() != want.cols() {
            self.failures.push(format!("{what}: shape {}x{} vs {}x{}", got.rows(), got.cols(), want.rows(), want.cols()));
            return;
        }
        for i in 0..got.rows() {
            for j in 0..got.cols() {
                self.same(&got[(i, j)], &want[(i, j)], m, || format!("{what}[{i}][{j}]"));
            }
        }
    }
}

fn names(syms: &[usize], m: &Model) -> Vec<String> {
    syms.iter().map(|&s| m.symbols.name(s).to_string()).collect()
}

fn bracket<'a>(t: &'a BracketTable, m: &Model, a: &str, b: &str) -> &'a Expr {
    t.get(m.sym(a).unwrap(), m.sym(b).unwrap()).unwrap_or_else(|| panic!("{{{a}, {b}}} missing"))
}

fn hypersphere_brackets(c: &mut Crit, t: &BracketTable, m: &Model, n: i64, side: &str) {
    let q2 = (1..=n).map(|i| format!("q_{i}^2")).collect::<Vec<_>>().join(" + ");
    for i in 1..=n {
        for j in 1..=n {
            let (qi, qj, pi, pj) = (format!("q_{i}"), format!("q_{j}"), format!("p_{i}"), format!("p_{j}"));
            let d = if i == j { "1" } else { "0" };
            c.same(bracket(t, m, &qi, &qj), &Expr::zero(), m, || format!("{side} N={n} {{{qi},{qj}}}"));
            let want = ex(m, &format!("{d} - {qi}*{qj}/({q2})"));
            c.same(bracket(t, m, &qi, &pj), &want, m, || format!("{side} N={n} {{{qi},{pj}}}"));
            let want = ex(m, &format!("({pi}*{qj} - {qi}*{pj})/({q2})"));
            c.same(bracket(t, m, &pi, &pj), &want, m, || format!("{side} N={n} {{{pi},{pj}}}"));
        }
    }
}

fn criterion_1(c: &mut Crit) {
    for n in [2i64, 3, 5] {
        let m = bundled("hypersphere", &[("N", n)]);
        let r = run_modified_bw(&m, &opts(&m));
        let fm = &r.final_model;
        c.ok(r.verdict.kind() == "brackets", || format!("N={n}: verdict {}", r.verdict.kind()));
        let lvl = r.last_level();
        c.ok(lvl.injected == 2, || format!("N={n}: final level carries {} constraints", lvl.injected));
        c.ok(!lvl.determinant.is_zero(), || format!("N={n}: final f singular"));

        let nn = n as usize;
        let mut order: Vec<String> = (1..=n).map(|i| format!("q_{i}")).collect();
        order.extend((1..=n).map(|i| format!("p_{i}")));
        order.extend(["eta1".to_string(), "eta2".to_string()]);
        c.ok(names(&lvl.variables, fm) == order, || format!("N={n}: variables {:?}", names(&lvl.variables, fm)));
        let q = |i: usize| ex(fm, &format!("q_{}", i + 1));
        let p = |i: usize| ex(fm, &format!("p_{}", i + 1));
        let delta = |i: usize, j: usize| Expr::integer(i64::from(i == j));
        // blocks: [0, -1, q, p; 1, 0, 0, q; -q^T, 0, 0, 0; -p^T, -q^T, 0, 0]
        let want = Matrix::from_fn(2 * nn + 2, 2 * nn + 2, |i, j| {
            let (bi, ri) = (i / nn.max(1), i % nn);
            let (bj, rj) = (j / nn.max(1), j % nn);
            match (i.min(2 * nn).cmp(&(2 * nn)), j.min(2 * nn).cmp(&(2 * nn))) {
                (std::cmp::Ordering::Less, std::cmp::Ordering::Less) => match (bi, bj) {
                    (0, 1) => -delta(ri, rj),
                    (1, 0) => delta(ri, rj),
                    _ => Expr::zero(),
                },
                (std::cmp::Ordering::Less, _) => match (bi, j - 2 * nn) {
                    (0, 0) => q(ri),
                    (0, _) => p(ri),
                    (1, 0) => Expr::zero(),
                    _ => q(ri),
                },
                (_, std::cmp::Ordering::Less) => match (i - 2 * nn, bj) {
                    (0, 0) => -q(rj),
                    (0, _) => Expr::zero(),
                    (_, 0) => -p(rj),
                    _ => -q(rj),
                },
                _ => Expr::zero(),
            }
        });
        c.matrix(&lvl.f.entries, &want, fm, &format!("N={n} f(2)"));

        let Some(t) = r.brackets() else { continue };
        hypersphere_brackets(c, t, fm, n, "mbw");
        let h = (1..=n).map(|i| format!("p_{i}^2")).collect::<Vec<_>>().join(" + ");
        c.same(r.hamiltonian().unwrap(), &ex(fm, &format!("({h})/2")), fm, || format!("N={n} H"));

        let d = run_dirac(&m, 10).unwrap();
        let chain: Vec<(String, Expr)> = d.chain.constraints.iter().map(|k| (k.label.clone(), k.expr.clone())).collect();
        let sum = |f: &dyn Fn(i64) -> String| (1..=n).map(f).collect::<Vec<_>>().join(" + ");
        let want = [
            ex(&m, "pi"),
            ex(&m, &format!("({} - 1)/2", sum(&|i| format!("q_{i}^2")))),
            ex(&m, &sum(&|i| format!("q_{i}*p_{i}"))),
            ex(&m, &sum(&|i| format!("p_{i}^2 + lambda*q_{i}^2"))),
        ];
        c.ok(chain.len() == 4, || format!("N={n}: dirac chain {:?}", chain.iter().map(|x| &x.0).collect::<Vec<_>>()));
        for ((label, got), w) in chain.iter().zip(&want) {
            c.same(got, w, &m, || format!("N={n} dirac {label}"));
        }
        hypersphere_brackets(c, &d.table, &m, n, "dirac");
        for a in (1..=n).flat_map(|i| [format!("q_{i}"), format!("p_{i}")]) {
            for b in (1..=n).flat_map(|i| [format!("q_{i}"), format!("p_{i}")]) {
                c.ok(bracket(&d.table, &m, &a, &b) == bracket(t, fm, &a, &b), || {
                    format!("N={n}: tables differ at {{{a},{b}}}")
                });
            }
        }
    }
}

fn criterion_2(c: &mut Crit) {
    let m = bundled("toy", &[]);
    let o = opts(&m);
    let r = run_modified_bw(&m, &o);
    let fm = &r.final_model;
    let grid = |rows: &[&[&str]], scale: &str| {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| ex(fm, &format!("({})*({scale})", rows[i][j])))
    };
    let lvl = &r.levels[1];
    c.ok(names(&lvl.variables, fm) == ["x", "p_x", "y", "lambda1"], || "f(1) variables".into());
    c.same(&lvl.determinant, &ex(fm, "(b - a^2)^2"), fm, || "det f(1)".into());
    let f1: &[&[&str]] = &[&["0", "-1", "-a", "-b"], &["1", "0", "0", "a"], &["a", "0", "0", "b"], &["b", "-a", "-b", "0"]];
    c.matrix(&lvl.f.entries, &grid(f1, "1"), fm, "f(1)");
    let inv: &[&[&str]] = &[&["0", "-b", "a", "0"], &["b", "0", "b", "-a"], &["-a", "-b", "0", "1"], &["0", "a", "-1", "0"]];
    let Some(table) = r.brackets() else {
        c.failures.push(format!("toy mbw verdict {}", r.verdict.kind()));
        return;
    };
    c.matrix(&table.entries, &grid(inv, "1/(a^2 - b)"), fm, "f(1) inverse");

    let s = |n: &str| fm.sym(n).unwrap();
    let reduced = hamilton_equations(table, r.hamiltonian().unwrap());
    for (v, want) in [("x", "p_x"), ("p_x", "0"), ("y", "p_x"), ("lambda1", "-a*p_x/b")] {
        c.same(reduced.rate(s(v)).unwrap(), &ex(fm, want), fm, || format!("reduced d{v}/dt"));
    }
    let full = hamilton_equations(table, &fm.potential);
    let xdot = "b/(a^2 - b)*(-p_x + a*(x - y))";
    for (v, want) in [("x", xdot), ("p_x", "0"), ("y", xdot), ("lambda1", "(a*p_x - b*(x - y))/(a^2 - b)")] {
        c.same(full.rate(s(v)).unwrap(), &ex(fm, want), fm, || format!("unreduced d{v}/dt"));
    }
    let theta2 = ex(fm, "-b*p_x + a*b*(x - y)");
    match conserved_search(&full, 1) {
        Ok(span) => {
            c.ok(in_span(&theta2, &span, &full.basis), || "Theta2 outside the degree-1 span".into());
            c.ok(span.iter().all(|q| full.time_derivative(q).is_zero()), || "span not conserved".into());
        }
        Err(e) => c.failures.push(format!("conserved_search: {e}")),
    }

    let dirac = run_dirac(&m, 10).unwrap();
    let cand: Vec<(String, Expr)> = compare(&dirac, &r)
        .dirac_only()
        .iter()
        .map(|row| (row.label.clone(), row.expr.clone()))
        .collect();
    let (next, step) = match eom_pipeline(&r, &cand, 1, None, &o) {
        Ok(x) => x,
        Err(e) => {
            c.failures.push(format!("promotion: {e}"));
            return;
        }
    };
    let nm = &next.final_model;
    let promoted = step.promotion.as_ref().map(|p| p.quantity.clone());
    c.ok(promoted.as_ref() == Some(&ex(nm, "-b*p_x + a*b*(x - y)")), || "promoted quantity is not Theta2".into());
    let Some(l2) = next.levels.get(2) else {
        c.failures.push("no level after promotion".into());
        return;
    };
    let f2: &[&[&str]] = &[
        &["0", "-1", "-a", "-b", "a*b"],
        &["1", "0", "0", "a", "-b"],
        &["a", "0", "0", "b", "-a*b"],
        &["b", "-a", "-b", "0", "0"],
        &["-a*b", "b", "a*b", "0", "0"],
    ];
    let want = Matrix::from_fn(5, 5, |i, j| ex(nm, f2[i][j]));
    c.matrix(&l2.f.entries, &want, nm, "f(2)");
    let nu: Vec<Expr> = ["-b", "0", "-b", "0", "-1"].iter().map(|s| ex(nm, s)).collect();
    c.ok(l2.f.entries.transpose().mul_vec(&nu).iter().all(Expr::is_zero), || "(-b,0,-b,0,-1) not in the kernel".into());
    let grad: Vec<Expr> = l2.variables.iter().map(|&v| nm.potential.derivative(v)).collect();
    let contraction = nu.iter().zip(&grad).fold(Expr::zero(), |acc, (a, g)| &acc + &(a * g));
    c.same(&contraction, &Expr::zero(), nm, || "nu . dH".into());
    let Verdict::Symmetry { generator, delta_v, .. } = &next.verdict else {
        c.failures.push(format!("verdict after promotion: {}", next.verdict.kind()));
        return;
    };
    let k = nu[0].try_div(&generator.components[0]).unwrap_or_else(|_| Expr::zero());
    c.ok(
        !k.is_zero() && generator.components.iter().zip(&nu).all(|(g, w)| &(g * &k) == w),
        || "generator not proportional to (-b,0,-b,0,-1)".into(),
    );
    c.same(delta_v, &Expr::zero(), nm, || "delta V".into());
    let rep = symmetry_report(generator, nm).scaled(&k);
    let s = |n: &str| nm.sym(n).unwrap();
    for (v, want) in [("x", "-b"), ("p_x", "0"), ("y", "-b")] {
        c.same(rep.variation(s(v)).unwrap(), &ex(nm, want), nm, || format!("delta {v}"));
    }
    c.same(&rep.delta_v, &Expr::zero(), nm, || "delta H".into());
}

fn criterion_3(c: &mut Crit) {
    let m = bundled("toy", &[]);
    let d = match run_dirac(&m, 10) {
        Ok(d) => d,
        Err(e) => {
            c.failures.push(format!("dirac: {e}"));
            return;
        }
    };
    let exprs: Vec<&Expr> = d.chain.constraints.iter().map(|k| &k.expr).collect();
    let want = ["p_y + a*x", "a*p_x - b*(x - y)", "-b*p_x + a*b*(x - y)"].map(|s| ex(&m, s));
    c.ok(exprs.len() == 3, || format!("chain length {}", exprs.len()));
    for (i, (g, w)) in exprs.iter().zip(&want).enumerate() {
        c.same(g, w, &m, || format!("chain[{i}]"));
    }
    let cm: &[&[&str]] = &[&["0", "-b + a^2", "0"], &["-(-b + a^2)", "0", "b^2 - a^2*b"], &["0", "-(b^2 - a^2*b)", "0"]];
    let want = Matrix::from_fn(3, 3, |i, j| ex(&m, cm[i][j]));
    c.matrix(&d.dirac_matrix.entries, &want, &m, "C");
    c.same(&det_expr(&d.dirac_matrix.entries), &Expr::zero(), &m, || "det C".into());

    let listed = [
        ("x", "y", "a/(a^2 - b)"),
        ("x", "p_x", "-b/(a^2 - b)"),
        ("y", "p_x", "-b/(a^2 - b)"),
        ("y", "p_y", "a^2/(a^2 - b)"),
    ];
    for (a, b, v) in listed {
        c.same(bracket(&d.table, &m, a, b), &ex(&m, v), &m, || format!("{{{a},{b}}}"));
    }
    // {p_x, p_y}_D = -{p_x, phi} (C_s^-1)_{phi Theta1} {Theta1, p_y} = -(-a)(-1/(a^2 - b))(b)
    let forced = ex(&m, "-a*b/(a^2 - b)");
    c.same(bracket(&d.table, &m, "p_x", "p_y"), &forced, &m, || "{p_x,p_y}".into());
    c.notes.push(format!("listed brackets exact; also {{p_x,p_y}} = {}", expr_to_string(&forced, &m.symbols)));
    let classes: Vec<ConstraintClass> = d.classes.clone();
    c.ok(
        classes == [ConstraintClass::SecondClass, ConstraintClass::SecondClass, ConstraintClass::FirstClass],
        || format!("classes {:?}", classes),
    );
    if let Some(g) = d.generators.first() {
        let dx: BTreeMap<usize, Expr> = g.variations.iter().cloned().collect();
        let s = |n: &str| m.sym(n).unwrap();
        c.same(&dx[&s("x")], &ex(&m, "-b"), &m, || "dirac delta x".into());
        c.same(&dx[&s("y")], &ex(&m, "-b"), &m, || "dirac delta y".into());
        c.same(&dx[&s("p_x")], &Expr::zero(), &m, || "dirac delta p_x".into());
        c.same(&g.delta_h, &Expr::zero(), &m, || "dirac delta H".into());
    } else {
        c.failures.push("no first-class generator".into());
    }
}

fn relativistic_brackets(c: &mut Crit, r: &AnalysisReport, tag: &str) {
    let fm = &r.final_model;
    let Some(t) = r.brackets() else {
        c.failures.push(format!("{tag}: verdict {}", r.verdict.kind()));
        return;
    };
    for nu in 0..4 {
        for mu in 0..4 {
            let (p, x) = (format!("p{nu}"), format!("x{mu}"));
            // p_mu with the index lowered by (+,-,-,-)
            let lowered = if mu == 0 { "p0".to_string() } else { format!("(-p{mu})") };
            let want = format!("{} - {}*{lowered}/p0", i64::from(nu == mu), i64::from(nu == 0));
            c.same(bracket(t, fm, &p, &x), &ex(fm, &want), fm, || format!("{tag} {{{p},{x}}}"));
            c.same(bracket(t, fm, &format!("x{nu}"), &x), &Expr::zero(), fm, || format!("{tag} {{x{nu},{x}}}"));
            c.same(bracket(t, fm, &p, &format!("p{mu}")), &Expr::zero(), fm, || format!("{tag} {{{p},p{mu}}}"));
        }
    }
    for (a, b, v) in [
        ("lambda", "p0", "1/(2*p0)"),
        ("lambda", "eta", "-1/(2*p0)"),
        ("eta", "x0", "1"),
        ("eta", "x1", "-p1/p0"),
        ("eta", "x2", "-p2/p0"),
        ("eta", "x3", "-p3/p0"),
        ("p1", "lambda", "0"),
    ] {
        c.same(bracket(t, fm, a, b), &ex(fm, v), fm, || format!("{tag} {{{a},{b}}}"));
    }
}

fn criterion_4(c: &mut Crit) {
    let m = bundled("relativistic", &[]);
    let r = run_modified_bw(&m, &opts(&m));
    let fm = &r.final_model;
    let l0 = &r.levels[0];
    let nu: Vec<Expr> = ["2*p0", "-2*p1", "-2*p2", "-2*p3", "0", "0", "0", "0", "1"].iter().map(|s| ex(fm, s)).collect();
    c.ok(l0.zero_modes.len() == 1 && l0.zero_modes[0].components == nu, || "level-0 zero mode".into());
    c.ok(l0.candidates.first().is_some_and(|k| k.contraction.is_zero()), || "level-0 contraction".into());

    let Some(l1) = r.levels.get(1) else {
        c.failures.push("no gauge-fixed level".into());
        return;
    };
    let order = ["x0", "x1", "x2", "x3", "p0", "p1", "p2", "p3", "lambda", "eta"];
    c.ok(names(&l1.variables, fm) == order, || format!("variables {:?}", names(&l1.variables, fm)));
    c.ok(!l1.determinant.is_zero(), || "gauge-fixed f singular".into());
    let lowered = |k: usize| if k == 0 { ex(fm, "p0") } else { ex(fm, &format!("-p{k}")) };
    let want = Matrix::from_fn(10, 10, |i, j| match (i, j) {
        (0..=3, 4..=7) => Expr::integer(i64::from(i + 4 == j)),
        (4..=7, 0..=3) => Expr::integer(-i64::from(i == j + 4)),
        (4..=7, 8) => &Expr::integer(2) * &lowered(i - 4),
        (8, 4..=7) => &Expr::integer(-2) * &lowered(j - 4),
        (0, 9) => Expr::integer(1),
        (9, 0) => Expr::integer(-1),
        _ => Expr::zero(),
    });
    c.matrix(&l1.f.entries, &want, fm, "gauge-fixed f");
    if let Some(t) = r.brackets() {
        c.ok(l1.f.entries.mul(&t.entries).is_identity(), || "f f^-1 != 1".into());
        c.ok(t.entries.is_antisymmetric(), || "inverse not antisymmetric".into());
    }
    relativistic_brackets(c, &r, "relativistic");
    c.same(r.hamiltonian().unwrap_or(&Expr::zero()), &ex(fm, "c*p0"), fm, || "H".into());
    if let Verdict::Brackets { rules, rewrites, .. } = &r.verdict {
        let p0 = fm.sym("p0").unwrap();
        let rhs = ex(fm, "p1^2 + p2^2 + p3^2 + m^2*c^2");
        c.ok(
            rules.iter().any(|k| k.pattern == Monomial::var(p0, 2) && k.replacement == rhs),
            || "rule p0^2 -> p_i^2 + m^2 c^2 missing".into(),
        );
        c.ok(
            rewrites.branches.get(&p0).map(|b| b.as_char()) == Some('+'),
            || "branch + for p0 missing".into(),
        );
    }

    let z = bundled("relativistic_zeta", &[]);
    let rz = run_modified_bw(&z, &opts(&z));
    relativistic_brackets(c, &rz, "zeta");
    if let (Some(a), Some(b)) = (r.brackets(), rz.brackets()) {
        let zm = &rz.final_model;
        for x in order {
            for y in order {
                c.ok(bracket(a, fm, x, y) == bracket(b, zm, x, y), || format!("zeta table differs at {{{x},{y}}}"));
            }
        }
    }
}

fn criterion_5(c: &mut Crit) {
    let m = bundled("toy", &[]);
    let r = run_classic_bw(&m, &opts(&m));
    let fm = &r.final_model;
    c.ok(r.verdict.kind() == "brackets", || format!("classic verdict {}", r.verdict.kind()));
    c.ok(r.chain.len() == 1, || format!("classic chain has {} members", r.chain.len()));
    if let Some(k) = r.chain.first() {
        c.same(&k.expr, &ex(fm, "a*p_x - b*(x - y)"), fm, || "classic chain[0]".into());
    }
    let d = run_dirac(&m, 10).unwrap();
    let cmp = compare(&d, &r);
    let only: Vec<&str> = cmp.dirac_only().iter().map(|row| row.label.as_str()).collect();
    c.ok(only == ["chi2"], || format!("dirac-only entries {only:?}"));
    c.ok(cmp.symplectic_only().is_empty(), || "symplectic-only entries present".into());
    c.ok(cmp.table.as_ref().is_some_and(Vec::is_empty), || "bracket tables differ".into());
}

/// Every run the bundled models produce: both symplectic algorithms, the
/// promoted toy run and the Dirac engine.
fn all_runs() -> (Vec<AnalysisReport>, Vec<DiracReport>) {
    let models = [
        bundled("toy", &[]),
        bundled("hypersphere", &[("N", 2)]),
        bundled("hypersphere", &[("N", 3)]),
        bundled("hypersphere", &[("N", 5)]),
        bundled("relativistic", &[]),
        bundled("relativistic_zeta", &[]),
        bundled("free", &[]),
    ];
    let mut sym = Vec::new();
    let mut dir = Vec::new();
    for m in &models {
        let o = opts(m);
        sym.push(run_classic_bw(m, &o));
        sym.push(run_modified_bw(m, &o));
        if m.dirac.is_some() {
            if let Ok(d) = run_dirac(m, 10) {
                dir.push(d);
            }
        }
    }
    let toy = &models[0];
    let o = opts(toy);
    let r = run_modified_bw(toy, &o);
    let d = run_dirac(toy, 10).unwrap();
    let cand: Vec<(String, Expr)> = compare(&d, &r).dirac_only().iter().map(|x| (x.label.clone(), x.expr.clone())).collect();
    if let Ok((next, _)) = eom_pipeline(&r, &cand, 2, None, &o) {
        sym.push(next);
    }
    (sym, dir)
}

fn criterion_6(c: &mut Crit) {
    let (sym, dir) = all_runs();
    let (mut modes, mut inverses, mut tables) = (0, 0, 0);
    for r in &sym {
        let tag = format!("{} {}", r.model_name, r.algorithm.tag());
        for l in &r.levels {
            for (k, z) in l.zero_modes.iter().enumerate() {
                modes += 1;
                let res = l.f.entries.transpose().mul_vec(&z.components);
                c.ok(res.iter().all(Expr::is_zero), || format!("{tag} level {} mode {k}: residual", l.index));
            }
        }
        if let Some(t) = r.brackets() {
            inverses += 1;
            c.ok(r.last_level().f.entries.mul(&t.entries).is_identity(), || format!("{tag}: f f^-1 != 1"));
            tables += 1;
            jacobi(c, t, &tag);
        }
    }
    for d in &dir {
        let tag = format!("{} dirac", d.model_name);
        let second: Vec<usize> = (0..d.classes.len()).filter(|&i| d.classes[i] == ConstraintClass::SecondClass).collect();
        if !second.is_empty() {
            let cs = d.dirac_matrix.entries.submatrix(&second, &second);
            match inverse_expr(&cs) {
                Some(inv) => {
                    inverses += 1;
                    c.ok(cs.mul(&inv).is_identity(), || format!("{tag}: C_s C_s^-1 != 1"));
                }
                None => c.failures.push(format!("{tag}: second-class block singular")),
            }
        }
        tables += 1;
        jacobi(c, &d.table, &tag);
    }
    c.notes.push(format!("{modes} zero modes, {inverses} inverses, {tables} tables"));

    let cfg = common::fixed_seed(ODD_MATRICES);
    let odd = (0usize..3).prop_flat_map(|k| {
        let n = 2 * k + 1;
        proptest::collection::vec(common::expr_strategy(), n * (n - 1) / 2).prop_map(move |v| (n, v))
    });
    let result = TestRunner::new(cfg).run(&odd, |(n, upper)| {
        let mut it = upper.into_iter();
        let mut a = Matrix::from_fn(n, n, |_, _| Expr::zero());
        for i in 0..n {
            for j in i + 1..n {
                let e = it.next().unwrap();
                a[(j, i)] = -e.clone();
                a[(i, j)] = e;
            }
        }
        prop_assert!(a.is_antisymmetric());
        prop_assert!(det_expr(&a).is_zero());
        Ok(())
    });
    if let Err(e) = result {
        c.failures.push(format!("odd antisymmetric determinant: {e}"));
    }

    let cfg = proptest::test_runner::Config { max_global_rejects: 100_000, ..common::fixed_seed(DIFF_EXPRESSIONS) };
    let worst = std::cell::Cell::new(0.0f64);
    let result = TestRunner::new(cfg).run(
        &(common::expr_strategy(), common::point(common::NVARS), 0..common::NVARS),
        |(e, p, var)| {
            prop_assume!(e.vars().contains(&var));
            let pf: BTreeMap<usize, f64> = p.iter().map(|(k, v)| (*k, Coefficient::to_f64(v))).collect();
            let eval = |e: &Expr, at: &BTreeMap<usize, f64>| e.eval_with(|i| at.get(&i).copied(), Coefficient::to_f64).ok();
            let den = eval(&Expr::from_poly(e.denom().clone()), &pf);
            prop_assume!(den.is_some_and(|d| d.abs() >= 0.1));
            let exact = eval(&e.derivative(var), &pf).ok_or_else(|| TestCaseError::reject("pole"))?;
            let h = 1e-3 * pf[&var].abs().max(1.0);
            let at = |k: f64| {
                let mut q = pf.clone();
                *q.get_mut(&var).unwrap() += k * h;
                eval(&e, &q)
            };
            let (Some(f2), Some(f1), Some(g1), Some(g2)) = (at(2.0), at(1.0), at(-1.0), at(-2.0)) else {
                return Err(TestCaseError::reject("pole near the point"));
            };
            let fd = (-f2 + 8.0 * f1 - 8.0 * g1 + g2) / (12.0 * h);
            let err = (fd - exact).abs() / exact.abs().max(1.0);
            worst.set(worst.get().max(err));
            prop_assert!(err < DIFF_TOLERANCE, "{fd} vs {exact} (relative {err:e})");
            Ok(())
        },
    );
    if let Err(e) = result {
        c.failures.push(format!("finite differences: {e}"));
    }
    c.notes.push(format!("worst finite-difference error {:.1e}", worst.get()));
}

fn jacobi(c: &mut Crit, t: &BracketTable, tag: &str) {
    match numeric_oracle(Check::Jacobi, Subject::Table(t), JACOBI_POINTS, SEED) {
        Ok(o) if o.passed() && o.evaluated == JACOBI_POINTS => {}
        Ok(o) => c.failures.push(format!("{tag}: Jacobi failed after {} points: {:?}", o.evaluated, o.witness)),
        Err(e) => c.failures.push(format!("{tag}: Jacobi oracle: {e}")),
    }
}

fn main() {
    let criteria: [(&str, fn(&mut Crit)); 6] = [
        ("hypersphere symplectic and Dirac brackets (N = 2, 3, 5), exact", criterion_1),
        ("toy symplectic chain, equations of motion and promoted symmetry, exact", criterion_2),
        ("toy Dirac chain, constraint matrix and partial brackets, exact", criterion_3),
        ("relativistic gauge fixing, brackets and strong imposition, exact", criterion_4),
        ("classic iteration misses one Dirac constraint on the toy model", criterion_5),
        ("property suites: residuals, inverses, Jacobi at 10 points, odd determinants, derivatives < 1e-6", criterion_6),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut c = Crit::default();
        if let Err(p) = catch_unwind(AssertUnwindSafe(|| run(&mut c))) {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            c.failures.push(format!("panicked: {msg}"));
        }
        let verdict = if c.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {title} [{:.2}s]", i + 1, start.elapsed().as_secs_f64());
        for n in &c.notes {
            println!("    note: {n}");
        }
        for f in &c.failures {
            println!("    {f}");
        }
        failed += usize::from(!c.failures.is_empty());
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
