use num_traits::Zero;

use super::{poisson, DiracError, PhaseSpace};
use crate::brackets::BracketTable;
use crate::linalg::{independent_rows, inverse_expr, inverse_poly, Matrix};
use crate::modelspec::{ConstraintDecl, Origin};
use crate::symexpr::{Expr, Poly, RewriteSystem, SymbolTable};
use crate::symplectic::weakly_zero;

/// A consistency condition solved for the primary multipliers instead of
/// producing a constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFix {
    pub constraint: String,
    /// `{χ, H_c} + Σ u_a {χ, φ_a} = 0`, written as its `u`-free part.
    pub condition: Expr,
    pub primaries: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintChain {
    pub constraints: Vec<ConstraintDecl>,
    pub fixings: Vec<MultiplierFix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintClass {
    FirstClass,
    SecondClass,
}

impl ConstraintClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintClass::FirstClass => "first-class",
            ConstraintClass::SecondClass => "second-class",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiracMatrix {
    pub labels: Vec<String>,
    pub entries: Matrix<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub constraint: String,
    /// `δz / ε` for each basis symbol.
    pub variations: Vec<(usize, Expr)>,
    pub delta_h: Expr,
}

fn weak(e: &Expr, chain: &[ConstraintDecl], symbols: &SymbolTable) -> bool {
    weakly_zero(e, chain, &RewriteSystem::new(), symbols).unwrap_or(false)
}

/// Iterates `χ̇ = {χ, H_c} + Σ u_a {χ, φ_a}` over the growing chain. The
/// `u`-free part `{χ, H_c}` becomes a secondary constraint whenever it is not
/// weakly zero; otherwise a nonvanishing `{χ, φ_a}` records a multiplier
/// fixing.
pub fn consistency_chain(
    h: &Expr,
    primaries: &[ConstraintDecl],
    ps: &PhaseSpace,
    symbols: &SymbolTable,
    max_level: usize,
) -> Result<ConstraintChain, DiracError> {
    let mut chain: Vec<ConstraintDecl> = primaries.to_vec();
    let mut generation: Vec<usize> = vec![0; chain.len()];
    let mut fixings = Vec::new();
    let mut next_label = 1;
    let mut i = 0;
    while i < chain.len() {
        let chi = chain[i].clone();
        let cond = poisson(&chi.expr, h, ps);
        let u_terms: Vec<(String, Expr)> = primaries
            .iter()
            .map(|p| (p.label.clone(), poisson(&chi.expr, &p.expr, ps)))
            .filter(|(_, c)| !weak(c, &chain, symbols))
            .collect();
        if weak(&cond, &chain, symbols) {
            if !u_terms.is_empty() {
                fixings.push(MultiplierFix {
                    constraint: chi.label.clone(),
                    condition: cond,
                    primaries: u_terms.into_iter().map(|(l, _)| l).collect(),
                });
            }
        } else if cond.vars().iter().all(|&s| !symbols.is_variable(s)) {
            if u_terms.is_empty() {
                return Err(DiracError::Inconsistent(chi.label.clone()));
            }
            fixings.push(MultiplierFix {
                constraint: chi.label.clone(),
                condition: cond,
                primaries: u_terms.into_iter().map(|(l, _)| l).collect(),
            });
        } else {
            let g = generation[i] + 1;
            if g > max_level {
                return Err(DiracError::LevelLimit(max_level));
            }
            let label = loop {
                let l = format!("chi{next_label}");
                next_label += 1;
                if !chain.iter().any(|c| c.label == l) {
                    break l;
                }
            };
            chain.push(ConstraintDecl::new(label, cond, Origin::Secondary(g)));
            generation.push(g);
        }
        i += 1;
    }
    Ok(ConstraintChain {
        constraints: chain,
        fixings,
    })
}

/// `C_ij = {φ_i, φ_j}`; entries that are weakly zero modulo `chain` are set
/// to zero when `weak_zero` is set.
pub fn dirac_matrix(
    constraints: &[ConstraintDecl],
    chain: &[ConstraintDecl],
    ps: &PhaseSpace,
    symbols: &SymbolTable,
    weak_zero: bool,
) -> DiracMatrix {
    let n = constraints.len();
    let mut entries = Matrix::from_fn(n, n, |_, _| Expr::zero());
    for i in 0..n {
        for j in i + 1..n {
            let mut c = poisson(&constraints[i].expr, &constraints[j].expr, ps);
            if weak_zero && weak(&c, chain, symbols) {
                c = Expr::zero();
            }
            entries[(j, i)] = -c.clone();
            entries[(i, j)] = c;
        }
    }
    DiracMatrix {
        labels: constraints.iter().map(|c| c.label.clone()).collect(),
        entries,
    }
}

/// Second-class members form a greedy maximal set of independent rows of the
/// weakly reduced `C` (in chain order); the others are first-class.
pub fn classify(chain: &[ConstraintDecl], ps: &PhaseSpace, symbols: &SymbolTable) -> Vec<ConstraintClass> {
    let c = dirac_matrix(chain, chain, ps, symbols, true);
    let second = independent_rows(&c.entries);
    (0..chain.len())
        .map(|i| {
            if second.contains(&i) {
                ConstraintClass::SecondClass
            } else {
                ConstraintClass::FirstClass
            }
        })
        .collect()
}

/// `{A, B}_D = {A, B} − Σ {A, φ_i} (C⁻¹)_ij {φ_j, B}` over `basis`.
pub fn dirac_bracket_table(
    subset: &[ConstraintDecl],
    ps: &PhaseSpace,
    basis: &[usize],
) -> Result<BracketTable, DiracError> {
    let n = basis.len();
    let z: Vec<Expr> = basis.iter().map(|&s| Expr::var(s)).collect();
    let mut entries = Matrix::from_fn(n, n, |i, j| poisson(&z[i], &z[j], ps));
    if !subset.is_empty() {
        let c = Matrix::from_fn(subset.len(), subset.len(), |i, j| {
            poisson(&subset[i].expr, &subset[j].expr, ps)
        });
        // a[k][i] = {z_k, φ_i}
        let a: Vec<Vec<Expr>> = z
            .iter()
            .map(|zk| subset.iter().map(|phi| poisson(zk, &phi.expr, ps)).collect())
            .collect();
        let corr = if c.to_rows().iter().flatten().chain(a.iter().flatten()).all(|e| e.denom().is_constant()) {
            poly_correction(&c, &a)?
        } else {
            expr_correction(&c, &a)?
        };
        for k in 0..n {
            for l in k + 1..n {
                let d = &entries[(k, l)] + &corr[(k, l)];
                entries[(l, k)] = -d.clone();
                entries[(k, l)] = d;
            }
        }
    }
    Ok(BracketTable::new(basis.to_vec(), entries))
}

// corr[k][l] = Σ_ij a[k][i] C⁻¹_ij a[l][j], using {φ_j, z_l} = −a[l][j].
fn poly_correction(c: &Matrix<Expr>, a: &[Vec<Expr>]) -> Result<Matrix<Expr>, DiracError> {
    let cp = Matrix::from_fn(c.rows(), c.cols(), |i, j| c[(i, j)].numer().clone());
    let (adj, det) = inverse_poly(&cp).ok_or(DiracError::SingularC)?;
    let m = c.rows();
    let w: Vec<Vec<Poly>> = a
        .iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .filter(|(i, x)| !x.is_zero() && !adj[(*i, j)].is_zero())
                        .fold(Poly::zero(), |acc, (i, x)| &acc + &(x.numer() * &adj[(i, j)]))
                })
                .collect()
        })
        .collect();
    let n = a.len();
    Ok(Matrix::from_fn(n, n, |k, l| {
        if k >= l {
            return Expr::zero();
        }
        let num = w[k]
            .iter()
            .zip(&a[l])
            .filter(|(x, y)| !x.is_zero() && !y.is_zero())
            .fold(Poly::zero(), |acc, (x, y)| &acc + &(x * y.numer()));
        Expr::new(num, det.clone()).expect("determinant is nonzero")
    }))
}

fn expr_correction(c: &Matrix<Expr>, a: &[Vec<Expr>]) -> Result<Matrix<Expr>, DiracError> {
    let inv = inverse_expr(c).ok_or(DiracError::SingularC)?;
    let m = c.rows();
    let w: Vec<Vec<Expr>> = a
        .iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, x)| !x.is_zero())
                        .fold(Expr::zero(), |acc, (i, x)| &acc + &(x * &inv[(i, j)]))
                })
                .collect()
        })
        .collect();
    let n = a.len();
    Ok(Matrix::from_fn(n, n, |k, l| {
        if k >= l {
            return Expr::zero();
        }
        w[k].iter()
            .zip(&a[l])
            .filter(|(x, y)| !x.is_zero() && !y.is_zero())
            .fold(Expr::zero(), |acc, (x, y)| &acc + &(x * y))
    }))
}

/// `δz = ε {z, c}` under `table`, with the induced `δH`.
pub fn first_class_generator(c: &ConstraintDecl, table: &BracketTable, h: &Expr) -> Generator {
    let variations: Vec<(usize, Expr)> = table
        .basis
        .iter()
        .map(|&z| (z, table.bracket(&Expr::var(z), &c.expr)))
        .collect();
    let delta_h = variations
        .iter()
        .filter(|(_, d)| !d.is_zero())
        .fold(Expr::zero(), |acc, (z, d)| &acc + &(&h.derivative(*z) * d));
    Generator {
        constraint: c.label.clone(),
        variations,
        delta_h,
    }
}
