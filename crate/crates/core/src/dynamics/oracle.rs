use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::brackets::BracketTable;
use crate::linalg::{det_field, det_lu_f64, Matrix};
use crate::symexpr::{Expr, ExprError};
use crate::Poly;
use crate::Rational;

/// Numerators and denominators of sampled coordinates lie in `[-BOUND, BOUND]`.
pub const BOUND: i64 = 97;
const RESAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Inverse,
    Antisymmetry,
    Jacobi,
    Determinant,
}

impl Check {
    pub fn as_str(self) -> &'static str {
        match self {
            Check::Inverse => "inverse",
            Check::Antisymmetry => "antisymmetry",
            Check::Jacobi => "jacobi",
            Check::Determinant => "determinant",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Subject<'a> {
    Matrix(&'a Matrix<Expr>),
    Inverse {
        f: &'a Matrix<Expr>,
        inverse: &'a Matrix<Expr>,
    },
    Table(&'a BracketTable),
    Determinant {
        matrix: &'a Matrix<Expr>,
        det: &'a Expr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("check '{0}' does not apply to this subject")]
    Mismatch(&'static str),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("every sampled point was a pole")]
    AllPoles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub point: Vec<(usize, Rational)>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub check: Check,
    pub seed: u64,
    pub trials: usize,
    /// Points at which the identity was evaluated.
    pub evaluated: usize,
    /// Poles rejected while sampling.
    pub rejected: usize,
    pub witness: Option<Witness>,
}

impl OracleOutcome {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Uniform rationals `n/d` with `|n|, |d| <= BOUND` and `d != 0`.
pub fn random_point(symbols: &[usize], rng: &mut impl Rng) -> BTreeMap<usize, Rational> {
    symbols
        .iter()
        .map(|&s| {
            let n = rng.gen_range(-BOUND..=BOUND);
            let mut d = 0;
            while d == 0 {
                d = rng.gen_range(-BOUND..=BOUND);
            }
            (s, Rational::new(BigInt::from(n), BigInt::from(d)))
        })
        .collect()
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn eval_matrix(m: &Matrix<Expr>, p: &BTreeMap<usize, Rational>) -> Result<Matrix<Rational>, ExprError> {
    let rows = (0..m.rows())
        .map(|i| m.row(i).iter().map(|e| e.eval_at(p)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Matrix::from_rows(rows))
}

fn symbols_of<'a>(exprs: impl IntoIterator<Item = &'a Expr>) -> Vec<usize> {
    let mut set = BTreeSet::new();
    for e in exprs {
        set.extend(e.vars());
    }
    set.into_iter().collect()
}

/// `T = n/d` and `∂_w n`, `∂_w d` for each basis symbol `w`, kept as
/// polynomials so gradients are evaluated without normalizing quotients.
struct Partials {
    num: Poly,
    den: Poly,
    dnum: Vec<Poly>,
    dden: Vec<Poly>,
}

fn eval_poly(p: &Poly, at: &BTreeMap<usize, Rational>) -> Result<Rational, ExprError> {
    p.eval_with(|i| at.get(&i).cloned(), Clone::clone).ok_or(ExprError::Unassigned)
}

impl Partials {
    fn new(e: &Expr, basis: &[usize]) -> Self {
        let (num, den) = (e.numer().clone(), e.denom().clone());
        Self {
            dnum: basis.iter().map(|&w| num.derivative(w)).collect(),
            dden: basis.iter().map(|&w| den.derivative(w)).collect(),
            num,
            den,
        }
    }

    /// `∂_w T` for every basis position.
    fn gradient(&self, at: &BTreeMap<usize, Rational>) -> Result<Vec<Rational>, ExprError> {
        let n = eval_poly(&self.num, at)?;
        let d = eval_poly(&self.den, at)?;
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        let d2 = &d * &d;
        self.dnum
            .iter()
            .zip(&self.dden)
            .map(|(dn, dd)| {
                if dn.is_zero() && dd.is_zero() {
                    return Ok(Rational::zero());
                }
                Ok((eval_poly(dn, at)? * &d - &n * eval_poly(dd, at)?) / &d2)
            })
            .collect()
    }
}

/// Verification prepared once per subject and evaluated per point.
enum Prepared<'a> {
    Inverse(&'a Matrix<Expr>, &'a Matrix<Expr>),
    Antisymmetric(&'a Matrix<Expr>),
    Jacobi {
        entries: &'a Matrix<Expr>,
        /// Upper-triangle entries with their partial derivatives over the basis.
        parts: Vec<Vec<Partials>>,
    },
    Determinant(&'a Matrix<Expr>, &'a Expr),
}

impl Prepared<'_> {
    fn symbols(&self) -> Vec<usize> {
        match self {
            Prepared::Inverse(f, g) => symbols_of(f.to_rows().iter().flatten().chain(g.to_rows().iter().flatten()).collect::<Vec<_>>()),
            Prepared::Antisymmetric(m) => symbols_of(m.to_rows().iter().flatten().collect::<Vec<_>>()),
            Prepared::Jacobi { entries, .. } => symbols_of(entries.to_rows().iter().flatten().collect::<Vec<_>>()),
            Prepared::Determinant(m, d) => {
                let mut all: Vec<&Expr> = Vec::new();
                let rows = m.to_rows();
                all.extend(rows.iter().flatten());
                all.push(d);
                symbols_of(all)
            }
        }
    }

    /// `Ok(None)` when the identity holds, `Ok(Some(detail))` when it fails.
    fn evaluate(&self, p: &BTreeMap<usize, Rational>) -> Result<Option<String>, ExprError> {
        match self {
            Prepared::Inverse(f, g) => {
                let (f, g) = (eval_matrix(f, p)?, eval_matrix(g, p)?);
                let prod = f.mul(&g);
                for i in 0..prod.rows() {
                    for j in 0..prod.cols() {
                        let want = if i == j { 1 } else { 0 };
                        if prod[(i, j)] != Rational::from_integer(want.into()) {
                            return Ok(Some(format!("(f·f⁻¹)[{i}][{j}] = {}", prod[(i, j)])));
                        }
                    }
                }
                Ok(None)
            }
            Prepared::Antisymmetric(m) => {
                let v = eval_matrix(m, p)?;
                for i in 0..v.rows() {
                    for j in i..v.cols() {
                        let s = &v[(i, j)] + &v[(j, i)];
                        if !s.is_zero() {
                            return Ok(Some(format!("m[{i}][{j}] + m[{j}][{i}] = {s}")));
                        }
                    }
                }
                Ok(None)
            }
            Prepared::Jacobi { entries, parts } => {
                let t = eval_matrix(entries, p)?;
                let n = t.rows();
                // g[w][j][k] = ∂_w T_jk, antisymmetric in (j, k)
                let mut g = vec![vec![vec![Rational::zero(); n]; n]; n];
                for (j, row) in parts.iter().enumerate() {
                    for (off, e) in row.iter().enumerate() {
                        let k = j + 1 + off;
                        for (w, v) in e.gradient(p)?.into_iter().enumerate() {
                            g[w][k][j] = -v.clone();
                            g[w][j][k] = v;
                        }
                    }
                }
                let inner = |i: usize, j: usize, k: usize| {
                    (0..n).fold(Rational::zero(), |acc, w| {
                        if t[(i, w)].is_zero() {
                            acc
                        } else {
                            acc + &t[(i, w)] * &g[w][j][k]
                        }
                    })
                };
                for i in 0..n {
                    for j in i + 1..n {
                        for k in j + 1..n {
                            let s = inner(i, j, k) + inner(j, k, i) + inner(k, i, j);
                            if !s.is_zero() {
                                return Ok(Some(format!("Jacobi({i},{j},{k}) = {s}")));
                            }
                        }
                    }
                }
                Ok(None)
            }
            Prepared::Determinant(m, d) => {
                let v = eval_matrix(m, p)?;
                let claimed = d.eval_at(p)?;
                let exact = det_field(&v);
                if exact != claimed {
                    return Ok(Some(format!("det = {exact}, expression gives {claimed}")));
                }
                let approx = Matrix::from_fn(v.rows(), v.cols(), |i, j| v[(i, j)].to_f64().unwrap_or(f64::NAN));
                let lu = det_lu_f64(&approx);
                let want = claimed.to_f64().unwrap_or(f64::NAN);
                if (lu - want).abs() > 1e-9 * want.abs().max(1.0) {
                    return Ok(Some(format!("LU det = {lu:e}, exact {want:e}")));
                }
                Ok(None)
            }
        }
    }
}

fn prepare<'a>(check: Check, subject: Subject<'a>) -> Result<Prepared<'a>, OracleError> {
    Ok(match (check, subject) {
        (Check::Inverse, Subject::Inverse { f, inverse }) => Prepared::Inverse(f, inverse),
        (Check::Antisymmetry, Subject::Matrix(m)) => Prepared::Antisymmetric(m),
        (Check::Antisymmetry, Subject::Table(t)) => Prepared::Antisymmetric(&t.entries),
        (Check::Jacobi, Subject::Table(t)) => {
            let n = t.entries.rows();
            Prepared::Jacobi {
                entries: &t.entries,
                parts: (0..n)
                    .map(|j| (j + 1..n).map(|k| Partials::new(&t.entries[(j, k)], &t.basis)).collect())
                    .collect(),
            }
        }
        (Check::Determinant, Subject::Determinant { matrix, det }) => Prepared::Determinant(matrix, det),
        (c, _) => return Err(OracleError::Mismatch(c.as_str())),
    })
}

/// Evaluates the identity behind `check` at `trials` seeded random points,
/// resampling at poles. Stops at the first failing point.
pub fn numeric_oracle(check: Check, subject: Subject<'_>, trials: usize, seed: u64) -> Result<OracleOutcome, OracleError> {
    if trials == 0 {
        return Err(OracleError::NoTrials);
    }
    let prepared = prepare(check, subject)?;
    let symbols = prepared.symbols();
    let mut out = OracleOutcome {
        check,
        seed,
        trials,
        evaluated: 0,
        rejected: 0,
        witness: None,
    };
    for trial in 0..trials {
        let mut rng = trial_rng(seed, trial);
        for _ in 0..RESAMPLES {
            let p = random_point(&symbols, &mut rng);
            match prepared.evaluate(&p) {
                Ok(None) => {
                    out.evaluated += 1;
                    break;
                }
                Ok(Some(detail)) => {
                    out.evaluated += 1;
                    out.witness = Some(Witness {
                        point: p.into_iter().collect(),
                        detail,
                    });
                    return Ok(out);
                }
                Err(_) => out.rejected += 1,
            }
        }
    }
    if out.evaluated == 0 {
        return Err(OracleError::AllPoles);
    }
    Ok(out)
}
