//! Dense matrices over the scalar traits.
//!
//! Field routines (Gauss-Jordan, null space) serve exact rational and float
//! oracles. Matrices of rational functions go through fraction-free
//! elimination over polynomials: row denominators are cleared first, so every
//! intermediate division is exact and no GCD is taken until the end.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::{One, Zero};

use crate::scalar::{Field, IntegralDomain, Ring};
use crate::symexpr::{lcm, Expr, Poly};

#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut l = f.debug_list();
        for r in 0..self.rows {
            l.entry(&&self.data[r * self.cols..(r + 1) * self.cols]);
        }
        l.finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn try_map<U: Clone, E>(&self, f: impl Fn(&T) -> Result<U, E>) -> Result<Matrix<U>, E> {
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect::<Result<_, _>>()?,
        })
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])].clone())
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        Self::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                let a = &self[(r, k)];
                let b = &rhs[(k, c)];
                if !a.is_zero() && !b.is_zero() {
                    acc = acc + a.clone() * b.clone();
                }
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|r| {
                let mut acc = T::zero();
                for (k, x) in v.iter().enumerate() {
                    let a = &self[(r, k)];
                    if !a.is_zero() && !x.is_zero() {
                        acc = acc + a.clone() * x.clone();
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|r| {
                self[(r, r)].is_zero()
                    && (r + 1..self.cols).all(|c| self[(r, c)] == -self[(c, r)].clone())
            })
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }
}

fn choose_pivot<T: Ring>(m: &Matrix<T>, col: usize, from: usize) -> Option<usize> {
    (from..m.rows)
        .filter(|&r| !m[(r, col)].is_zero())
        .min_by_key(|&r| m[(r, col)].pivot_weight())
}

/// Bareiss determinant over an integral domain.
pub fn bareiss_det<T: IntegralDomain>(m: &Matrix<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows;
    if n == 0 {
        return T::one();
    }
    let mut a = m.clone();
    let mut prev = T::one();
    let mut negate = false;
    for k in 0..n {
        let Some(p) = choose_pivot(&a, k, k) else {
            return T::zero();
        };
        if p != k {
            a.swap_rows(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[(k, k)].clone() * a[(i, j)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                a[(i, j)] = v.exact_div(&prev).expect("Bareiss division is exact");
            }
            a[(i, k)] = T::zero();
        }
        prev = a[(k, k)].clone();
    }
    if negate {
        -prev
    } else {
        prev
    }
}

/// Fraction-free row echelon form. Returns the pivot columns; rows past the
/// rank are zero.
pub fn fraction_free_echelon<T: IntegralDomain>(a: &mut Matrix<T>) -> Vec<usize> {
    let mut prev = T::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = choose_pivot(a, c, r) else {
            continue;
        };
        a.swap_rows(p, r);
        for i in r + 1..a.rows {
            for j in c + 1..a.cols {
                let v = a[(r, c)].clone() * a[(i, j)].clone() - a[(i, c)].clone() * a[(r, j)].clone();
                a[(i, j)] = v.exact_div(&prev).expect("fraction-free division is exact");
            }
            a[(i, c)] = T::zero();
        }
        prev = a[(r, c)].clone();
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Determinant over a field by Gaussian elimination.
pub fn det_field<T: Field>(m: &Matrix<T>) -> T {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut det = T::one();
    for k in 0..n {
        let Some(p) = choose_pivot(&a, k, k) else {
            return T::zero();
        };
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let piv = a[(k, k)].clone();
        det = det * piv.clone();
        for i in k + 1..n {
            if a[(i, k)].is_zero() {
                continue;
            }
            let f = a[(i, k)].clone() / piv.clone();
            for j in k + 1..n {
                let v = a[(i, j)].clone() - f.clone() * a[(k, j)].clone();
                a[(i, j)] = v;
            }
            a[(i, k)] = T::zero();
        }
    }
    det
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<T: Field>(a: &mut Matrix<T>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols {
        if r == a.rows {
            break;
        }
        let Some(p) = choose_pivot(a, c, r) else {
            continue;
        };
        a.swap_rows(p, r);
        let inv = T::one() / a[(r, c)].clone();
        for j in c..a.cols {
            let v = a[(r, j)].clone() * inv.clone();
            a[(r, j)] = v;
        }
        for i in 0..a.rows {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..a.cols {
                let v = a[(i, j)].clone() - f.clone() * a[(r, j)].clone();
                a[(i, j)] = v;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_field<T: Field>(m: &Matrix<T>) -> usize {
    rref(&mut m.clone()).len()
}

/// Right null space over a field; each free column in turn is set to one.
pub fn kernel_field<T: Field>(m: &Matrix<T>) -> Vec<Vec<T>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    free_columns(a.cols, &pivots)
        .into_iter()
        .map(|f| {
            let mut v = vec![T::zero(); a.cols];
            v[f] = T::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[(r, f)].clone();
            }
            v
        })
        .collect()
}

pub fn inverse_field<T: Field>(m: &Matrix<T>) -> Option<Matrix<T>> {
    assert!(m.is_square(), "inverse of a non-square matrix");
    let n = m.rows;
    let mut a = Matrix::from_fn(n, 2 * n, |r, c| {
        if c < n {
            m[(r, c)].clone()
        } else if c - n == r {
            T::one()
        } else {
            T::zero()
        }
    });
    let pivots = rref(&mut a);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(Matrix::from_fn(n, n, |r, c| a[(r, c + n)].clone()))
}

fn free_columns(cols: usize, pivots: &[usize]) -> Vec<usize> {
    (0..cols).filter(|c| !pivots.contains(c)).collect()
}

/// Partial-pivoting LU determinant in floating point.
pub fn det_lu_f64(m: &Matrix<f64>) -> f64 {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.rows;
    let mut a = m.clone();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].abs().total_cmp(&a[(j, k)].abs()))
            .unwrap();
        if a[(p, k)] == 0.0 {
            return 0.0;
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        det *= a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / a[(k, k)];
            for j in k + 1..n {
                a[(i, j)] -= f * a[(k, j)];
            }
        }
    }
    det
}

/// Rows scaled to polynomials, with the multiplier used for each row.
fn clear_row_denominators(m: &Matrix<Expr>) -> (Matrix<Poly>, Vec<Poly>) {
    let mut d = Vec::with_capacity(m.rows);
    let mut data = Vec::with_capacity(m.rows * m.cols);
    for r in 0..m.rows {
        let mut l = Poly::one();
        for e in m.row(r) {
            if !e.denom().is_one() {
                l = lcm(&l, e.denom());
            }
        }
        for e in m.row(r) {
            let q = l.div_exact(e.denom()).expect("lcm is a multiple");
            data.push(&q * e.numer());
        }
        d.push(l);
    }
    (
        Matrix {
            rows: m.rows,
            cols: m.cols,
            data,
        },
        d,
    )
}

pub fn det_expr(m: &Matrix<Expr>) -> Expr {
    let (p, d) = clear_row_denominators(m);
    let det = bareiss_det(&p);
    if det.is_zero() {
        return Expr::zero();
    }
    let scale = d.iter().fold(Poly::one(), |acc, x| &acc * x);
    Expr::new(det, scale).expect("row multipliers are nonzero")
}

pub fn rank_expr(m: &Matrix<Expr>) -> usize {
    let (mut p, _) = clear_row_denominators(m);
    fraction_free_echelon(&mut p).len()
}

/// Right null space of a rational-function matrix. Each vector has one free
/// component equal to one and zeros in the other free components.
pub fn kernel_expr(m: &Matrix<Expr>) -> Vec<Vec<Expr>> {
    let (mut p, _) = clear_row_denominators(m);
    let pivots = fraction_free_echelon(&mut p);
    let cols = p.cols;
    free_columns(cols, &pivots)
        .into_iter()
        .map(|f| {
            let mut v = vec![Expr::zero(); cols];
            v[f] = Expr::one();
            for (r, &pc) in pivots.iter().enumerate().rev() {
                let mut acc = Poly::zero();
                let mut s = Expr::zero();
                for j in pc + 1..cols {
                    if p[(r, j)].is_zero() || v[j].is_zero() {
                        continue;
                    }
                    if v[j].is_one() {
                        acc = &acc + &p[(r, j)];
                    } else {
                        s = &s + &(&Expr::from_poly(p[(r, j)].clone()) * &v[j]);
                    }
                }
                let total = &s + &Expr::from_poly(acc);
                v[pc] = -total
                    .try_div(&Expr::from_poly(p[(r, pc)].clone()))
                    .expect("pivot is nonzero");
            }
            v
        })
        .collect()
}

/// Fraction-free Gauss-Jordan on `[M | I]`: returns `(N, d)` with
/// `M⁻¹ = N / d`, or `None` when singular.
pub fn inverse_poly(m: &Matrix<Poly>) -> Option<(Matrix<Poly>, Poly)> {
    assert!(m.is_square(), "inverse of a non-square matrix");
    let n = m.rows;
    let mut a = Matrix::from_fn(n, 2 * n, |r, c| {
        if c < n {
            m[(r, c)].clone()
        } else if c - n == r {
            Poly::one()
        } else {
            Poly::zero()
        }
    });
    let mut prev = Poly::one();
    for k in 0..n {
        let piv = choose_pivot(&a, k, k)?;
        a.swap_rows(piv, k);
        for i in 0..n {
            if i == k {
                continue;
            }
            for j in 0..2 * n {
                if j == k {
                    continue;
                }
                let v = &(&a[(k, k)] * &a[(i, j)]) - &(&a[(i, k)] * &a[(k, j)]);
                a[(i, j)] = v.div_exact(&prev).expect("fraction-free division is exact");
            }
            a[(i, k)] = Poly::zero();
        }
        prev = a[(k, k)].clone();
    }
    Some((Matrix::from_fn(n, n, |r, c| a[(r, c + n)].clone()), prev))
}

/// Inverse of a rational-function matrix via [`inverse_poly`] after clearing
/// row denominators. `None` when singular.
pub fn inverse_expr(m: &Matrix<Expr>) -> Option<Matrix<Expr>> {
    let (p, d) = clear_row_denominators(m);
    let (adj, det) = inverse_poly(&p)?;
    Some(Matrix::from_fn(m.rows, m.rows, |r, c| {
        Expr::new(&adj[(r, c)] * &d[c], det.clone()).expect("final pivot is nonzero")
    }))
}

/// Indices of a greedy maximal set of linearly independent rows.
pub fn independent_rows(m: &Matrix<Expr>) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for r in 0..m.rows {
        let mut trial = chosen.clone();
        trial.push(r);
        let sub = m.submatrix(&trial, &(0..m.cols).collect::<Vec<_>>());
        if rank_expr(&sub) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::{parse_expr, SymbolKind, SymbolTable};
    use crate::Rational;

    fn toy_table() -> SymbolTable {
        let mut t = SymbolTable::new();
        for n in ["a", "b"] {
            t.declare(n, SymbolKind::Parameter).unwrap();
        }
        t
    }

    fn mat(t: &SymbolTable, rows: &[&[&str]]) -> Matrix<Expr> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_expr(s, t).unwrap()).collect())
                .collect(),
        )
    }

    #[test]
    fn rational_field_routines() {
        let q = |n: i64| Rational::from_integer(n.into());
        let m = Matrix::from_rows(vec![
            vec![q(2), q(1), q(0)],
            vec![q(1), q(3), q(1)],
            vec![q(0), q(1), q(4)],
        ]);
        assert_eq!(det_field(&m), q(18));
        assert_eq!(bareiss_det(&m), q(18));
        let inv = inverse_field(&m).unwrap();
        assert!(m.mul(&inv).is_identity());
        let s = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        let k = kernel_field(&s);
        assert_eq!(k, vec![vec![q(-2), q(1)]]);
        assert!(inverse_field(&s).is_none());
    }

    #[test]
    fn toy_level_one() {
        let t = toy_table();
        let f = mat(
            &t,
            &[
                &["0", "-1", "-a", "-b"],
                &["1", "0", "0", "a"],
                &["a", "0", "0", "b"],
                &["b", "-a", "-b", "0"],
            ],
        );
        assert!(f.is_antisymmetric());
        assert_eq!(det_expr(&f), parse_expr("(b - a^2)^2", &t).unwrap());
        let inv = inverse_expr(&f).unwrap();
        assert!(f.mul(&inv).is_identity());
        assert!(inv.is_antisymmetric());
        assert_eq!(inv[(0, 1)], parse_expr("-b/(a^2 - b)", &t).unwrap());
        assert!(kernel_expr(&f).is_empty());
    }

    #[test]
    fn singular_kernel() {
        let t = toy_table();
        let f = mat(&t, &[&["0", "-1", "-a"], &["1", "0", "0"], &["a", "0", "0"]]);
        assert!(det_expr(&f).is_zero());
        let k = kernel_expr(&f);
        assert_eq!(k.len(), 1);
        assert!(f.mul_vec(&k[0]).iter().all(Zero::is_zero));
        assert!(inverse_expr(&f).is_none());
        assert_eq!(rank_expr(&f), 2);
        assert_eq!(independent_rows(&f), vec![0, 1]);
    }

    #[test]
    fn rational_entries_and_float_det() {
        let t = toy_table();
        let f = mat(&t, &[&["1/a", "b"], &["1/(a - b)", "a/b"]]);
        let inv = inverse_expr(&f).unwrap();
        assert!(f.mul(&inv).is_identity());
        let expect = parse_expr("1/b - b/(a - b)", &t).unwrap();
        assert_eq!(det_expr(&f), expect);
        let m = Matrix::from_rows(vec![vec![0.0, 2.0], vec![3.0, 1.0]]);
        assert_eq!(det_lu_f64(&m), -6.0);
    }
}
