use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::monomial::Monomial;
use crate::scalar::{Coefficient, IntegralDomain, Ring};

/// Sparse multivariate polynomial over a coefficient field. Terms are kept
/// in a map ordered by [`Monomial`]'s graded-lex order; zero coefficients are
/// never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial<C> {
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coefficient> Polynomial<C> {
    pub fn constant(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Self { terms }
    }

    pub fn var(idx: usize) -> Self {
        Self::term(C::one(), Monomial::var(idx, 1))
    }

    pub fn term(c: C, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    pub fn from_terms(iter: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &C)> + ExactSizeIterator {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                let sum = existing.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *existing = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn leading(&self) -> Option<(&Monomial, &C)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> C {
        self.leading().map(|(_, c)| c.clone()).unwrap_or_else(C::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.is_zero() {
            Some(C::zero())
        } else if self.is_constant() {
            Some(self.leading_coeff())
        } else {
            None
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    /// Symbols that occur, ascending.
    pub fn vars(&self) -> Vec<usize> {
        let mut seen: Vec<usize> = Vec::new();
        for m in self.terms.keys() {
            for (i, _) in m.support() {
                if let Err(pos) = seen.binary_search(&i) {
                    seen.insert(pos, i);
                }
            }
        }
        seen
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Self {
        match self.leading() {
            None => Self::zero(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => self.scale(&(C::one() / lc.clone())),
        }
    }

    pub fn pow(&self, mut exp: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let e = m.exp(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.exps().to_vec();
            exps[var] -= 1;
            out.add_term(
                Monomial::from_exps(exps),
                c.clone() * C::from_ratio(e as i64, 1),
            );
        }
        out
    }

    /// Coefficients with respect to `var`: exponent of `var` mapped to a
    /// polynomial free of `var`.
    pub fn coeffs_in(&self, var: usize) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_var(var);
            out.entry(e).or_insert_with(Self::zero).add_term(rest, c.clone());
        }
        out
    }

    pub fn from_coeffs_in(var: usize, coeffs: &BTreeMap<u32, Self>) -> Self {
        let mut out = Self::zero();
        for (&e, p) in coeffs {
            let vm = Monomial::var(var, e);
            for (m, c) in &p.terms {
                out.add_term(m.mul(&vm), c.clone());
            }
        }
        out
    }

    /// Leading coefficient with respect to `var`.
    pub fn lc_in(&self, var: usize) -> Self {
        let d = self.degree_in(var);
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let (e, rest) = m.split_var(var);
            if e == d {
                out.add_term(rest, c.clone());
            }
        }
        out
    }

    /// Exact multivariate division; `None` when `divisor` does not divide.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let (dm, dc) = divisor.leading().map(|(m, c)| (m.clone(), c.clone()))?;
        if divisor.num_terms() == 1 {
            let inv = C::one() / dc;
            let mut terms = BTreeMap::new();
            for (m, c) in &self.terms {
                terms.insert(dm.quotient_of(m)?, c.clone() * inv.clone());
            }
            return Some(Self { terms });
        }
        let mut rem = self.clone();
        let mut quot = Self::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = dm.quotient_of(&rm)?;
            let qc = rc / dc.clone();
            let step = divisor.mul_monomial(&qm).scale(&qc);
            rem = &rem - &step;
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Pseudo-remainder of `self` by `divisor` viewed as univariate in `var`.
    pub fn pseudo_rem(&self, divisor: &Self, var: usize) -> Self {
        let db = divisor.degree_in(var);
        let lb = divisor.lc_in(var);
        let mut r = self.clone();
        while !r.is_zero() && r.degree_in(var) >= db {
            let dr = r.degree_in(var);
            let lr = r.lc_in(var);
            let shift = Self::term(C::one(), Monomial::var(var, dr - db));
            r = &(&lb * &r) - &(&(&lr * &shift) * divisor);
        }
        r
    }

    /// Evaluates with a caller-supplied value for every symbol.
    pub fn eval_with<T, F, G>(&self, mut value: F, coeff: G) -> Option<T>
    where
        T: Ring,
        F: FnMut(usize) -> Option<T>,
        G: Fn(&C) -> T,
    {
        let mut cache: BTreeMap<usize, T> = BTreeMap::new();
        let mut acc = T::zero();
        for (m, c) in &self.terms {
            let mut t = coeff(c);
            for (i, e) in m.support() {
                let base = match cache.get(&i) {
                    Some(v) => v.clone(),
                    None => {
                        let v = value(i)?;
                        cache.insert(i, v.clone());
                        v
                    }
                };
                for _ in 0..e {
                    t = t * base.clone();
                }
            }
            acc = acc + t;
        }
        Some(acc)
    }
}

impl<C: Coefficient> Zero for Polynomial<C> {
    fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Coefficient> One for Polynomial<C> {
    fn one() -> Self {
        Self::constant(C::one())
    }
}

impl<C: Coefficient> Add for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn add(self, rhs: Self) -> Polynomial<C> {
        let (mut big, small) = if self.num_terms() >= rhs.num_terms() {
            (self.clone(), rhs)
        } else {
            (rhs.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }
}

impl<C: Coefficient> Sub for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn sub(self, rhs: Self) -> Polynomial<C> {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<C: Coefficient> Mul for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn mul(self, rhs: Self) -> Polynomial<C> {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        out
    }
}

impl<C: Coefficient> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<C: Coefficient> $tr for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $f(self, rhs: Self) -> Polynomial<C> {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<C: Coefficient> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}

impl<C: Coefficient> Ring for Polynomial<C> {
    fn pivot_weight(&self) -> usize {
        self.total_degree() as usize * 1024 + self.num_terms()
    }
}

impl<C: Coefficient> IntegralDomain for Polynomial<C> {
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        self.div_exact(rhs)
    }
}
