use std::collections::BTreeMap;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::gcd::gcd;
use super::poly::Polynomial;
use super::ExprError;
use crate::scalar::{Coefficient, Field, IntegralDomain, Ring};

/// Reduced quotient of polynomials.
///
/// Canonical form: numerator and denominator are coprime and the denominator
/// is monic (its graded-lex leading coefficient is one). Zero is `0/1`.
/// Two values are equal iff their canonical forms are identical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFunction<C> {
    num: Polynomial<C>,
    den: Polynomial<C>,
}

impl<C: Coefficient> RationalFunction<C> {
    pub fn new(num: Polynomial<C>, den: Polynomial<C>) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(num, den))
    }

    fn normalized(num: Polynomial<C>, den: Polynomial<C>) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_constant() {
            let inv = C::one() / den.leading_coeff();
            return Self {
                num: num.scale(&inv),
                den: Polynomial::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.div_exact(&g).expect("gcd divides numerator"),
                den.div_exact(&g).expect("gcd divides denominator"),
            )
        };
        let lc = den.leading_coeff();
        if lc.is_one() {
            Self { num, den }
        } else {
            let inv = C::one() / lc;
            Self {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn from_poly(p: Polynomial<C>) -> Self {
        Self {
            num: p,
            den: Polynomial::one(),
        }
    }

    pub fn constant(c: C) -> Self {
        Self::from_poly(Polynomial::constant(c))
    }

    pub fn integer(n: i64) -> Self {
        Self::constant(C::from_ratio(n, 1))
    }

    pub fn var(idx: usize) -> Self {
        Self::from_poly(Polynomial::var(idx))
    }

    pub fn numer(&self) -> &Polynomial<C> {
        &self.num
    }

    pub fn denom(&self) -> &Polynomial<C> {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial<C>, Polynomial<C>) {
        (self.num, self.den)
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<C> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        let mut v = self.num.vars();
        for i in self.den.vars() {
            if let Err(pos) = v.binary_search(&i) {
                v.insert(pos, i);
            }
        }
        v
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.num.contains_var(var) || self.den.contains_var(var)
    }

    pub fn try_div(&self, rhs: &Self) -> Result<Self, ExprError> {
        if rhs.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::normalized(&self.num * &rhs.den, &self.den * &rhs.num))
    }

    pub fn recip(&self) -> Result<Self, ExprError> {
        Self::one().try_div(self)
    }

    pub fn powi(&self, exp: i64) -> Result<Self, ExprError> {
        if exp >= 0 {
            let e = exp as u32;
            Ok(Self {
                num: self.num.pow(e),
                den: self.den.pow(e),
            }
            .renormalize_sign())
        } else {
            self.recip()?.powi(-exp)
        }
    }

    // Powers of a canonical form stay coprime; only the leading
    // coefficient of the denominator may need rescaling.
    fn renormalize_sign(self) -> Self {
        let lc = self.den.leading_coeff();
        if lc.is_one() {
            self
        } else {
            let inv = C::one() / lc;
            Self {
                num: self.num.scale(&inv),
                den: self.den.scale(&inv),
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Exact partial derivative.
    pub fn derivative(&self, var: usize) -> Self {
        let dn = self.num.derivative(var);
        if self.den.is_one() {
            return Self::from_poly(dn);
        }
        let dd = self.den.derivative(var);
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Self::normalized(num, &self.den * &self.den)
    }

    /// Simultaneous substitution of symbols by rational functions.
    pub fn substitute(&self, bindings: &BTreeMap<usize, Self>) -> Result<Self, ExprError> {
        if bindings.is_empty() {
            return Ok(self.clone());
        }
        let n = subst_poly(&self.num, bindings);
        let d = subst_poly(&self.den, bindings);
        n.try_div(&d)
    }

    /// Evaluates over any field given a value for each symbol.
    pub fn eval_with<T, F, G>(&self, mut value: F, coeff: G) -> Result<T, ExprError>
    where
        T: Field,
        F: FnMut(usize) -> Option<T>,
        G: Fn(&C) -> T,
    {
        let n = self
            .num
            .eval_with(&mut value, &coeff)
            .ok_or(ExprError::Unassigned)?;
        let d = self
            .den
            .eval_with(&mut value, &coeff)
            .ok_or(ExprError::Unassigned)?;
        if d.is_zero() {
            return Err(ExprError::Pole);
        }
        Ok(n / d)
    }

    /// Point evaluation in the coefficient field.
    pub fn eval_at(&self, point: &BTreeMap<usize, C>) -> Result<C, ExprError> {
        self.eval_with(|i| point.get(&i).cloned(), |c| c.clone())
    }
}

fn subst_poly<C: Coefficient>(
    p: &Polynomial<C>,
    bindings: &BTreeMap<usize, RationalFunction<C>>,
) -> RationalFunction<C> {
    let mut powers: BTreeMap<(usize, u32), RationalFunction<C>> = BTreeMap::new();
    // Split terms into the part touched by the bindings and the untouched
    // part so the untouched polynomial is accumulated without GCDs.
    let mut untouched = Polynomial::zero();
    let mut groups: BTreeMap<Vec<(usize, u32)>, Polynomial<C>> = BTreeMap::new();
    for (m, c) in p.terms() {
        let key: Vec<(usize, u32)> = m
            .support()
            .filter(|(i, _)| bindings.contains_key(i))
            .collect();
        let rest = m.restrict(|i| !bindings.contains_key(&i));
        if key.is_empty() {
            untouched.add_term(rest, c.clone());
        } else {
            groups
                .entry(key)
                .or_insert_with(Polynomial::zero)
                .add_term(rest, c.clone());
        }
    }
    let mut acc = RationalFunction::from_poly(untouched);
    for (key, coeff) in groups {
        let mut t = RationalFunction::from_poly(coeff);
        for (i, e) in key {
            let pw = powers
                .entry((i, e))
                .or_insert_with(|| bindings[&i].powi(e as i64).expect("nonnegative power"))
                .clone();
            t = &t * &pw;
        }
        acc = &acc + &t;
    }
    acc
}

impl<C: Coefficient> Zero for RationalFunction<C> {
    fn zero() -> Self {
        Self {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<C: Coefficient> One for RationalFunction<C> {
    fn one() -> Self {
        Self::from_poly(Polynomial::one())
    }
}

impl<C: Coefficient> Add for &RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn add(self, rhs: Self) -> RationalFunction<C> {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return RationalFunction::from_poly(num);
            }
            return RationalFunction::normalized(num, self.den.clone());
        }
        let num = &(&self.num * &rhs.den) + &(&rhs.num * &self.den);
        RationalFunction::normalized(num, &self.den * &rhs.den)
    }
}

impl<C: Coefficient> Sub for &RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn sub(self, rhs: Self) -> RationalFunction<C> {
        self + &(-rhs)
    }
}

impl<C: Coefficient> Mul for &RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn mul(self, rhs: Self) -> RationalFunction<C> {
        if self.is_zero() || rhs.is_zero() {
            return RationalFunction::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return RationalFunction::from_poly(&self.num * &rhs.num);
        }
        // Cross-cancel before multiplying; each factor is already reduced.
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        RationalFunction {
            num: &n1 * &n2,
            den: &d1 * &d2,
        }
        .renormalize_sign()
    }
}

impl<C: Coefficient> Neg for &RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn neg(self) -> RationalFunction<C> {
        RationalFunction {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl<C: Coefficient> Neg for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn neg(self) -> RationalFunction<C> {
        -&self
    }
}

impl<C: Coefficient> Add for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn add(self, rhs: Self) -> Self {
        &self + &rhs
    }
}

impl<C: Coefficient> Sub for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn sub(self, rhs: Self) -> Self {
        &self - &rhs
    }
}

impl<C: Coefficient> Mul for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn mul(self, rhs: Self) -> Self {
        &self * &rhs
    }
}

/// Panics on division by zero; use [`RationalFunction::try_div`] to recover.
impl<C: Coefficient> Div for RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn div(self, rhs: Self) -> Self {
        self.try_div(&rhs).expect("division by zero rational function")
    }
}

impl<C: Coefficient> Div for &RationalFunction<C> {
    type Output = RationalFunction<C>;
    fn div(self, rhs: Self) -> RationalFunction<C> {
        self.try_div(rhs).expect("division by zero rational function")
    }
}

impl<C: Coefficient> Ring for RationalFunction<C> {
    fn pivot_weight(&self) -> usize {
        (self.num.total_degree() + self.den.total_degree()) as usize * 1024
            + self.num.num_terms()
            + self.den.num_terms()
    }
}

impl<C: Coefficient> IntegralDomain for RationalFunction<C> {
    fn exact_div(&self, rhs: &Self) -> Option<Self> {
        self.try_div(rhs).ok()
    }
}

impl<C: Coefficient> Field for RationalFunction<C> {}
