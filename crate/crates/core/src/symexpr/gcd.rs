//! Multivariate GCD by recursive content/primitive-part decomposition and
//! primitive pseudo-remainder sequences.

use num_traits::{One, Zero};

use super::monomial::Monomial;
use super::poly::Polynomial;
use crate::scalar::Coefficient;

/// Monic greatest common divisor; `gcd(0, 0) = 0`.
pub fn gcd<C: Coefficient>(a: &Polynomial<C>, b: &Polynomial<C>) -> Polynomial<C> {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one();
    }
    if a.num_terms() == 1 {
        return monomial_gcd(b, a.leading().unwrap().0);
    }
    if b.num_terms() == 1 {
        return monomial_gcd(a, b.leading().unwrap().0);
    }
    if a.monic() == b.monic() {
        return a.monic();
    }
    if provably_coprime(a, b) {
        return Polynomial::one();
    }
    if a.div_exact(b).is_some() {
        return b.monic();
    }
    if b.div_exact(a).is_some() {
        return a.monic();
    }

    let va = a.vars();
    let vb = b.vars();
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        return gcd(&content_in(a, v), b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        return gcd(a, &content_in(b, v));
    }
    let var = *va
        .iter()
        .min_by_key(|&&v| {
            let (da, db) = (a.degree_in(v), b.degree_in(v));
            (da.min(db), da.max(db), v)
        })
        .expect("non-constant polynomials have symbols");

    let ca = content_in(a, var);
    let cb = content_in(b, var);
    let content = gcd(&ca, &cb);
    let mut p = a.div_exact(&ca).expect("content divides");
    let mut q = b.div_exact(&cb).expect("content divides");
    if p.degree_in(var) < q.degree_in(var) {
        std::mem::swap(&mut p, &mut q);
    }
    loop {
        let r = p.pseudo_rem(&q, var);
        if r.is_zero() {
            break;
        }
        if r.degree_in(var) == 0 {
            return content;
        }
        p = q;
        q = primitive_part_in(&r, var);
    }
    let g = primitive_part_in(&q, var);
    (&content * &g).monic()
}

fn sample<C: Coefficient>(v: usize, salt: usize) -> C {
    let n = 3 + ((v * 7 + salt * 13) % 31) as i64;
    C::from_ratio(if (v + salt).is_multiple_of(2) { n } else { -n }, 1)
}

/// `p` with every symbol except `keep` replaced by a fixed integer.
fn specialize<C: Coefficient>(p: &Polynomial<C>, keep: usize, salt: usize) -> Polynomial<C> {
    let mut out = Polynomial::zero();
    for (m, c) in p.terms() {
        let mut k = c.clone();
        for (v, e) in m.support().filter(|&(v, _)| v != keep) {
            let s: C = sample(v, salt);
            for _ in 0..e {
                k = k * s.clone();
            }
        }
        out.add_term(Monomial::var(keep, m.exp(keep)), k);
    }
    out
}

fn univariate_gcd<C: Coefficient>(a: &Polynomial<C>, b: &Polynomial<C>, var: usize) -> Polynomial<C> {
    let (mut p, mut q) = (a.monic(), b.monic());
    if p.degree_in(var) < q.degree_in(var) {
        std::mem::swap(&mut p, &mut q);
    }
    while !q.is_zero() {
        let r = p.pseudo_rem(&q, var).monic();
        p = q;
        q = r;
    }
    p
}

/// Upper bound on the degree of `gcd(a, b)` in `var`, read off a univariate
/// image whose leading coefficients survive the specialization.
fn degree_bound<C: Coefficient>(a: &Polynomial<C>, b: &Polynomial<C>, var: usize) -> Option<u32> {
    (0..3).find_map(|salt| {
        let (sa, sb) = (specialize(a, var, salt), specialize(b, var, salt));
        if sa.degree_in(var) != a.degree_in(var) || sb.degree_in(var) != b.degree_in(var) {
            return None;
        }
        Some(univariate_gcd(&sa, &sb, var).degree_in(var))
    })
}

fn provably_coprime<C: Coefficient>(a: &Polynomial<C>, b: &Polynomial<C>) -> bool {
    let vb = b.vars();
    a.vars()
        .into_iter()
        .filter(|v| vb.contains(v))
        .all(|v| degree_bound(a, b, v) == Some(0))
}

pub fn lcm<C: Coefficient>(a: &Polynomial<C>, b: &Polynomial<C>) -> Polynomial<C> {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let g = gcd(a, b);
    (a * &b.div_exact(&g).expect("gcd divides")).monic()
}

/// GCD of the coefficients of `p` viewed as univariate in `var`.
pub fn content_in<C: Coefficient>(p: &Polynomial<C>, var: usize) -> Polynomial<C> {
    let mut acc = Polynomial::zero();
    for c in p.coeffs_in(var).values() {
        acc = gcd(&acc, c);
        if acc.is_one() {
            break;
        }
    }
    acc
}

pub fn primitive_part_in<C: Coefficient>(p: &Polynomial<C>, var: usize) -> Polynomial<C> {
    let c = content_in(p, var);
    p.div_exact(&c).expect("content divides").monic()
}

fn monomial_gcd<C: Coefficient>(p: &Polynomial<C>, m: &Monomial) -> Polynomial<C> {
    let mut g = m.clone();
    for (pm, _) in p.terms() {
        g = g.gcd(pm);
        if g.is_one() {
            break;
        }
    }
    Polynomial::term(C::one(), g)
}
