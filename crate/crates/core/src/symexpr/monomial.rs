use std::cmp::Ordering;

/// Power product over symbol indices, stored densely with trailing zeros
/// trimmed. Ordered graded-lexicographically: total degree first, then the
/// exponent of the lowest-indexed symbol, and so on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<u32>,
    degree: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(idx: usize, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        let mut exps = vec![0; idx + 1];
        exps[idx] = exp;
        Self { exps, degree: exp }
    }

    pub fn from_exps(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        let degree = exps.iter().sum();
        Self { exps, degree }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn exp(&self, idx: usize) -> u32 {
        self.exps.get(idx).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    /// Indices with nonzero exponent, ascending.
    pub fn support(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| (i, e))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.exps.len().max(other.exps.len());
        let exps = (0..n).map(|i| self.exp(i) + other.exp(i)).collect();
        Monomial {
            exps,
            degree: self.degree + other.degree,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.degree <= other.degree
            && self.exps.len() <= other.exps.len()
            && self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let exps = (0..other.exps.len())
            .map(|i| other.exp(i) - self.exp(i))
            .collect();
        Some(Monomial::from_exps(exps))
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        let n = self.exps.len().min(other.exps.len());
        Monomial::from_exps((0..n).map(|i| self.exp(i).min(other.exp(i))).collect())
    }

    /// Removes symbol `idx`, returning its exponent and the remainder.
    pub fn split_var(&self, idx: usize) -> (u32, Monomial) {
        let e = self.exp(idx);
        if e == 0 {
            return (0, self.clone());
        }
        let mut exps = self.exps.clone();
        exps[idx] = 0;
        (e, Monomial::from_exps(exps))
    }

    /// Keeps only the symbols accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> Monomial {
        Monomial::from_exps(
            self.exps
                .iter()
                .enumerate()
                .map(|(i, &e)| if keep(i) { e } else { 0 })
                .collect(),
        )
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
