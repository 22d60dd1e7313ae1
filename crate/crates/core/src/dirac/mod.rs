//! Dirac's constraint algorithm on a canonical phase space.

mod chain;
mod run;

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::linalg::{inverse_expr, Matrix};
use crate::modelspec::{ConstraintDecl, DiracSpec, Origin, PairDecl};
use crate::symexpr::{Expr, SymbolKind, SymbolTable};

pub use crate::brackets::BracketTable;
pub use chain::{
    classify, consistency_chain, dirac_bracket_table, dirac_matrix, first_class_generator,
    ConstraintChain, ConstraintClass, DiracMatrix, Generator, MultiplierFix,
};
pub use run::{run_dirac, DiracReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiracError {
    #[error("velocity '{0}' enters the Lagrangian non-polynomially")]
    NonPolynomialVelocity(String),
    #[error("momentum definitions cannot be solved for the velocities: {0}")]
    Unsolvable(String),
    #[error("consistency of {0} demands a nonzero constant to vanish")]
    Inconsistent(String),
    #[error("consistency chain did not close within {0} generations")]
    LevelLimit(usize),
    #[error("second-class constraint matrix is singular")]
    SingularC,
    #[error("model has no [dirac] section")]
    Missing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseSpace {
    pub pairs: Vec<PairDecl>,
}

impl PhaseSpace {
    pub fn from_spec(spec: &DiracSpec) -> Self {
        Self {
            pairs: spec.pairs.clone(),
        }
    }

    pub fn coordinates(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.coordinate).collect()
    }

    pub fn momenta(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.momentum).collect()
    }

    /// Coordinates followed by momenta.
    pub fn basis(&self) -> Vec<usize> {
        let mut b = self.coordinates();
        b.extend(self.momenta());
        b
    }

    /// Canonical Poisson table over `basis()`.
    pub fn poisson_table(&self) -> BracketTable {
        let n = self.pairs.len();
        let entries = Matrix::from_fn(2 * n, 2 * n, |i, j| {
            if j == i + n {
                Expr::integer(1)
            } else if i == j + n {
                Expr::integer(-1)
            } else {
                Expr::zero()
            }
        });
        BracketTable::new(self.basis(), entries)
    }
}

/// `{A, B} = Σ (∂A/∂q ∂B/∂p − ∂A/∂p ∂B/∂q)`.
pub fn poisson(a: &Expr, b: &Expr, ps: &PhaseSpace) -> Expr {
    let mut out = Expr::zero();
    for pair in &ps.pairs {
        let (q, p) = (pair.coordinate, pair.momentum);
        let aq = a.derivative(q);
        let bp = b.derivative(p);
        if !aq.is_zero() && !bp.is_zero() {
            out = &out + &(&aq * &bp);
        }
        let ap = a.derivative(p);
        let bq = b.derivative(q);
        if !ap.is_zero() && !bq.is_zero() {
            out = &out - &(&ap * &bq);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Legendre {
    pub hamiltonian: Expr,
    pub primaries: Vec<ConstraintDecl>,
    /// Velocities expressed through momenta.
    pub velocities: Vec<(usize, Expr)>,
}

/// Momenta `p = ∂L/∂v`; velocity-free definitions become primary
/// constraints `p − ∂L/∂v`, the rest are solved linearly for the velocities.
pub fn legendre_scan(l: &Expr, ps: &PhaseSpace, symbols: &SymbolTable) -> Result<Legendre, DiracError> {
    let vels: Vec<usize> = ps.pairs.iter().filter_map(|p| p.velocity).collect();
    for v in l.vars() {
        if symbols.kind(v) == SymbolKind::Velocity && l.denom().contains_var(v) {
            return Err(DiracError::NonPolynomialVelocity(symbols.name(v).into()));
        }
    }
    let has_velocity = |e: &Expr| vels.iter().any(|&v| e.contains_var(v));

    let mut primaries = Vec::new();
    let mut dynamic: Vec<(PairDecl, Expr)> = Vec::new();
    let mut h = -l.clone();
    for pair in &ps.pairs {
        let def = match pair.velocity {
            Some(v) => l.derivative(v),
            None => Expr::zero(),
        };
        if has_velocity(&def) {
            dynamic.push((*pair, def));
            continue;
        }
        let phi = &Expr::var(pair.momentum) - &def;
        primaries.push(phi);
        if let Some(v) = pair.velocity {
            h = &h + &(&def * &Expr::var(v));
        }
    }
    let primaries: Vec<ConstraintDecl> = {
        let n = primaries.len();
        primaries
            .into_iter()
            .enumerate()
            .map(|(k, e)| {
                let label = if n == 1 { "phi".to_string() } else { format!("phi{}", k + 1) };
                ConstraintDecl::new(label, e, Origin::Primary)
            })
            .collect()
    };

    // Linear system M v = p − b for the dynamic velocities.
    let dv: Vec<usize> = dynamic.iter().map(|(p, _)| p.velocity.unwrap()).collect();
    let n = dynamic.len();
    let mut m = Matrix::from_fn(n, n, |_, _| Expr::zero());
    let mut rhs = Vec::with_capacity(n);
    for (i, (pair, def)) in dynamic.iter().enumerate() {
        let mut rest = def.clone();
        for &v in &vels {
            let c = def.derivative(v);
            if c.is_zero() {
                continue;
            }
            if has_velocity(&c) {
                return Err(DiracError::Unsolvable(format!(
                    "momentum of '{}' is not linear in the velocities",
                    symbols.name(pair.coordinate)
                )));
            }
            match dv.iter().position(|&w| w == v) {
                Some(j) => m[(i, j)] = c.clone(),
                None => {
                    return Err(DiracError::Unsolvable(format!(
                        "momentum of '{}' couples to the undetermined velocity '{}'",
                        symbols.name(pair.coordinate),
                        symbols.name(v)
                    )))
                }
            }
            rest = &rest - &(&c * &Expr::var(v));
        }
        rhs.push(&Expr::var(pair.momentum) - &rest);
    }
    let mut velocities = Vec::new();
    if n > 0 {
        let inv = inverse_expr(&m)
            .ok_or_else(|| DiracError::Unsolvable("velocity Hessian is singular".into()))?;
        let solved = inv.mul_vec(&rhs);
        for ((pair, _), value) in dynamic.iter().zip(solved) {
            h = &h + &(&Expr::var(pair.momentum) * &Expr::var(pair.velocity.unwrap()));
            velocities.push((pair.velocity.unwrap(), value));
        }
    }
    let bind: BTreeMap<usize, Expr> = velocities.iter().cloned().collect();
    let h = h.substitute(&bind).expect("velocity solutions are finite");
    if has_velocity(&h) {
        return Err(DiracError::Unsolvable(
            "canonical Hamiltonian still depends on velocities".into(),
        ));
    }
    Ok(Legendre {
        hamiltonian: h,
        primaries,
        velocities,
    })
}
