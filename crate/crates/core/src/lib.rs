pub mod brackets;
pub mod compare;
pub mod dirac;
pub mod dynamics;
pub mod linalg;
pub mod modelspec;
pub mod report;
pub mod scalar;
pub mod symexpr;
pub mod symplectic;

pub use scalar::{Coefficient, Field, IntegralDomain, Ring};
pub use symexpr::{Expr, Poly, SymbolKind, SymbolTable};

pub type Rational = num_rational::BigRational;
