use num_traits::Zero;

use crate::linalg::Matrix;
use crate::symexpr::{Expr, SymbolTable};

/// Pairwise brackets among `basis`, extended bilinearly by the Leibniz rule.
#[derive(Debug, Clone, PartialEq)]
pub struct BracketTable {
    pub basis: Vec<usize>,
    pub entries: Matrix<Expr>,
}

impl BracketTable {
    pub fn new(basis: Vec<usize>, entries: Matrix<Expr>) -> Self {
        assert_eq!(basis.len(), entries.rows(), "basis and table sizes differ");
        Self { basis, entries }
    }

    pub fn position(&self, sym: usize) -> Option<usize> {
        self.basis.iter().position(|&b| b == sym)
    }

    /// Bracket of two basis symbols, `None` when either is outside the basis.
    pub fn get(&self, a: usize, b: usize) -> Option<&Expr> {
        Some(&self.entries[(self.position(a)?, self.position(b)?)])
    }

    /// `{F, G} = Σ ∂F/∂z_i T_ij ∂G/∂z_j`.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        let df: Vec<Expr> = self.basis.iter().map(|&z| f.derivative(z)).collect();
        let dg: Vec<Expr> = self.basis.iter().map(|&z| g.derivative(z)).collect();
        let mut out = Expr::zero();
        for (i, a) in df.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in dg.iter().enumerate() {
                let t = &self.entries[(i, j)];
                if b.is_zero() || t.is_zero() {
                    continue;
                }
                out = &out + &(&(a * t) * b);
            }
        }
        out
    }

    /// Table restricted to the given symbols, in their order.
    pub fn restrict(&self, syms: &[usize]) -> Option<Self> {
        let idx: Option<Vec<usize>> = syms.iter().map(|&s| self.position(s)).collect();
        let idx = idx?;
        Some(Self::new(syms.to_vec(), self.entries.submatrix(&idx, &idx)))
    }

    pub fn names(&self, symbols: &SymbolTable) -> Vec<String> {
        self.basis.iter().map(|&s| symbols.name(s).to_string()).collect()
    }
}
