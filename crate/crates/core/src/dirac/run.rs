use num_traits::Zero;

use super::{
    classify, consistency_chain, dirac_bracket_table, dirac_matrix, first_class_generator,
    legendre_scan, ConstraintChain, ConstraintClass, DiracError, DiracMatrix, Generator,
    PhaseSpace,
};
use crate::brackets::BracketTable;
use crate::modelspec::{ConstraintDecl, DiracSource, Model};
use crate::symexpr::{expr_to_string, Expr, RewriteSystem, SymbolTable};
use crate::symplectic::impose_expr;

#[derive(Debug, Clone, PartialEq)]
pub struct DiracReport {
    pub model_name: String,
    pub phase_space: PhaseSpace,
    /// Canonical Hamiltonian.
    pub hamiltonian: Expr,
    pub chain: ConstraintChain,
    pub dirac_matrix: DiracMatrix,
    pub classes: Vec<ConstraintClass>,
    /// Dirac brackets with respect to the second-class members.
    pub table: BracketTable,
    /// Canonical Hamiltonian with the second-class members set strongly to
    /// zero.
    pub reduced_hamiltonian: Option<Expr>,
    pub generators: Vec<Generator>,
    pub symbols: SymbolTable,
    pub warnings: Vec<String>,
}

impl DiracReport {
    pub fn second_class(&self) -> Vec<&ConstraintDecl> {
        self.members(ConstraintClass::SecondClass)
    }

    pub fn first_class(&self) -> Vec<&ConstraintDecl> {
        self.members(ConstraintClass::FirstClass)
    }

    fn members(&self, class: ConstraintClass) -> Vec<&ConstraintDecl> {
        self.chain
            .constraints
            .iter()
            .zip(&self.classes)
            .filter(|(_, c)| **c == class)
            .map(|(k, _)| k)
            .collect()
    }
}

pub fn run_dirac(m: &Model, max_level: usize) -> Result<DiracReport, DiracError> {
    let spec = m.dirac.as_ref().ok_or(DiracError::Missing)?;
    let ps = PhaseSpace::from_spec(spec);
    let symbols = &m.symbols;
    let (h, primaries) = match &spec.source {
        DiracSource::Lagrangian(l) => {
            let out = legendre_scan(l, &ps, symbols)?;
            (out.hamiltonian, out.primaries)
        }
        DiracSource::Hamiltonian {
            hamiltonian,
            primaries,
        } => (hamiltonian.clone(), primaries.clone()),
    };
    let chain = consistency_chain(&h, &primaries, &ps, symbols, max_level)?;
    let constraints = &chain.constraints;
    let mut warnings = Vec::new();
    let classes = classify(constraints, &ps, symbols);
    let second: Vec<ConstraintDecl> = constraints
        .iter()
        .zip(&classes)
        .filter(|(_, c)| **c == ConstraintClass::SecondClass)
        .map(|(k, _)| k.clone())
        .collect();
    if second.len() % 2 == 1 {
        warnings.push(format!(
            "odd number ({}) of second-class constraints",
            second.len()
        ));
    }
    let table = dirac_bracket_table(&second, &ps, &ps.basis())?;
    let branches = RewriteSystem {
        rules: Vec::new(),
        branches: m.rewrites.branches.clone(),
    };
    let reduced_hamiltonian = match impose_expr(&h, &second, &branches, symbols) {
        Ok((v, _, _)) => Some(v),
        Err(e) => {
            warnings.push(format!("reduced Hamiltonian unavailable: {e}"));
            None
        }
    };
    let generators: Vec<Generator> = constraints
        .iter()
        .zip(&classes)
        .filter(|(_, c)| **c == ConstraintClass::FirstClass)
        .map(|(k, _)| first_class_generator(k, &table, &h))
        .collect();
    for g in &generators {
        if !g.delta_h.is_zero() {
            warnings.push(format!(
                "first-class {} changes the Hamiltonian by {}",
                g.constraint,
                expr_to_string(&g.delta_h, symbols)
            ));
        }
    }
    let dirac_matrix = dirac_matrix(constraints, constraints, &ps, symbols, false);
    Ok(DiracReport {
        model_name: m.name.clone(),
        phase_space: ps,
        hamiltonian: h,
        chain,
        dirac_matrix,
        classes,
        table,
        reduced_hamiltonian,
        generators,
        symbols: symbols.clone(),
        warnings,
    })
}
