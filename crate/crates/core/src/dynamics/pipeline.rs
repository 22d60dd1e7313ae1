use super::{conserved_search, hamilton_equations, in_span, promote_to_constraint, DynamicsError, MotionSystem};
use crate::modelspec::ConstraintDecl;
use crate::symexpr::Expr;
use crate::symplectic::{resume_with, AnalysisReport, RunOptions};

#[derive(Debug, Clone, PartialEq)]
pub struct Promotion {
    /// Where the quantity came from: a Dirac chain label or `#k` into the
    /// conserved basis (1-based).
    pub source: String,
    pub quantity: Expr,
    pub constraint: ConstraintDecl,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EomStep {
    pub degree: u32,
    pub motion: MotionSystem,
    pub conserved: Vec<Expr>,
    pub promotion: Option<Promotion>,
}

/// Picks the quantity to promote. `choice` names a candidate label or `#k`;
/// by default the first candidate lying in the conserved span wins, then the
/// lowest-degree basis element.
pub fn select_promotion(
    conserved: &[Expr],
    candidates: &[(String, Expr)],
    vars: &[usize],
    choice: Option<&str>,
) -> Result<Option<(String, Expr)>, DynamicsError> {
    if let Some(choice) = choice {
        if let Some(k) = choice.strip_prefix('#').and_then(|k| k.parse::<usize>().ok()) {
            return match conserved.get(k.wrapping_sub(1)) {
                Some(q) => Ok(Some((format!("#{k}"), q.clone()))),
                None => Err(DynamicsError::UnknownPromotion(choice.to_string())),
            };
        }
        let (label, q) = candidates
            .iter()
            .find(|(l, _)| l == choice)
            .ok_or_else(|| DynamicsError::UnknownPromotion(choice.to_string()))?;
        if !in_span(q, conserved, vars) {
            return Err(DynamicsError::NotConserved(label.clone()));
        }
        return Ok(Some((label.clone(), q.clone())));
    }
    if let Some((l, q)) = candidates.iter().find(|(_, q)| in_span(q, conserved, vars)) {
        return Ok(Some((l.clone(), q.clone())));
    }
    Ok(conserved.first().map(|q| ("#1".to_string(), q.clone())))
}

/// Equations of motion under the final bracket table and the potential of
/// the final level, a conserved-quantity search, and, when a quantity is
/// selected, a resumed run with it promoted to a constraint.
pub fn eom_pipeline(
    report: &AnalysisReport,
    candidates: &[(String, Expr)],
    degree: u32,
    choice: Option<&str>,
    opts: &RunOptions,
) -> Result<(AnalysisReport, EomStep), DynamicsError> {
    let table = report.brackets().ok_or(DynamicsError::NoBrackets)?;
    let motion = hamilton_equations(table, &report.final_model.potential);
    let conserved = conserved_search(&motion, degree)?;
    let picked = select_promotion(&conserved, candidates, &motion.basis, choice)?;
    let mut step = EomStep {
        degree,
        motion,
        conserved,
        promotion: None,
    };
    let Some((source, quantity)) = picked else {
        return Ok((report.clone(), step));
    };
    let mut base = report.clone();
    let constraint = promote_to_constraint(&quantity, &mut base.final_model)?;
    let next = resume_with(&base, constraint.clone(), opts)
        .map_err(|e| DynamicsError::Model(e.to_string()))?;
    step.promotion = Some(Promotion {
        source,
        quantity,
        constraint,
    });
    Ok((next, step))
}
