use std::collections::HashMap;
use std::fmt;

use serde::Serialize;

use super::ExprError;

/// Role a symbol plays in an analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Coordinate,
    Momentum,
    Multiplier,
    Parameter,
    IntegrationConstant,
    Defined,
    /// Generalized velocity; only appears in second-order Lagrangians.
    Velocity,
}

impl SymbolKind {
    /// Parameters and integration constants act as coefficients: they never
    /// vary along trajectories.
    pub fn is_coefficient(self) -> bool {
        matches!(self, SymbolKind::Parameter | SymbolKind::IntegrationConstant)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SymbolKind::Coordinate => "coordinate",
            SymbolKind::Momentum => "momentum",
            SymbolKind::Multiplier => "multiplier",
            SymbolKind::Parameter => "parameter",
            SymbolKind::IntegrationConstant => "integration-constant",
            SymbolKind::Defined => "defined",
            SymbolKind::Velocity => "velocity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "coordinate" => SymbolKind::Coordinate,
            "momentum" => SymbolKind::Momentum,
            "multiplier" => SymbolKind::Multiplier,
            "parameter" => SymbolKind::Parameter,
            "integration-constant" => SymbolKind::IntegrationConstant,
            "defined" => SymbolKind::Defined,
            "velocity" => SymbolKind::Velocity,
            _ => return None,
        })
    }
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    /// Position in the global order; lower indices rank higher in monomial
    /// comparisons.
    pub order_index: usize,
}

/// Append-only symbol registry. Indices are stable, so canonical forms built
/// against a prefix of the table stay canonical after new symbols are added.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    symbols: Vec<Symbol>,
    by_name: HashMap<String, usize>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> Result<usize, ExprError> {
        if self.by_name.contains_key(name) {
            return Err(ExprError::DuplicateSymbol(name.to_string()));
        }
        if !is_identifier(name) {
            return Err(ExprError::InvalidName(name.to_string()));
        }
        let idx = self.symbols.len();
        self.symbols.push(Symbol {
            name: name.to_string(),
            kind,
            order_index: idx,
        });
        self.by_name.insert(name.to_string(), idx);
        Ok(idx)
    }

    /// Declares `name` unless it already exists; returns its index either way.
    pub fn ensure(&mut self, name: &str, kind: SymbolKind) -> Result<usize, ExprError> {
        match self.lookup(name) {
            Some(idx) => Ok(idx),
            None => self.declare(name, kind),
        }
    }

    /// Declares `{prefix}{k}` for the smallest `k >= 1` that is free.
    pub fn fresh(&mut self, prefix: &str, kind: SymbolKind) -> usize {
        let mut k = 1;
        loop {
            let name = format!("{prefix}{k}");
            if !self.by_name.contains_key(&name) {
                return self.declare(&name, kind).expect("fresh name is valid");
            }
            k += 1;
        }
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn get(&self, idx: usize) -> &Symbol {
        &self.symbols[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.symbols[idx].name
    }

    pub fn kind(&self, idx: usize) -> SymbolKind {
        self.symbols[idx].kind
    }

    /// True for symbols that vary along trajectories (not coefficients).
    pub fn is_variable(&self, idx: usize) -> bool {
        !self.symbols[idx].kind.is_coefficient()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
