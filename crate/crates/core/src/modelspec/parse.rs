use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use super::{
    extend_with_constraint, ConstraintDecl, DiracSource, DiracSpec, Model, ModelError, Options,
    Origin, PairDecl,
};
use crate::symexpr::{
    indexed_name, parse_expr_in, Env, Expr, RewriteRule, RewriteSystem, Sign, SymbolKind,
    SymbolTable,
};

const SECTIONS: &[&str] = &[
    "parameters",
    "variables",
    "one_form",
    "potential",
    "constraints",
    "rewrites",
    "options",
    "dirac",
];

type Lines = Vec<(usize, String)>;

fn syntax(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn split_sections(text: &str) -> Result<HashMap<&'static str, Lines>, ModelError> {
    let mut out: HashMap<&'static str, Lines> = HashMap::new();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            match SECTIONS.iter().find(|s| **s == name) {
                Some(s) => {
                    current = Some(s);
                    out.entry(s).or_default();
                }
                None => return Err(syntax(line, format!("unknown section [{name}]"))),
            }
            continue;
        }
        match current {
            Some(s) => out.entry(s).or_default().push((line, body.to_string())),
            None => return Err(syntax(line, "content before the first section")),
        }
    }
    Ok(out)
}

struct Ctx {
    symbols: SymbolTable,
    constants: BTreeMap<String, i64>,
}

impl Ctx {
    fn env(&self) -> Env {
        Env {
            constants: self.constants.clone().into_iter().collect(),
            bound: HashMap::new(),
        }
    }

    fn bound(&self, s: &str, line: usize) -> Result<i64, ModelError> {
        let s = s.trim();
        if let Ok(v) = s.parse::<i64>() {
            return Ok(v);
        }
        self.constants
            .get(s)
            .copied()
            .ok_or_else(|| ModelError::NonConcreteRange {
                line,
                bound: s.to_string(),
            })
    }

    fn expr(&self, text: &str, env: &mut Env, line: usize) -> Result<Expr, ModelError> {
        parse_expr_in(text, &self.symbols, env, line).map_err(|source| ModelError::Expr { line, source })
    }

    /// `name` or `base[idx]` with the index resolved in `env`.
    fn target(&self, s: &str, env: &Env, line: usize) -> Result<String, ModelError> {
        let s = s.trim();
        match s.find('[') {
            None => Ok(s.to_string()),
            Some(open) => {
                let close = s
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(line, format!("malformed index in '{s}'")))?;
                let base = &s[..open];
                let idx = close[open + 1..].trim();
                let v = match idx.parse::<i64>() {
                    Ok(v) => v,
                    Err(_) => env
                        .bound
                        .get(idx)
                        .or_else(|| env.constants.get(idx))
                        .copied()
                        .ok_or_else(|| ModelError::NonConcreteRange {
                            line,
                            bound: idx.to_string(),
                        })?,
                };
                Ok(indexed_name(base, v))
            }
        }
    }

    fn lookup(&self, name: &str, line: usize) -> Result<usize, ModelError> {
        self.symbols
            .lookup(name)
            .ok_or_else(|| syntax(line, format!("undeclared symbol '{name}'")))
    }
}

/// Splits a trailing `for i = lo..hi` clause.
fn split_for(s: &str) -> (&str, Option<(&str, &str, &str)>) {
    if let Some(pos) = s.rfind(" for ") {
        let clause = s[pos + 5..].trim();
        if let Some((var, range)) = clause.split_once('=') {
            if let Some((lo, hi)) = range.split_once("..") {
                return (s[..pos].trim(), Some((var.trim(), lo.trim(), hi.trim())));
            }
        }
    }
    (s.trim(), None)
}

/// Runs `f` once per value of the optional `for` clause.
fn for_each_binding(
    ctx: &Ctx,
    clause: Option<(&str, &str, &str)>,
    line: usize,
    mut f: impl FnMut(&mut Env) -> Result<(), ModelError>,
) -> Result<(), ModelError> {
    let mut env = ctx.env();
    match clause {
        None => f(&mut env),
        Some((var, lo, hi)) => {
            let (lo, hi) = (ctx.bound(lo, line)?, ctx.bound(hi, line)?);
            for k in lo..=hi {
                env.bound.insert(var.to_string(), k);
                f(&mut env)?;
            }
            Ok(())
        }
    }
}

fn parse_parameters(lines: &Lines, overrides: &BTreeMap<String, i64>, ctx: &mut Ctx, params: &mut Vec<usize>) -> Result<(), ModelError> {
    for (line, body) in lines {
        for item in body.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            if let Some((name, value)) = item.split_once('=') {
                let name = name.trim().to_string();
                let v = value
                    .trim()
                    .parse::<i64>()
                    .map_err(|_| syntax(*line, format!("constant '{name}' needs an integer value")))?;
                let v = overrides.get(&name).copied().unwrap_or(v);
                ctx.constants.insert(name, v);
            } else {
                for name in item.split_whitespace() {
                    let s = ctx
                        .symbols
                        .declare(name, SymbolKind::Parameter)
                        .map_err(|source| ModelError::Expr { line: *line, source })?;
                    params.push(s);
                }
            }
        }
    }
    for (k, v) in overrides {
        ctx.constants.entry(k.clone()).or_insert(*v);
    }
    Ok(())
}

fn parse_variables(lines: &Lines, ctx: &mut Ctx) -> Result<Vec<usize>, ModelError> {
    let mut vars = Vec::new();
    for (line, body) in lines {
        let (lhs, kind) = body
            .split_once(':')
            .ok_or_else(|| syntax(*line, "expected 'name : kind'"))?;
        let kind = SymbolKind::parse(kind.trim())
            .ok_or_else(|| syntax(*line, format!("unknown kind '{}'", kind.trim())))?;
        if kind.is_coefficient() {
            return Err(syntax(*line, "coefficients belong in [parameters]"));
        }
        let lhs = lhs.trim();
        let names: Vec<String> = match lhs.find('[') {
            None => vec![lhs.to_string()],
            Some(open) => {
                let inner = lhs[open + 1..]
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(*line, "malformed range"))?;
                let (lo, hi) = inner
                    .split_once("..")
                    .ok_or_else(|| syntax(*line, "expected a range 'lo..hi'"))?;
                let (lo, hi) = (ctx.bound(lo, *line)?, ctx.bound(hi, *line)?);
                (lo..=hi).map(|k| indexed_name(&lhs[..open], k)).collect()
            }
        };
        for n in names {
            let s = ctx
                .symbols
                .declare(&n, kind)
                .map_err(|source| ModelError::Expr { line: *line, source })?;
            vars.push(s);
        }
    }
    Ok(vars)
}

const ORIGIN_WORDS: &[&str] = &["primary", "ad-hoc", "gauge-fixing", "eom-derived"];

#[derive(Default)]
struct Tags {
    origin: Option<Origin>,
    solved_for: Option<String>,
    multiplier: Option<String>,
}

/// Peels trailing `[tag]` groups off a constraint line.
fn split_tags(s: &str, line: usize) -> Result<(&str, Tags), ModelError> {
    let mut rest = s.trim_end();
    let mut tags = Tags::default();
    while rest.ends_with(']') {
        let Some(open) = rest.rfind('[') else { break };
        let inner = &rest[open + 1..rest.len() - 1];
        let mut parts = Vec::new();
        for part in inner.split(',') {
            let part = part.trim();
            let known = ORIGIN_WORDS.contains(&part)
                || part.starts_with("zero-mode(")
                || part.starts_with("solved_for")
                || part.starts_with("multiplier");
            if !known {
                parts.clear();
                break;
            }
            parts.push(part);
        }
        if parts.is_empty() {
            break;
        }
        for part in parts {
            if let Some(v) = part.strip_prefix("solved_for") {
                let v = v.trim().strip_prefix('=').ok_or_else(|| syntax(line, "expected solved_for=var"))?;
                tags.solved_for = Some(v.trim().to_string());
            } else if let Some(v) = part.strip_prefix("multiplier") {
                let v = v.trim().strip_prefix('=').ok_or_else(|| syntax(line, "expected multiplier=name"))?;
                tags.multiplier = Some(v.trim().to_string());
            } else {
                tags.origin =
                    Some(Origin::parse(part).ok_or_else(|| syntax(line, format!("bad origin '{part}'")))?);
            }
        }
        rest = rest[..open].trim_end();
    }
    Ok((rest, tags))
}

fn parse_constraint(ctx: &Ctx, line: usize, body: &str, default: Origin) -> Result<ConstraintDecl, ModelError> {
    let (label, rest) = body
        .split_once(':')
        .ok_or_else(|| syntax(line, "expected 'label : expr'"))?;
    let label = label.trim();
    if !label.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || label.is_empty() {
        return Err(syntax(line, format!("invalid label '{label}'")));
    }
    let (expr_text, tags) = split_tags(rest, line)?;
    let expr = ctx.expr(expr_text, &mut ctx.env(), line)?;
    let solved_for = match tags.solved_for {
        Some(n) => Some(ctx.lookup(&n, line)?),
        None => None,
    };
    Ok(ConstraintDecl {
        label: label.to_string(),
        expr,
        origin: tags.origin.unwrap_or(default),
        solved_for,
        multiplier: tags.multiplier,
    })
}

fn parse_rewrites(lines: &Lines, ctx: &Ctx) -> Result<RewriteSystem, ModelError> {
    let mut rw = RewriteSystem::new();
    for (line, body) in lines {
        let (lhs, rhs) = body
            .split_once("->")
            .ok_or_else(|| syntax(*line, "expected 'pattern -> replacement'"))?;
        let pat = ctx.expr(lhs, &mut ctx.env(), *line)?;
        let mono = match (pat.is_polynomial(), pat.numer().leading()) {
            (true, Some((m, c))) if pat.numer().num_terms() == 1 && c.is_one() => m.clone(),
            _ => return Err(syntax(*line, "pattern must be a bare power product")),
        };
        let rep = ctx.expr(rhs, &mut ctx.env(), *line)?;
        let rule = RewriteRule::new(mono, rep, &ctx.symbols)
            .map_err(|source| ModelError::Expr { line: *line, source })?;
        rw.push(rule);
    }
    Ok(rw)
}

fn declare_pairs(lines: &Lines, ctx: &mut Ctx) -> Result<Vec<PairDecl>, ModelError> {
    let mut pairs = Vec::new();
    for (line, body) in lines {
        let Some(rest) = body.strip_prefix("pair ") else {
            continue;
        };
        let (rest, clause) = split_for(rest);
        let words: Vec<&str> = rest.split_whitespace().collect();
        if words.len() != 3 {
            return Err(syntax(*line, "expected 'pair coordinate velocity momentum'"));
        }
        let mut found = Vec::new();
        for_each_binding(ctx, clause, *line, |env| {
            found.push((
                ctx.target(words[0], env, *line)?,
                (words[1] != "-")
                    .then(|| ctx.target(words[1], env, *line))
                    .transpose()?,
                ctx.target(words[2], env, *line)?,
            ));
            Ok(())
        })?;
        for (c, v, p) in found {
            let err = |source| ModelError::Expr { line: *line, source };
            let coordinate = ctx.symbols.ensure(&c, SymbolKind::Coordinate).map_err(err)?;
            let velocity = match v {
                Some(v) => Some(ctx.symbols.ensure(&v, SymbolKind::Velocity).map_err(err)?),
                None => None,
            };
            let momentum = ctx.symbols.ensure(&p, SymbolKind::Momentum).map_err(err)?;
            pairs.push(PairDecl {
                coordinate,
                velocity,
                momentum,
            });
        }
    }
    Ok(pairs)
}

fn parse_dirac_body(lines: &Lines, ctx: &Ctx, labels: &mut Vec<String>) -> Result<Option<DiracSource>, ModelError> {
    let mut lagrangian = None;
    let mut hamiltonian = None;
    let mut primaries = Vec::new();
    for (line, body) in lines {
        if body.starts_with("pair ") {
            continue;
        }
        if let Some(rest) = body.strip_prefix("primary ") {
            let c = parse_constraint(ctx, *line, rest, Origin::Primary)?;
            if labels.contains(&c.label) {
                return Err(ModelError::DuplicateLabel {
                    line: *line,
                    label: c.label,
                });
            }
            labels.push(c.label.clone());
            primaries.push(c);
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| syntax(*line, "expected 'key = value' in [dirac]"))?;
        let e = ctx.expr(value, &mut ctx.env(), *line)?;
        match key.trim() {
            "lagrangian" => lagrangian = Some(e),
            "hamiltonian" => hamiltonian = Some(e),
            k => return Err(syntax(*line, format!("unknown [dirac] key '{k}'"))),
        }
    }
    Ok(match (lagrangian, hamiltonian) {
        (Some(l), None) if primaries.is_empty() => Some(DiracSource::Lagrangian(l)),
        (None, Some(h)) => Some(DiracSource::Hamiltonian {
            hamiltonian: h,
            primaries,
        }),
        (None, None) if primaries.is_empty() => None,
        _ => {
            return Err(syntax(
                lines.first().map_or(0, |l| l.0),
                "[dirac] needs either a lagrangian or a hamiltonian with primaries",
            ))
        }
    })
}

pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    parse_model_with(text, &BTreeMap::new())
}

/// Parses a model, replacing integer constants by `overrides` (e.g. `N`).
pub fn parse_model_with(text: &str, overrides: &BTreeMap<String, i64>) -> Result<Model, ModelError> {
    let sections = split_sections(text)?;
    let empty = Lines::new();
    let sec = |name: &str| sections.get(name).unwrap_or(&empty);

    let mut ctx = Ctx {
        symbols: SymbolTable::new(),
        constants: BTreeMap::new(),
    };
    let mut parameters = Vec::new();
    parse_parameters(sec("parameters"), overrides, &mut ctx, &mut parameters)?;
    let variables = parse_variables(sec("variables"), &mut ctx)?;
    let declared_vars = variables.len();
    let pairs = declare_pairs(sec("dirac"), &mut ctx)?;

    let mut one_form: Vec<Option<Expr>> = vec![None; variables.len()];
    for (line, body) in sec("one_form") {
        let (body, clause) = split_for(body);
        let (lhs, rhs) = body
            .split_once('=')
            .ok_or_else(|| syntax(*line, "expected 'variable = expr'"))?;
        for_each_binding(&ctx, clause, *line, |env| {
            let name = ctx.target(lhs, env, *line)?;
            let sym = ctx.lookup(&name, *line)?;
            let pos = variables
                .iter()
                .position(|&v| v == sym)
                .ok_or_else(|| syntax(*line, format!("'{name}' is not a symplectic variable")))?;
            if one_form[pos].is_some() {
                return Err(syntax(*line, format!("one-form component '{name}' given twice")));
            }
            one_form[pos] = Some(ctx.expr(rhs, env, *line)?);
            Ok(())
        })?;
    }
    let one_form: Vec<Expr> = one_form
        .into_iter()
        .map(|a| a.unwrap_or_else(Expr::zero))
        .collect();

    let pot_lines = sec("potential");
    let potential = if pot_lines.is_empty() {
        Expr::zero()
    } else {
        let joined: Vec<&str> = pot_lines.iter().map(|(_, s)| s.as_str()).collect();
        ctx.expr(&joined.join(" "), &mut ctx.env(), pot_lines[0].0)?
    };

    let mut options = Options::default();
    let mut name = String::from("model");
    let mut rewrites = parse_rewrites(sec("rewrites"), &ctx)?;
    for (line, body) in sec("options") {
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| syntax(*line, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        if let Some(sym) = key.strip_prefix("branch.") {
            let s = ctx.lookup(sym, *line)?;
            let sign = match value {
                "+" => Sign::Plus,
                "-" => Sign::Minus,
                _ => return Err(syntax(*line, "branch sign must be + or -")),
            };
            rewrites.branches.insert(s, sign);
            continue;
        }
        match key {
            "max_level" => {
                options.max_level = value
                    .parse()
                    .ok()
                    .filter(|&v: &usize| v >= 1)
                    .ok_or_else(|| syntax(*line, "max_level must be a positive integer"))?
            }
            "multiplier" => options.multiplier_prefix = value.to_string(),
            "time" => {
                let s = ctx.lookup(value, *line)?;
                if ctx.symbols.kind(s) != SymbolKind::Parameter {
                    return Err(syntax(*line, "time must be a parameter"));
                }
                options.time = Some(s);
            }
            "name" => name = value.to_string(),
            _ => return Err(syntax(*line, format!("unknown option '{key}'"))),
        }
    }

    let mut labels = Vec::new();
    let mut declared = Vec::new();
    for (line, body) in sec("constraints") {
        let c = parse_constraint(&ctx, *line, body, Origin::AdHoc)?;
        if labels.contains(&c.label) {
            return Err(ModelError::DuplicateLabel {
                line: *line,
                label: c.label,
            });
        }
        labels.push(c.label.clone());
        declared.push(c);
    }
    let dirac = parse_dirac_body(sec("dirac"), &ctx, &mut Vec::new())?.map(|source| DiracSpec { pairs, source });

    let mut model = Model {
        name,
        symbols: ctx.symbols,
        constants: ctx.constants,
        parameters,
        variables,
        one_form,
        potential,
        chain: Vec::new(),
        pending: Vec::new(),
        rewrites,
        options,
        dirac,
        declared_vars,
        declared: declared.clone(),
    };
    for c in declared {
        if c.origin == Origin::GaugeFixing {
            model.pending.push(c);
        } else {
            model = extend_with_constraint(&model, c)?;
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
[parameters]
a, b
N = 2
[variables]
q[1..N] : coordinate
p[1..N] : momentum
[one_form]
q[i] = p[i] for i = 1..N
[potential]
sum(i, 1, N, p[i]^2)/2
[constraints]
C1 : q[1] - a [ad-hoc] [solved_for=q_1]
G : q[2] - b [gauge-fixing] [multiplier=mu]
";

    #[test]
    fn expands_ranges_and_injects() {
        let m = parse_model(SMALL).unwrap();
        assert_eq!(m.variable_names(), ["q_1", "q_2", "p_1", "p_2", "eta1"]);
        assert_eq!(m.chain.len(), 1);
        assert_eq!(m.pending.len(), 1);
        assert_eq!(m.one_form[4], m.parse_expr("q_1 - a").unwrap());
        assert_eq!(m.chain[0].solved_for, m.sym("q_1"));
    }

    #[test]
    fn override_changes_dimension() {
        let o = [("N".to_string(), 3)].into_iter().collect();
        let m = parse_model_with(SMALL, &o).unwrap();
        assert_eq!(m.dim(), 7);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_model("[variables]\nq[1..M] : coordinate\n"),
            Err(ModelError::NonConcreteRange { line: 2, .. })
        ));
        assert!(matches!(
            parse_model("[variables]\nx : coordinate\n[constraints]\nA : x\nA : x^2\n"),
            Err(ModelError::DuplicateLabel { line: 5, .. })
        ));
        assert!(matches!(
            parse_model("[variables]\nx : coordinate\n[potential]\nx + z\n"),
            Err(ModelError::Expr { line: 4, .. })
        ));
        assert!(matches!(parse_model("[bogus]\n"), Err(ModelError::Syntax { line: 1, .. })));
    }

    #[test]
    fn empty_constraints() {
        let m = parse_model("[variables]\nx : coordinate\np : momentum\n[one_form]\nx = p\n[constraints]\n").unwrap();
        assert!(m.chain.is_empty());
        assert_eq!(m.dim(), 2);
    }
}
