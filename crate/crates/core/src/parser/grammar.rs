use std::collections::BTreeSet;

use crate::model::{Expr, QuantBinding, Quantifier, Span, TransitionSystem, Type};

use super::diag::{Diagnostic, ParseError};
use super::expr::{bool_expr, parse_bindings, Cursor, Scope};
use super::lexer::{lex, Tok};
use super::printer::print_expr;

/// A quantifier prefix that candidate lemmas are built under. Level `i`
/// binds parameter slot `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub levels: Vec<QuantBinding>,
    pub types: Vec<Type>,
}

/// An atomic predicate, resolved once per template it type-checks under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Predicate {
    /// Canonical rendering of the predicate.
    pub text: String,
    pub span: Span,
    pub per_template: Vec<Option<Expr>>,
    /// State variables referenced by the predicate.
    pub vars: BTreeSet<usize>,
}

impl Predicate {
    /// Template levels the predicate refers to under template `t`.
    pub fn levels(&self, t: usize) -> BTreeSet<usize> {
        self.per_template[t]
            .as_ref()
            .map(|e| e.free_slots())
            .unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub templates: Vec<Template>,
    pub preds: Vec<Predicate>,
    pub max_literals: usize,
}

pub const DEFAULT_MAX_LITERALS: usize = 3;

impl Grammar {
    /// Keeps the predicates whose footprint lies within `vars`; predicates
    /// over bound names only are always kept.
    pub fn slice(&self, vars: &BTreeSet<usize>) -> Grammar {
        Grammar {
            templates: self.templates.clone(),
            preds: self
                .preds
                .iter()
                .filter(|p| p.vars.is_subset(vars))
                .cloned()
                .collect(),
            max_literals: self.max_literals,
        }
    }

    pub fn without(&self, texts: &[&str]) -> Grammar {
        Grammar {
            preds: self
                .preds
                .iter()
                .filter(|p| !texts.contains(&p.text.as_str()))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }
}

/// Parses a grammar file against a system.
pub fn parse_grammar(text: &str, sys: &TransitionSystem) -> Result<Grammar, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    let mut templates = Vec::new();
    let mut raw_preds = Vec::new();
    let mut max_literals = DEFAULT_MAX_LITERALS;
    while !c.at_eof() {
        let (kw, sp) = c.ident("`template`, `pred` or `maxliterals`")?;
        match kw.as_str() {
            "template" => templates.push(template(&mut c, sys)?),
            "pred" => {
                let (start, end) = c.skip_statement()?;
                if start == end {
                    return Err(Diagnostic::new("empty predicate", sp).into());
                }
                raw_preds.push((start, end));
            }
            "maxliterals" => {
                let n = c.int()?;
                if n < 1 {
                    return Err(Diagnostic::new("maxliterals must be positive", c.prev_span()).into());
                }
                max_literals = n as usize;
                c.eat(&Tok::Semi);
            }
            _ => {
                return Err(Diagnostic::new(
                    format!("expected `template`, `pred` or `maxliterals`, found `{kw}`"),
                    sp,
                )
                .into())
            }
        }
    }
    if templates.is_empty() && !raw_preds.is_empty() {
        return Err(Diagnostic::new("predicates need at least one `template`", c.span()).into());
    }
    let mut preds = Vec::new();
    let mut errors = Vec::new();
    for (start, end) in raw_preds {
        let mut per_template = Vec::new();
        let mut first_err = None;
        for t in &templates {
            let mut sub = c.sub(start, end);
            let mut scope = Scope::new(sys, true);
            scope.params = t
                .levels
                .iter()
                .zip(&t.types)
                .map(|(b, ty)| (b.name.clone(), ty.clone()))
                .collect();
            let parsed = bool_expr(&mut sub, &mut scope).and_then(|e| {
                if sub.at_eof() {
                    Ok(e)
                } else {
                    Err(sub.error("`;`"))
                }
            });
            match parsed {
                Ok(e) => per_template.push(Some(e)),
                Err(d) => {
                    first_err.get_or_insert(d);
                    per_template.push(None);
                }
            }
        }
        let Some(e) = per_template.iter().flatten().next() else {
            errors.push(first_err.expect("at least one template"));
            continue;
        };
        let vars = e.vars();
        let span = e.span;
        let text = print_expr(sys, e);
        preds.push(Predicate { text, span, per_template, vars });
    }
    if !errors.is_empty() {
        return Err(ParseError { diagnostics: errors });
    }
    Ok(Grammar { templates, preds, max_literals })
}

fn template(c: &mut Cursor, sys: &TransitionSystem) -> Result<Template, ParseError> {
    let mut scope = Scope::new(sys, false);
    let mut levels = Vec::new();
    let mut types = Vec::new();
    // A bare `template;` yields quantifier-free clauses.
    if c.eat(&Tok::Semi) {
        return Ok(Template { levels, types });
    }
    loop {
        let q = if c.eat(&Tok::Forall) {
            Quantifier::Forall
        } else {
            c.expect(&Tok::Exists, "`forall` or `exists`")?;
            Quantifier::Exists
        };
        for b in parse_bindings(c, &mut scope)? {
            levels.push(QuantBinding { q, name: b.name, domain: b.domain });
            types.push(b.ty);
        }
        if c.eat(&Tok::Semi) || c.at_eof() {
            break;
        }
        c.expect(&Tok::Colon, "`:` or `;`")?;
    }
    Ok(Template { levels, types })
}
