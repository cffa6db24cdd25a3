use std::collections::BTreeSet;

use crate::model::{
    Action, ConstDecl, Expr, InitClause, InitKind, Lemma, Param, Sort, Span, TransitionSystem,
    Type, VarDecl,
};

use super::diag::{Diagnostic, ParseError};
use super::expr::{bool_expr, describe, expr, parse_bindings, parse_type, Cursor, PResult, Scope};
use super::lexer::{lex, Tok};

/// Parses a protocol specification.
pub fn parse_spec(text: &str) -> Result<TransitionSystem, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    if !c.eat_kw("protocol") {
        return Err(Diagnostic::new("expected 'protocol' header", c.span()).into());
    }
    let (name, _) = c.ident("a protocol name")?;
    c.eat(&Tok::Semi);
    let mut sys = TransitionSystem {
        name,
        sorts: Vec::new(),
        consts: Vec::new(),
        ranges: Vec::new(),
        vars: Vec::new(),
        init: Vec::new(),
        actions: Vec::new(),
        lemmas: Vec::new(),
    };
    let mut errors = Vec::new();
    let mut init_seen = None;
    let mut raw_init: Vec<(usize, InitClause, Span)> = Vec::new();
    while !c.at_eof() {
        let kw_span = c.span();
        let (kw, _) = c.ident("a declaration")?;
        match kw.as_str() {
            "sort" => sort_decl(&mut c, &mut sys)?,
            "const" => {
                let (name, sp) = c.ident("a constant name")?;
                check_fresh(&sys, &name, sp)?;
                c.expect(&Tok::Colon, "`:`")?;
                let ty = parse_type(&mut c, &mut sys)?;
                c.eat(&Tok::Semi);
                sys.consts.push(ConstDecl { name, ty });
            }
            "var" => {
                let (name, sp) = c.ident("a variable name")?;
                check_fresh(&sys, &name, sp)?;
                c.expect(&Tok::Colon, "`:`")?;
                let ty = parse_type(&mut c, &mut sys)?;
                if has_unbounded(&ty) {
                    return Err(Diagnostic::new("state variables need bounded integer types", sp).into());
                }
                c.eat(&Tok::Semi);
                sys.vars.push(VarDecl { name, ty });
            }
            "init" => {
                if init_seen.is_some() {
                    return Err(Diagnostic::new("duplicate `init` block", kw_span).into());
                }
                init_seen = Some(kw_span);
                c.expect(&Tok::LBrace, "`{`")?;
                while !c.eat(&Tok::RBrace) {
                    let (v, sp) = c.ident("a variable name")?;
                    let var = sys
                        .var_index(&v)
                        .ok_or_else(|| Diagnostic::new(format!("unknown variable `{v}`"), sp))?;
                    let kind = if c.eat(&Tok::Eq) {
                        InitKind::Eq
                    } else {
                        c.expect(&Tok::In, "`=` or `in`")?;
                        InitKind::In
                    };
                    let mut scope = Scope::new(&sys, false);
                    let (e, t) = expr(&mut c, &mut scope)?;
                    let want = match kind {
                        InitKind::Eq => sys.vars[var].ty.clone(),
                        InitKind::In => Type::set_of(sys.vars[var].ty.clone()),
                    };
                    if !t.compatible(&want) {
                        return Err(Diagnostic::new(
                            format!(
                                "type error: initializer of `{v}` has type {}, expected {}",
                                describe(&sys, &t),
                                describe(&sys, &want)
                            ),
                            e.span,
                        )
                        .into());
                    }
                    c.eat(&Tok::Semi);
                    raw_init.push((var, InitClause { kind, expr: e }, sp));
                }
            }
            "action" => {
                let a = action(&mut c, &sys, &mut errors)?;
                if sys.action_index(&a.name).is_some() {
                    errors.push(Diagnostic::new(format!("duplicate action `{}`", a.name), a.span));
                } else {
                    sys.actions.push(a);
                }
            }
            "lemma" => {
                let (name, sp) = c.ident("a lemma name")?;
                c.expect(&Tok::Eq, "`=`")?;
                let mut scope = Scope::new(&sys, true);
                let body = bool_expr(&mut c, &mut scope)?;
                c.eat(&Tok::Semi);
                if sys.lemma(&name).is_some() {
                    errors.push(Diagnostic::new(format!("duplicate lemma `{name}`"), sp));
                } else {
                    sys.lemmas.push(Lemma::from_expr(name, body));
                }
            }
            _ => {
                return Err(Diagnostic::new(
                    format!("expected a declaration (sort, const, var, init, action, lemma), found `{kw}`"),
                    kw_span,
                )
                .into())
            }
        }
    }
    let Some(init_span) = init_seen else {
        return Err(Diagnostic::new("missing `init` block", c.span()).into());
    };
    let mut init: Vec<Option<InitClause>> = vec![None; sys.vars.len()];
    for (var, clause, sp) in raw_init {
        if init[var].replace(clause).is_some() {
            errors.push(Diagnostic::new(
                format!("variable `{}` initialized twice", sys.vars[var].name),
                sp,
            ));
        }
    }
    for (i, slot) in init.iter().enumerate() {
        if slot.is_none() {
            errors.push(Diagnostic::new(
                format!("variable `{}` has no initializer", sys.vars[i].name),
                init_span,
            ));
        }
    }
    if sys.actions.is_empty() {
        errors.push(Diagnostic::new("a protocol needs at least one action", c.span()));
    }
    if !errors.is_empty() {
        return Err(ParseError { diagnostics: errors });
    }
    sys.init = init.into_iter().map(Option::unwrap).collect();
    Ok(sys)
}

fn has_unbounded(t: &Type) -> bool {
    match t {
        Type::Int(None) => true,
        Type::Set(t) | Type::Fn(_, t) => has_unbounded(t),
        Type::Tuple(ts) => ts.iter().any(has_unbounded),
        _ => false,
    }
}

fn check_fresh(sys: &TransitionSystem, name: &str, sp: Span) -> PResult<()> {
    let taken = sys.var_index(name).is_some()
        || sys.consts.iter().any(|c| c.name == name)
        || sys.sort_index(name).is_some()
        || sys
            .sorts
            .iter()
            .any(|s| s.fixed_elements.iter().flatten().any(|e| e == name));
    if taken {
        Err(Diagnostic::new(format!("`{name}` is already declared"), sp))
    } else {
        Ok(())
    }
}

fn sort_decl(c: &mut Cursor, sys: &mut TransitionSystem) -> PResult<()> {
    let (name, sp) = c.ident("a sort name")?;
    check_fresh(sys, &name, sp)?;
    let mut fixed = None;
    if c.eat(&Tok::Eq) {
        c.expect(&Tok::LBrace, "`{`")?;
        let mut els: Vec<String> = Vec::new();
        loop {
            let (e, esp) = c.ident("an element name")?;
            check_fresh(sys, &e, esp)?;
            if els.contains(&e) {
                return Err(Diagnostic::new(format!("duplicate element `{e}`"), esp));
            }
            els.push(e);
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
        c.expect(&Tok::RBrace, "`}`")?;
        fixed = Some(els);
    }
    c.eat(&Tok::Semi);
    sys.sorts.push(Sort { name, fixed_elements: fixed });
    Ok(())
}

fn action(
    c: &mut Cursor,
    sys: &TransitionSystem,
    errors: &mut Vec<Diagnostic>,
) -> PResult<Action> {
    let (name, span) = c.ident("an action name")?;
    let mut scope = Scope::new(sys, true);
    c.expect(&Tok::LParen, "`(`")?;
    let mut params = Vec::new();
    if !c.eat(&Tok::RParen) {
        for b in parse_bindings(c, &mut scope)? {
            params.push(Param { name: b.name, domain: b.domain, ty: b.ty });
        }
        c.expect(&Tok::RParen, "`)`")?;
    }
    c.expect(&Tok::LBrace, "`{`")?;
    c.expect_kw("require")?;
    let pre = bool_expr(c, &mut scope)?;
    c.expect(&Tok::Semi, "`;`")?;
    let mut updates: Vec<Option<Option<Expr>>> = vec![None; sys.vars.len()];
    while !c.eat(&Tok::RBrace) {
        let (v, sp) = c.ident("an update or `unchanged`")?;
        if v == "unchanged" {
            loop {
                let (u, usp) = c.ident("a variable name")?;
                match sys.var_index(&u) {
                    Some(i) => {
                        if updates[i].replace(None).is_some() {
                            errors.push(Diagnostic::new(
                                format!("`{u}` is updated twice in action `{name}`"),
                                usp,
                            ));
                        }
                    }
                    None => errors.push(Diagnostic::new(format!("unknown variable `{u}`"), usp)),
                }
                if !c.eat(&Tok::Comma) {
                    break;
                }
            }
            c.expect(&Tok::Semi, "`;`")?;
            continue;
        }
        let var = sys
            .var_index(&v)
            .ok_or_else(|| Diagnostic::new(format!("unknown variable `{v}`"), sp))?;
        c.expect(&Tok::Prime, "`'`")?;
        c.expect(&Tok::Eq, "`=`")?;
        let (e, t) = expr(c, &mut scope)?;
        c.expect(&Tok::Semi, "`;`")?;
        if !t.compatible(&sys.vars[var].ty) {
            errors.push(Diagnostic::new(
                format!(
                    "type error: update of `{v}` has type {}, expected {}",
                    describe(sys, &t),
                    describe(sys, &sys.vars[var].ty)
                ),
                e.span,
            ));
        }
        if updates[var].replace(Some(e)).is_some() {
            errors.push(Diagnostic::new(format!("`{v}` is updated twice in action `{name}`"), sp));
        }
    }
    let missing: BTreeSet<&str> = updates
        .iter()
        .enumerate()
        .filter(|(_, u)| u.is_none())
        .map(|(i, _)| sys.vars[i].name.as_str())
        .collect();
    for m in &missing {
        errors.push(Diagnostic::new(
            format!(
                "action `{name}` does not update `{m}`; add `{m}' = ...` or list it under `unchanged`"
            ),
            span,
        ));
    }
    Ok(Action {
        name,
        params,
        pre,
        updates: updates.into_iter().map(Option::flatten).collect(),
        span,
    })
}

/// Parses a closed boolean formula against a system, e.g. a lemma read back
/// from a graph file.
pub fn parse_formula(text: &str, sys: &TransitionSystem) -> Result<Expr, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    let mut scope = Scope::new(sys, true);
    let e = bool_expr(&mut c, &mut scope)?;
    if !c.at_eof() {
        return Err(c.error("end of formula").into());
    }
    Ok(e)
}
