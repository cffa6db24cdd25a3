use crate::model::{Instance, SortId, TransitionSystem, Type, Value};

use super::diag::{Diagnostic, ParseError};
use super::expr::{describe, Cursor, PResult};
use super::lexer::{lex, Tok};

/// Parses an instance file binding every sort, constant and integer range of
/// `sys`. Enumerated sorts may be omitted; if given they must match the
/// specification.
pub fn parse_instance(text: &str, sys: &TransitionSystem) -> Result<Instance, ParseError> {
    let mut c = Cursor::new(lex(text)?);
    let mut sorts: Vec<Option<Vec<String>>> =
        sys.sorts.iter().map(|s| s.fixed_elements.clone()).collect();
    let mut given_sorts = vec![false; sys.sorts.len()];
    let mut pending_consts = Vec::new();
    let mut ranges: Vec<Option<(i64, i64)>> = vec![None; sys.ranges.len()];
    while !c.at_eof() {
        let (kw, sp) = c.ident("`sort`, `const` or `intrange`")?;
        match kw.as_str() {
            "sort" => {
                let (name, nsp) = c.ident("a sort name")?;
                let s = sys
                    .sort_index(&name)
                    .ok_or_else(|| Diagnostic::new(format!("unknown sort `{name}`"), nsp))?
                    as usize;
                if given_sorts[s] {
                    return Err(Diagnostic::new(format!("sort `{name}` given twice"), nsp).into());
                }
                given_sorts[s] = true;
                c.expect(&Tok::Eq, "`=`")?;
                c.expect(&Tok::LBrace, "`{`")?;
                let mut els: Vec<String> = Vec::new();
                if !c.eat(&Tok::RBrace) {
                    loop {
                        let (e, esp) = c.ident("an element name")?;
                        if els.contains(&e) {
                            return Err(Diagnostic::new(format!("duplicate element `{e}`"), esp).into());
                        }
                        els.push(e);
                        if !c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    c.expect(&Tok::RBrace, "`}`")?;
                }
                if els.is_empty() {
                    return Err(Diagnostic::new(format!("sort `{name}` must be nonempty"), nsp).into());
                }
                if els.len() > u16::MAX as usize {
                    return Err(Diagnostic::new(format!("sort `{name}` is too large"), nsp).into());
                }
                if let Some(fixed) = &sys.sorts[s].fixed_elements {
                    if *fixed != els {
                        return Err(Diagnostic::new(
                            format!("sort `{name}` is enumerated in the specification and must match it"),
                            nsp,
                        )
                        .into());
                    }
                }
                sorts[s] = Some(els);
                c.eat(&Tok::Semi);
            }
            "const" => {
                let (name, nsp) = c.ident("a constant name")?;
                let i = sys
                    .consts
                    .iter()
                    .position(|k| k.name == name)
                    .ok_or_else(|| Diagnostic::new(format!("unknown constant `{name}`"), nsp))?;
                c.expect(&Tok::Eq, "`=`")?;
                // Values are resolved once all sorts are known.
                let (start, end) = c.skip_statement()?;
                pending_consts.push((i, nsp, start, end));
            }
            "intrange" => {
                let (name, nsp) = c.ident("a range name")?;
                let i = sys
                    .ranges
                    .iter()
                    .position(|r| *r == name)
                    .ok_or_else(|| Diagnostic::new(format!("unknown integer range `{name}`"), nsp))?;
                c.eat(&Tok::Eq);
                let lo = c.int()?;
                if !c.eat(&Tok::DotDot) {
                    c.eat(&Tok::Comma);
                }
                let hi = c.int()?;
                if hi < lo {
                    return Err(Diagnostic::new("empty integer range", c.prev_span()).into());
                }
                ranges[i] = Some((lo, hi));
                c.eat(&Tok::Semi);
            }
            _ => {
                return Err(Diagnostic::new(
                    format!("expected `sort`, `const` or `intrange`, found `{kw}`"),
                    sp,
                )
                .into())
            }
        }
    }
    let end = c.span();
    let mut errors = Vec::new();
    for (s, els) in sorts.iter().enumerate() {
        if els.is_none() {
            errors.push(Diagnostic::new(format!("missing sort `{}`", sys.sorts[s].name), end));
        }
    }
    for (r, b) in ranges.iter().enumerate() {
        if b.is_none() {
            errors.push(Diagnostic::new(format!("missing integer range `{}`", sys.ranges[r]), end));
        }
    }
    if !errors.is_empty() {
        return Err(ParseError { diagnostics: errors });
    }
    let sorts: Vec<Vec<String>> = sorts.into_iter().map(Option::unwrap).collect();
    let ranges: Vec<(i64, i64)> = ranges.into_iter().map(Option::unwrap).collect();
    let mut consts: Vec<Option<Value>> = vec![None; sys.consts.len()];
    for (i, nsp, start, stop) in pending_consts {
        let mut sub = c.sub(start, stop);
        let lit = ValueParser { sys, sorts: &sorts, ranges: &ranges };
        let v = lit.value(&mut sub, &sys.consts[i].ty)?;
        if !sub.at_eof() {
            return Err(sub.error("`;`").into());
        }
        if consts[i].replace(v).is_some() {
            errors.push(Diagnostic::new(format!("constant `{}` given twice", sys.consts[i].name), nsp));
        }
    }
    for (i, v) in consts.iter().enumerate() {
        if v.is_none() {
            errors.push(Diagnostic::new(format!("missing constant `{}`", sys.consts[i].name), end));
        }
    }
    if !errors.is_empty() {
        return Err(ParseError { diagnostics: errors });
    }
    Ok(Instance {
        sort_elements: sorts,
        consts: consts.into_iter().map(Option::unwrap).collect(),
        ranges,
    })
}

struct ValueParser<'a> {
    sys: &'a TransitionSystem,
    sorts: &'a [Vec<String>],
    ranges: &'a [(i64, i64)],
}

impl ValueParser<'_> {
    fn value(&self, c: &mut Cursor, ty: &Type) -> PResult<Value> {
        let sp = c.span();
        let wrong = |found: &str| {
            Diagnostic::new(
                format!("expected a value of type {}, found {found}", describe(self.sys, ty)),
                sp,
            )
        };
        match ty {
            Type::Bool => match c.ident("`true` or `false`")?.0.as_str() {
                "true" | "TRUE" => Ok(Value::TRUE),
                "false" | "FALSE" => Ok(Value::FALSE),
                other => Err(wrong(&format!("`{other}`"))),
            },
            Type::Int(r) => {
                let i = c.int()?;
                if let Some(r) = r {
                    let (lo, hi) = match r {
                        crate::model::IntRange::Named(k) => self.ranges[*k],
                        crate::model::IntRange::Literal(lo, hi) => (*lo, *hi),
                    };
                    if !(lo..=hi).contains(&i) {
                        return Err(Diagnostic::new(format!("{i} is outside {lo}..{hi}"), sp));
                    }
                }
                Ok(Value::Int(i))
            }
            Type::Sort(s) => {
                let (name, nsp) = c.ident("a sort element")?;
                match self.sorts[*s as usize].iter().position(|e| *e == name) {
                    Some(e) => Ok(Value::Atom(*s as SortId, e as u16)),
                    None => Err(Diagnostic::new(
                        format!("`{name}` is not an element of {}", self.sys.sorts[*s as usize].name),
                        nsp,
                    )),
                }
            }
            Type::Set(t) => {
                c.expect(&Tok::LBrace, "`{`")?;
                let mut xs = Vec::new();
                if !c.eat(&Tok::RBrace) {
                    loop {
                        xs.push(self.value(c, t)?);
                        if !c.eat(&Tok::Comma) {
                            break;
                        }
                    }
                    c.expect(&Tok::RBrace, "`}`")?;
                }
                Ok(Value::set_from(xs))
            }
            Type::Tuple(ts) => {
                c.expect(&Tok::LAngle, "`<<`")?;
                let mut xs = Vec::new();
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        c.expect(&Tok::Comma, "`,`")?;
                    }
                    xs.push(self.value(c, t)?);
                }
                c.expect(&Tok::RAngle, "`>>`")?;
                Ok(Value::Tuple(xs))
            }
            Type::Fn(s, t) => {
                c.expect(&Tok::LBracket, "`[`")?;
                let n = self.sorts[*s as usize].len();
                let mut xs = Vec::with_capacity(n);
                for i in 0..n {
                    if i > 0 {
                        c.expect(&Tok::Comma, "`,`")?;
                    }
                    xs.push(self.value(c, t)?);
                }
                c.expect(&Tok::RBracket, "`]`")?;
                Ok(Value::Func(xs))
            }
            Type::Any => Err(wrong("a value of unknown type")),
        }
    }
}
