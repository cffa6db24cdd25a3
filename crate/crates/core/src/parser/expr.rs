//! Expression parsing with name resolution and type checking in one pass.

use crate::model::{
    BinOp, Binder, Expr, ExprKind, IntRange, Quantifier, SortId, Span, TransitionSystem, Type,
    Value,
};

use super::diag::Diagnostic;
use super::lexer::{Tok, Token};
use super::printer::print_type;

pub(crate) type PResult<T> = Result<T, Diagnostic>;

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pub pos: usize,
}

impl Cursor {
    pub fn new(toks: Vec<Token>) -> Cursor {
        Cursor { toks, pos: 0 }
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    pub fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    pub fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    pub fn bump(&mut self) -> &Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, what: &str) -> Diagnostic {
        Diagnostic::new(
            format!("expected {what}, found {}", self.peek().describe()),
            self.span(),
        )
    }

    pub fn expect(&mut self, t: &Tok, what: &str) -> PResult<Span> {
        if self.peek() == t {
            Ok(self.bump().span)
        } else {
            Err(self.error(what))
        }
    }

    pub fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{kw}`")))
        }
    }

    pub fn ident(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => Err(self.error(what)),
        }
    }

    pub fn int(&mut self) -> PResult<i64> {
        let neg = self.eat(&Tok::Minus);
        match *self.peek() {
            Tok::Int(i) => {
                self.bump();
                Ok(if neg { -i } else { i })
            }
            _ => Err(self.error("an integer")),
        }
    }

    /// Skips to just past the next `;` at bracket depth zero, returning the
    /// index range of the skipped tokens (excluding the `;`).
    pub fn skip_statement(&mut self) -> PResult<(usize, usize)> {
        let start = self.pos;
        let mut depth = 0i32;
        loop {
            match self.peek() {
                Tok::LParen | Tok::LBracket | Tok::LBrace | Tok::LAngle => depth += 1,
                Tok::RParen | Tok::RBracket | Tok::RBrace | Tok::RAngle => depth -= 1,
                Tok::Semi if depth <= 0 => {
                    let end = self.pos;
                    self.bump();
                    return Ok((start, end));
                }
                Tok::Eof => return Err(self.error("`;`")),
                _ => {}
            }
            self.bump();
        }
    }

    /// A cursor over `toks[start..end]` followed by end of input.
    pub fn sub(&self, start: usize, end: usize) -> Cursor {
        let mut toks = self.toks[start..end].to_vec();
        let sp = self.toks[end].span;
        toks.push(Token { tok: Tok::Eof, span: sp });
        Cursor::new(toks)
    }
}

/// Names visible to an expression.
pub(crate) struct Scope<'a> {
    pub sys: &'a TransitionSystem,
    /// Bound names; the slot of a name is its index.
    pub params: Vec<(String, Type)>,
    /// Whether state variables may be referenced.
    pub state: bool,
}

impl<'a> Scope<'a> {
    pub fn new(sys: &'a TransitionSystem, state: bool) -> Scope<'a> {
        Scope { sys, params: Vec::new(), state }
    }

    fn resolve(&self, name: &str, span: Span) -> PResult<(ExprKind, Type)> {
        if let Some(slot) = self.params.iter().rposition(|(n, _)| n == name) {
            let ty = self.params[slot].1.clone();
            return Ok((ExprKind::Param { slot, name: name.to_string() }, ty));
        }
        if let Some(i) = self.sys.var_index(name) {
            if !self.state {
                return Err(Diagnostic::new(
                    format!("state variable `{name}` cannot appear here"),
                    span,
                ));
            }
            return Ok((ExprKind::Var(i), self.sys.vars[i].ty.clone()));
        }
        if let Some(i) = self.sys.consts.iter().position(|c| c.name == name) {
            return Ok((ExprKind::Const(i), self.sys.consts[i].ty.clone()));
        }
        if let Some(s) = self.sys.sort_index(name) {
            return Ok((ExprKind::SortSet(s), Type::set_of(Type::Sort(s))));
        }
        for (s, sort) in self.sys.sorts.iter().enumerate() {
            if let Some(e) = sort.fixed_elements.as_ref().and_then(|els| els.iter().position(|x| x == name)) {
                return Ok((
                    ExprKind::Lit(Value::Atom(s as SortId, e as u16)),
                    Type::Sort(s as SortId),
                ));
            }
        }
        match name {
            "true" | "TRUE" => Ok((ExprKind::Lit(Value::TRUE), Type::Bool)),
            "false" | "FALSE" => Ok((ExprKind::Lit(Value::FALSE), Type::Bool)),
            _ => Err(Diagnostic::new(format!("unknown identifier `{name}`"), span)),
        }
    }
}

type Typed = (Expr, Type);

fn join(a: Span, b: Span) -> Span {
    if a.line == b.line && b.column >= a.column {
        Span { line: a.line, column: a.column, length: b.column + b.length - a.column }
    } else {
        a
    }
}

fn type_error(msg: impl Into<String>, span: Span) -> Diagnostic {
    Diagnostic::new(format!("type error: {}", msg.into()), span)
}

pub(crate) fn describe(sys: &TransitionSystem, t: &Type) -> String {
    print_type(sys, t)
}

fn want_bool(s: &Scope, (e, t): Typed) -> PResult<Expr> {
    if t == Type::Bool {
        Ok(e)
    } else {
        Err(type_error(format!("expected bool, found {}", describe(s.sys, &t)), e.span))
    }
}

fn want_set(s: &Scope, e: &Expr, t: &Type) -> PResult<Type> {
    match t {
        Type::Set(inner) => Ok((**inner).clone()),
        _ => Err(type_error(format!("expected a set, found {}", describe(s.sys, t)), e.span)),
    }
}

fn want_int(s: &Scope, e: &Expr, t: &Type) -> PResult<()> {
    match t {
        Type::Int(_) => Ok(()),
        _ => Err(type_error(format!("expected an integer, found {}", describe(s.sys, t)), e.span)),
    }
}

pub(crate) fn parse_type(c: &mut Cursor, sys: &mut TransitionSystem) -> PResult<Type> {
    let (name, sp) = c.ident("a type")?;
    Ok(match name.as_str() {
        "bool" => Type::Bool,
        "int" => {
            if let Tok::Ident(r) = c.peek().clone() {
                c.bump();
                let idx = match sys.ranges.iter().position(|x| *x == r) {
                    Some(i) => i,
                    None => {
                        sys.ranges.push(r);
                        sys.ranges.len() - 1
                    }
                };
                Type::Int(Some(IntRange::Named(idx)))
            } else {
                let lo = c.int()?;
                c.expect(&Tok::DotDot, "`..`")?;
                let hi = c.int()?;
                if hi < lo {
                    return Err(Diagnostic::new("empty integer range", c.prev_span()));
                }
                Type::Int(Some(IntRange::Literal(lo, hi)))
            }
        }
        "set" => {
            c.expect_kw("of")?;
            Type::set_of(parse_type(c, sys)?)
        }
        "tuple" => {
            c.expect(&Tok::LParen, "`(`")?;
            let mut ts = vec![parse_type(c, sys)?];
            while c.eat(&Tok::Comma) {
                ts.push(parse_type(c, sys)?);
            }
            c.expect(&Tok::RParen, "`)`")?;
            Type::Tuple(ts)
        }
        "fn" => {
            let (s, ssp) = c.ident("a sort name")?;
            let sid = sys
                .sort_index(&s)
                .ok_or_else(|| Diagnostic::new(format!("unknown sort `{s}`"), ssp))?;
            c.expect(&Tok::Arrow, "`->`")?;
            Type::Fn(sid, Box::new(parse_type(c, sys)?))
        }
        other => match sys.sort_index(other) {
            Some(s) => Type::Sort(s),
            None => return Err(Diagnostic::new(format!("unknown type `{other}`"), sp)),
        },
    })
}

/// A bound name with its domain, as written in a quantifier prefix or a
/// parameter list.
pub(crate) struct Binding {
    pub name: String,
    pub domain: Expr,
    pub ty: Type,
}

/// Parses `x, y in S, z in T` and pushes each name into scope as it goes.
/// Domains must not depend on state.
pub(crate) fn parse_bindings(c: &mut Cursor, s: &mut Scope) -> PResult<Vec<Binding>> {
    let mut out = Vec::new();
    loop {
        let mut names = vec![c.ident("a bound name")?];
        while c.eat(&Tok::Comma) {
            names.push(c.ident("a bound name")?);
        }
        c.expect(&Tok::In, "`in`")?;
        let state = std::mem::replace(&mut s.state, false);
        let dom = setop(c, s);
        s.state = state;
        let (dom, dty) = dom?;
        let ty = want_set(s, &dom, &dty)?;
        for (name, _) in names {
            s.params.push((name.clone(), ty.clone()));
            out.push(Binding { name, domain: dom.clone(), ty: ty.clone() });
        }
        let more = *c.peek() == Tok::Comma
            && matches!(c.peek_at(1), Tok::Ident(_))
            && matches!(c.peek_at(2), Tok::Comma | Tok::In);
        if !more {
            return Ok(out);
        }
        c.bump();
    }
}

pub(crate) fn expr(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    match c.peek() {
        Tok::Forall | Tok::Exists => quant(c, s),
        Tok::Ident(k) if k == "if" => ite(c, s),
        _ => implies(c, s),
    }
}

pub(crate) fn bool_expr(c: &mut Cursor, s: &mut Scope) -> PResult<Expr> {
    let t = expr(c, s)?;
    want_bool(s, t)
}

fn quant(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let start = c.span();
    let q = if c.eat(&Tok::Forall) {
        Quantifier::Forall
    } else {
        c.expect(&Tok::Exists, "a quantifier")?;
        Quantifier::Exists
    };
    let depth = s.params.len();
    let bs = parse_bindings(c, s)?;
    c.expect(&Tok::Colon, "`:`")?;
    let body = bool_expr(c, s);
    s.params.truncate(depth);
    let mut e = body?;
    for (i, b) in bs.into_iter().enumerate().rev() {
        let span = join(start, e.span);
        e = Expr::with_span(
            ExprKind::Quant {
                q,
                binder: Binder { name: b.name, slot: depth + i, domain: Box::new(b.domain) },
                body: Box::new(e),
            },
            span,
        );
    }
    Ok((e, Type::Bool))
}

fn ite(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let start = c.expect_kw("if")?;
    let cond = bool_expr(c, s)?;
    c.expect_kw("then")?;
    let (a, ta) = expr(c, s)?;
    c.expect_kw("else")?;
    let (b, tb) = expr(c, s)?;
    let ty = ta.unify(&tb).ok_or_else(|| {
        type_error(
            format!("branches have types {} and {}", describe(s.sys, &ta), describe(s.sys, &tb)),
            b.span,
        )
    })?;
    let span = join(start, b.span);
    Ok((Expr::with_span(ExprKind::Ite(Box::new(cond), Box::new(a), Box::new(b)), span), ty))
}

fn implies(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let lhs = or(c, s)?;
    if !c.eat(&Tok::Implies) {
        return Ok(lhs);
    }
    let a = want_bool(s, lhs)?;
    let rhs = expr(c, s)?;
    let b = want_bool(s, rhs)?;
    let span = join(a.span, b.span);
    Ok((Expr::with_span(ExprKind::Binary(BinOp::Implies, Box::new(a), Box::new(b)), span), Type::Bool))
}

fn nary(
    c: &mut Cursor,
    s: &mut Scope,
    op: Tok,
    sub: fn(&mut Cursor, &mut Scope) -> PResult<Typed>,
    build: fn(Vec<Expr>) -> ExprKind,
) -> PResult<Typed> {
    let first = sub(c, s)?;
    if *c.peek() != op {
        return Ok(first);
    }
    let mut xs = vec![want_bool(s, first)?];
    while c.eat(&op) {
        let t = sub(c, s)?;
        xs.push(want_bool(s, t)?);
    }
    let span = join(xs[0].span, xs[xs.len() - 1].span);
    Ok((Expr::with_span(build(xs), span), Type::Bool))
}

fn or(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    nary(c, s, Tok::Or, and, ExprKind::Or)
}

fn and(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    nary(c, s, Tok::And, not, ExprKind::And)
}

fn not(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    if *c.peek() == Tok::Not {
        let start = c.bump().span;
        let inner = not(c, s)?;
        let e = want_bool(s, inner)?;
        let span = join(start, e.span);
        return Ok((Expr::with_span(ExprKind::Not(Box::new(e)), span), Type::Bool));
    }
    cmp(c, s)
}

fn cmp(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let (a, ta) = setop(c, s)?;
    let op = match c.peek() {
        Tok::Eq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::In => BinOp::In,
        Tok::NotIn => BinOp::NotIn,
        Tok::Subset => BinOp::Subset,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        _ => return Ok((a, ta)),
    };
    let op_span = c.bump().span;
    let (b, tb) = setop(c, s)?;
    let mismatch = |what: &str| {
        type_error(
            format!(
                "{what}: {} and {}",
                describe(s.sys, &ta),
                describe(s.sys, &tb)
            ),
            op_span,
        )
    };
    match op {
        BinOp::Eq | BinOp::Ne => {
            if !ta.compatible(&tb) {
                return Err(mismatch("cannot compare"));
            }
        }
        BinOp::In | BinOp::NotIn => {
            let elem = want_set(s, &b, &tb)?;
            if !ta.compatible(&elem) {
                return Err(mismatch("membership between incompatible types"));
            }
        }
        BinOp::Subset => {
            want_set(s, &a, &ta)?;
            want_set(s, &b, &tb)?;
            if !ta.compatible(&tb) {
                return Err(mismatch("subset between incompatible types"));
            }
        }
        _ => {
            want_int(s, &a, &ta)?;
            want_int(s, &b, &tb)?;
        }
    }
    let span = join(a.span, b.span);
    Ok((Expr::with_span(ExprKind::Binary(op, Box::new(a), Box::new(b)), span), Type::Bool))
}

fn setop(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let (mut a, mut ta) = arith(c, s)?;
    loop {
        let op = match c.peek() {
            Tok::Union => BinOp::Union,
            Tok::Inter => BinOp::Inter,
            Tok::Diff => BinOp::Diff,
            _ => return Ok((a, ta)),
        };
        let op_span = c.bump().span;
        let (b, tb) = arith(c, s)?;
        want_set(s, &a, &ta)?;
        want_set(s, &b, &tb)?;
        let ty = ta.unify(&tb).ok_or_else(|| {
            type_error(
                format!("incompatible sets {} and {}", describe(s.sys, &ta), describe(s.sys, &tb)),
                op_span,
            )
        })?;
        let span = join(a.span, b.span);
        a = Expr::with_span(ExprKind::Binary(op, Box::new(a), Box::new(b)), span);
        ta = ty;
    }
}

fn arith(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let (mut a, mut ta) = postfix(c, s)?;
    loop {
        let op = match c.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return Ok((a, ta)),
        };
        c.bump();
        let (b, tb) = postfix(c, s)?;
        want_int(s, &a, &ta)?;
        want_int(s, &b, &tb)?;
        let span = join(a.span, b.span);
        a = Expr::with_span(ExprKind::Binary(op, Box::new(a), Box::new(b)), span);
        ta = Type::Int(None);
    }
}

fn postfix(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let (mut e, mut t) = primary(c, s)?;
    loop {
        if *c.peek() == Tok::LBracket {
            c.bump();
            let (x, tx) = expr(c, s)?;
            let end = c.expect(&Tok::RBracket, "`]`")?;
            let Type::Fn(dom, img) = &t else {
                return Err(type_error(
                    format!("cannot apply a value of type {}", describe(s.sys, &t)),
                    e.span,
                ));
            };
            if !tx.compatible(&Type::Sort(*dom)) {
                return Err(type_error(
                    format!(
                        "argument has type {}, expected {}",
                        describe(s.sys, &tx),
                        s.sys.sorts[*dom as usize].name
                    ),
                    x.span,
                ));
            }
            let img = (**img).clone();
            let span = join(e.span, end);
            e = Expr::with_span(ExprKind::Apply(Box::new(e), Box::new(x)), span);
            t = img;
        } else if c.is_kw("with") {
            c.bump();
            c.expect(&Tok::LBracket, "`[`")?;
            let (i, ti) = expr(c, s)?;
            c.expect(&Tok::RBracket, "`]`")?;
            c.expect(&Tok::Assign, "`:=`")?;
            let (v, tv) = setop(c, s)?;
            let Type::Fn(dom, img) = &t else {
                return Err(type_error(
                    format!("cannot update a value of type {}", describe(s.sys, &t)),
                    e.span,
                ));
            };
            if !ti.compatible(&Type::Sort(*dom)) {
                return Err(type_error("update index outside the function domain", i.span));
            }
            if !tv.compatible(img) {
                return Err(type_error(
                    format!("update value has type {}, expected {}", describe(s.sys, &tv), describe(s.sys, img)),
                    v.span,
                ));
            }
            let span = join(e.span, v.span);
            e = Expr::with_span(
                ExprKind::Except { func: Box::new(e), index: Box::new(i), value: Box::new(v) },
                span,
            );
        } else {
            return Ok((e, t));
        }
    }
}

fn primary(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let start = c.span();
    match c.peek().clone() {
        Tok::Int(i) => {
            c.bump();
            Ok((Expr::with_span(ExprKind::Lit(Value::Int(i)), start), Type::Int(None)))
        }
        Tok::Minus => {
            let i = c.int()?;
            let span = join(start, c.prev_span());
            Ok((Expr::with_span(ExprKind::Lit(Value::Int(i)), span), Type::Int(None)))
        }
        Tok::Forall | Tok::Exists => quant(c, s),
        Tok::Ident(k) if k == "if" => ite(c, s),
        Tok::Ident(name) => {
            c.bump();
            if *c.peek() == Tok::Prime {
                return Err(Diagnostic::new(
                    "primed variables may only appear on the left of an update",
                    c.span(),
                ));
            }
            let (kind, ty) = s.resolve(&name, start)?;
            Ok((Expr::with_span(kind, start), ty))
        }
        Tok::LParen => {
            c.bump();
            let (mut e, t) = expr(c, s)?;
            let end = c.expect(&Tok::RParen, "`)`")?;
            e.span = join(start, end);
            Ok((e, t))
        }
        Tok::LAngle => {
            c.bump();
            let mut es = Vec::new();
            let mut ts = Vec::new();
            loop {
                let (e, t) = expr(c, s)?;
                es.push(e);
                ts.push(t);
                if !c.eat(&Tok::Comma) {
                    break;
                }
            }
            let end = c.expect(&Tok::RAngle, "`>>`")?;
            Ok((Expr::with_span(ExprKind::Tuple(es), join(start, end)), Type::Tuple(ts)))
        }
        Tok::LBrace => set_literal(c, s),
        Tok::LBracket => {
            c.bump();
            let (name, _) = c.ident("a bound name")?;
            c.expect(&Tok::In, "`in`")?;
            let state = std::mem::replace(&mut s.state, false);
            let dom = setop(c, s);
            s.state = state;
            let (dom, _) = dom?;
            let ExprKind::SortSet(sort) = dom.kind else {
                return Err(type_error("function literals must range over a whole sort", dom.span));
            };
            c.expect(&Tok::MapsTo, "`|->`")?;
            let slot = s.params.len();
            s.params.push((name.clone(), Type::Sort(sort)));
            let body = expr(c, s);
            s.params.truncate(slot);
            let (body, tb) = body?;
            let end = c.expect(&Tok::RBracket, "`]`")?;
            Ok((
                Expr::with_span(
                    ExprKind::FnLit {
                        binder: Binder { name, slot, domain: Box::new(dom) },
                        body: Box::new(body),
                    },
                    join(start, end),
                ),
                Type::Fn(sort, Box::new(tb)),
            ))
        }
        _ => Err(c.error("an expression")),
    }
}

fn set_literal(c: &mut Cursor, s: &mut Scope) -> PResult<Typed> {
    let start = c.expect(&Tok::LBrace, "`{`")?;
    if *c.peek() == Tok::RBrace {
        let end = c.bump().span;
        return Ok((
            Expr::with_span(ExprKind::SetEnum(Vec::new()), join(start, end)),
            Type::set_of(Type::Any),
        ));
    }
    if matches!(c.peek(), Tok::Ident(_)) && *c.peek_at(1) == Tok::In {
        let save = c.pos;
        let (name, _) = c.ident("a bound name")?;
        c.bump();
        let state = std::mem::replace(&mut s.state, false);
        let dom = setop(c, s);
        s.state = state;
        if let (Ok((dom, dty)), Tok::Colon) = (&dom, c.peek()) {
            c.bump();
            let elem = want_set(s, dom, dty)?;
            let slot = s.params.len();
            s.params.push((name.clone(), elem));
            let cond = bool_expr(c, s);
            s.params.truncate(slot);
            let cond = cond?;
            let end = c.expect(&Tok::RBrace, "`}`")?;
            return Ok((
                Expr::with_span(
                    ExprKind::SetFilter {
                        binder: Binder { name, slot, domain: Box::new(dom.clone()) },
                        cond: Box::new(cond),
                    },
                    join(start, end),
                ),
                dty.clone(),
            ));
        }
        c.pos = save;
    }
    let mut es = Vec::new();
    let mut ty = Type::Any;
    loop {
        let (e, t) = expr(c, s)?;
        ty = ty.unify(&t).ok_or_else(|| {
            type_error(format!("set element has type {}", describe(s.sys, &t)), e.span)
        })?;
        es.push(e);
        if !c.eat(&Tok::Comma) {
            break;
        }
    }
    let end = c.expect(&Tok::RBrace, "`}`")?;
    Ok((Expr::with_span(ExprKind::SetEnum(es), join(start, end)), Type::set_of(ty)))
}
