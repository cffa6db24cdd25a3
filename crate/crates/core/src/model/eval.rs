use std::borrow::Cow;

use super::expr::{BinOp, Binder, Expr, ExprKind, Quantifier, Span};
use super::value::{State, Value};
use super::Model;

/// A type error found at evaluation time, located at the offending expression.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {message}", line = span.line, column = span.column)]
pub struct EvalError {
    pub message: String,
    pub span: Span,
}

impl EvalError {
    pub fn new(message: impl Into<String>, span: Span) -> EvalError {
        EvalError { message: message.into(), span }
    }
}

/// The states an expression is evaluated against.
#[derive(Clone, Copy, Debug)]
pub struct Ctx<'a> {
    pub state: &'a State,
    pub primed: Option<&'a State>,
}

impl<'a> Ctx<'a> {
    pub fn new(state: &'a State) -> Ctx<'a> {
        Ctx { state, primed: None }
    }

    pub fn with_primed(state: &'a State, primed: &'a State) -> Ctx<'a> {
        Ctx { state, primed: Some(primed) }
    }
}

type Res<'a> = Result<Cow<'a, Value>, EvalError>;

fn mismatch(what: &str, e: &Expr) -> EvalError {
    EvalError::new(format!("type mismatch: expected {what}"), e.span)
}

impl Model {
    /// Evaluates `e`. Parameter slot `i` is bound to `env[i]`; `env` is used
    /// as scratch space for inner binders and may grow.
    pub fn eval<'a>(&'a self, e: &'a Expr, ctx: &Ctx<'a>, env: &mut Vec<Value>) -> Res<'a> {
        use ExprKind::*;
        Ok(match &e.kind {
            Lit(v) => Cow::Borrowed(v),
            Var(i) => Cow::Borrowed(ctx.state.get(*i)),
            Primed(i) => match ctx.primed {
                Some(p) => Cow::Borrowed(p.get(*i)),
                None => return Err(EvalError::new("primed variable outside a transition", e.span)),
            },
            Param { slot, name } => match env.get(*slot) {
                Some(v) => Cow::Owned(v.clone()),
                None => return Err(EvalError::new(format!("unbound parameter `{name}`"), e.span)),
            },
            Const(i) => Cow::Borrowed(&self.inst.consts[*i]),
            SortSet(s) => Cow::Borrowed(self.sort_set(*s)),
            Not(_) | And(_) | Or(_) | Quant { .. } => Cow::Owned(Value::Bool(self.eval_bool(e, ctx, env)?)),
            Binary(op, a, b) => return self.eval_binary(e, *op, a, b, ctx, env),
            SetEnum(es) => {
                let mut xs = Vec::with_capacity(es.len());
                for x in es {
                    xs.push(self.eval(x, ctx, env)?.into_owned());
                }
                Cow::Owned(Value::set_from(xs))
            }
            SetFilter { binder, cond } => {
                let dom = self.eval(&binder.domain, ctx, env)?;
                let xs = dom.as_set().ok_or_else(|| mismatch("a set", &binder.domain))?;
                let mut out = Vec::new();
                for x in xs {
                    bind(env, binder, x.clone());
                    if self.eval_bool(cond, ctx, env)? {
                        out.push(x.clone());
                    }
                }
                Cow::Owned(Value::Set(out))
            }
            Tuple(es) => {
                let mut xs = Vec::with_capacity(es.len());
                for x in es {
                    xs.push(self.eval(x, ctx, env)?.into_owned());
                }
                Cow::Owned(Value::Tuple(xs))
            }
            Apply(f, x) => {
                let fv = self.eval(f, ctx, env)?;
                let xv = self.eval(x, ctx, env)?;
                let idx = match xv.as_ref() {
                    Value::Atom(_, i) => *i as usize,
                    _ => return Err(mismatch("a sort element as function argument", x)),
                };
                match fv {
                    Cow::Borrowed(Value::Func(ys)) => match ys.get(idx) {
                        Some(y) => Cow::Borrowed(y),
                        None => return Err(mismatch("an argument inside the function domain", x)),
                    },
                    Cow::Owned(Value::Func(mut ys)) if idx < ys.len() => Cow::Owned(ys.swap_remove(idx)),
                    _ => return Err(mismatch("a function", f)),
                }
            }
            FnLit { binder, body } => {
                let dom = self.eval(&binder.domain, ctx, env)?;
                let xs = dom.as_set().ok_or_else(|| mismatch("a set", &binder.domain))?;
                let mut out = Vec::with_capacity(xs.len());
                for x in xs {
                    bind(env, binder, x.clone());
                    out.push(self.eval(body, ctx, env)?.into_owned());
                }
                Cow::Owned(Value::Func(out))
            }
            Except { func, index, value } => {
                let mut f = self.eval(func, ctx, env)?.into_owned();
                let idx = match self.eval(index, ctx, env)?.as_ref() {
                    Value::Atom(_, i) => *i as usize,
                    _ => return Err(mismatch("a sort element as function argument", index)),
                };
                let v = self.eval(value, ctx, env)?.into_owned();
                match &mut f {
                    Value::Func(ys) if idx < ys.len() => ys[idx] = v,
                    _ => return Err(mismatch("a function", func)),
                }
                Cow::Owned(f)
            }
            Ite(c, t, f) => {
                if self.eval_bool(c, ctx, env)? {
                    self.eval(t, ctx, env)?
                } else {
                    self.eval(f, ctx, env)?
                }
            }
        })
    }

    /// Evaluates a boolean expression without materializing boolean values.
    pub fn eval_bool<'a>(
        &'a self,
        e: &'a Expr,
        ctx: &Ctx<'a>,
        env: &mut Vec<Value>,
    ) -> Result<bool, EvalError> {
        use ExprKind::*;
        match &e.kind {
            Not(x) => Ok(!self.eval_bool(x, ctx, env)?),
            And(xs) => {
                for x in xs {
                    if !self.eval_bool(x, ctx, env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Or(xs) => {
                for x in xs {
                    if self.eval_bool(x, ctx, env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Binary(BinOp::Implies, a, b) => {
                Ok(!self.eval_bool(a, ctx, env)? || self.eval_bool(b, ctx, env)?)
            }
            Quant { q, binder, body } => {
                let dom = self.eval(&binder.domain, ctx, env)?;
                let xs = dom.as_set().ok_or_else(|| mismatch("a set", &binder.domain))?;
                let forall = *q == Quantifier::Forall;
                for x in xs {
                    bind(env, binder, x.clone());
                    if self.eval_bool(body, ctx, env)? != forall {
                        return Ok(!forall);
                    }
                }
                Ok(forall)
            }
            _ => self.eval(e, ctx, env)?.as_bool().ok_or_else(|| mismatch("a boolean", e)),
        }
    }

    fn eval_binary<'a>(
        &'a self,
        e: &'a Expr,
        op: BinOp,
        a: &'a Expr,
        b: &'a Expr,
        ctx: &Ctx<'a>,
        env: &mut Vec<Value>,
    ) -> Res<'a> {
        use BinOp::*;
        if op == Implies {
            return Ok(Cow::Owned(Value::Bool(self.eval_bool(e, ctx, env)?)));
        }
        let x = self.eval(a, ctx, env)?;
        let y = self.eval(b, ctx, env)?;
        let set = |v: &'_ Cow<'a, Value>, at: &Expr| -> Result<Vec<Value>, EvalError> {
            v.as_set().map(|s| s.to_vec()).ok_or_else(|| mismatch("a set", at))
        };
        let int = |v: &Value, at: &Expr| v.as_int().ok_or_else(|| mismatch("an integer", at));
        let v = match op {
            Eq => Value::Bool(x == y),
            Ne => Value::Bool(x != y),
            In | NotIn => {
                let m = y.set_contains(&x).ok_or_else(|| mismatch("a set", b))?;
                Value::Bool(m == (op == In))
            }
            Subset => {
                let xs = x.as_set().ok_or_else(|| mismatch("a set", a))?;
                let ys = y.as_set().ok_or_else(|| mismatch("a set", b))?;
                Value::Bool(is_subset(xs, ys))
            }
            Union => {
                let mut xs = set(&x, a)?;
                xs.extend(set(&y, b)?);
                Value::set_from(xs)
            }
            Inter => {
                let ys = y.as_set().ok_or_else(|| mismatch("a set", b))?;
                let xs = set(&x, a)?;
                Value::Set(xs.into_iter().filter(|v| ys.binary_search(v).is_ok()).collect())
            }
            Diff => {
                let ys = y.as_set().ok_or_else(|| mismatch("a set", b))?;
                let xs = set(&x, a)?;
                Value::Set(xs.into_iter().filter(|v| ys.binary_search(v).is_err()).collect())
            }
            Lt => Value::Bool(int(&x, a)? < int(&y, b)?),
            Le => Value::Bool(int(&x, a)? <= int(&y, b)?),
            Gt => Value::Bool(int(&x, a)? > int(&y, b)?),
            Ge => Value::Bool(int(&x, a)? >= int(&y, b)?),
            Add => Value::Int(
                int(&x, a)?
                    .checked_add(int(&y, b)?)
                    .ok_or_else(|| EvalError::new("integer overflow", e.span))?,
            ),
            Sub => Value::Int(
                int(&x, a)?
                    .checked_sub(int(&y, b)?)
                    .ok_or_else(|| EvalError::new("integer overflow", e.span))?,
            ),
            Implies => unreachable!(),
        };
        Ok(Cow::Owned(v))
    }
}

fn bind(env: &mut Vec<Value>, binder: &Binder, v: Value) {
    if env.len() <= binder.slot {
        env.resize(binder.slot + 1, Value::FALSE);
    }
    env[binder.slot] = v;
}

/// Subset test on sorted slices.
fn is_subset(xs: &[Value], ys: &[Value]) -> bool {
    let mut j = 0;
    for x in xs {
        while j < ys.len() && ys[j] < *x {
            j += 1;
        }
        if j == ys.len() || ys[j] != *x {
            return false;
        }
        j += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_on_sorted_slices() {
        let v = |xs: &[i64]| xs.iter().map(|&i| Value::Int(i)).collect::<Vec<_>>();
        assert!(is_subset(&v(&[]), &v(&[1])));
        assert!(is_subset(&v(&[1, 3]), &v(&[1, 2, 3])));
        assert!(!is_subset(&v(&[1, 4]), &v(&[1, 2, 3])));
        assert!(!is_subset(&v(&[0]), &v(&[])));
    }
}
