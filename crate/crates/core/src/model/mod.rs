//! Values, states, expressions and the evaluator for finite instances of
//! guarded-action transition systems.

mod domain;
mod eval;
mod expr;
mod system;
mod types;
mod value;

use std::fmt::Write as _;

pub use domain::{Domain, Saturating};
pub use eval::{Ctx, EvalError};
pub use expr::{BinOp, Binder, Expr, ExprKind, Quantifier, Span};
pub use system::{
    Action, ConstDecl, InitClause, InitKind, Lemma, Param, QuantBinding, TransitionSystem, VarDecl,
};
pub use types::{IntRange, Sort, Type};
pub use value::{DecodeError, SortId, State, Value};

/// Concrete bindings for the symbolic parameters of a system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    /// Element names, one list per sort of the system.
    pub sort_elements: Vec<Vec<String>>,
    /// Values of the declared constants, in declaration order.
    pub consts: Vec<Value>,
    /// Bounds of the named integer ranges, inclusive.
    pub ranges: Vec<(i64, i64)>,
}

/// A transition system together with one of its finite instances. This is
/// the unit every analysis works on.
#[derive(Debug)]
pub struct Model {
    pub sys: TransitionSystem,
    pub inst: Instance,
    sort_sets: Vec<Value>,
    /// Parameter bindings of every action, in lexicographic order.
    bindings: Vec<Vec<Vec<Value>>>,
    var_domains: Vec<Domain>,
    checks_range: Vec<bool>,
}

/// One enabled transition out of a state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub action: usize,
    pub binding: Vec<Value>,
    pub next: State,
}

impl Model {
    pub fn new(sys: TransitionSystem, inst: Instance) -> Result<Model, EvalError> {
        let sort_sets = inst
            .sort_elements
            .iter()
            .enumerate()
            .map(|(s, els)| {
                Value::Set((0..els.len()).map(|e| Value::Atom(s as SortId, e as u16)).collect())
            })
            .collect();
        let mut model = Model {
            var_domains: Vec::new(),
            checks_range: sys.vars.iter().map(|v| v.ty.contains_int()).collect(),
            sys,
            inst,
            sort_sets,
            bindings: Vec::new(),
        };
        model.var_domains = model
            .sys
            .vars
            .iter()
            .map(|v| Domain::new(&model, &v.ty))
            .collect();
        let blank = model.default_state();
        let mut bindings = Vec::with_capacity(model.sys.actions.len());
        for a in &model.sys.actions {
            let mut doms = Vec::with_capacity(a.params.len());
            for p in &a.params {
                let d = model.eval(&p.domain, &Ctx::new(&blank), &mut Vec::new())?;
                match d.as_set() {
                    Some(xs) => doms.push(xs.to_vec()),
                    None => return Err(EvalError::new("parameter domain is not a set", p.domain.span)),
                }
            }
            bindings.push(cartesian(&doms));
        }
        model.bindings = bindings;
        Ok(model)
    }

    pub fn sort_set(&self, s: SortId) -> &Value {
        &self.sort_sets[s as usize]
    }

    pub fn sort_size(&self, s: SortId) -> usize {
        self.inst.sort_elements[s as usize].len()
    }

    pub fn bindings(&self, action: usize) -> &[Vec<Value>] {
        &self.bindings[action]
    }

    pub fn var_domain(&self, var: usize) -> &Domain {
        &self.var_domains[var]
    }

    pub fn range_bounds(&self, r: &IntRange) -> (i64, i64) {
        match r {
            IntRange::Named(i) => self.inst.ranges[*i],
            IntRange::Literal(lo, hi) => (*lo, *hi),
        }
    }

    /// The state assigning every variable the least value of its type.
    pub fn default_state(&self) -> State {
        State(self.var_domains.iter().map(|d| d.value_at(0)).collect())
    }

    /// Number of type-correct states, saturating.
    pub fn type_state_space_size(&self) -> Saturating {
        self.subspace_size((0..self.sys.vars.len()).collect::<Vec<_>>().as_slice())
    }

    pub fn subspace_size(&self, vars: &[usize]) -> Saturating {
        vars.iter()
            .fold(Saturating::ONE, |acc, &v| acc.mul(self.var_domains[v].size()))
    }

    /// State number `index` of the subspace over `vars`, in mixed radix with
    /// the last variable varying fastest. Other variables keep their default.
    pub fn subspace_state(&self, vars: &[usize], mut index: u128) -> State {
        let mut s = self.default_state();
        for &v in vars.iter().rev() {
            let d = &self.var_domains[v];
            let n = d.size().0.max(1);
            s.0[v] = d.value_at(index % n);
            index /= n;
        }
        s
    }

    /// Whether `v` conforms to type `ty` under this instance.
    pub fn conforms(&self, v: &Value, ty: &Type) -> bool {
        match (v, ty) {
            (Value::Bool(_), Type::Bool) => true,
            (Value::Int(i), Type::Int(r)) => match r {
                None => true,
                Some(r) => {
                    let (lo, hi) = self.range_bounds(r);
                    (lo..=hi).contains(i)
                }
            },
            (Value::Atom(s, e), Type::Sort(t)) => s == t && (*e as usize) < self.sort_size(*t),
            (Value::Set(xs), Type::Set(t)) => xs.iter().all(|x| self.conforms(x, t)),
            (Value::Tuple(xs), Type::Tuple(ts)) => {
                xs.len() == ts.len() && xs.iter().zip(ts).all(|(x, t)| self.conforms(x, t))
            }
            (Value::Func(xs), Type::Fn(s, t)) => {
                xs.len() == self.sort_size(*s) && xs.iter().all(|x| self.conforms(x, t))
            }
            (_, Type::Any) => true,
            _ => false,
        }
    }

    pub fn state_conforms(&self, s: &State) -> bool {
        s.len() == self.sys.vars.len()
            && s.0.iter().zip(&self.sys.vars).all(|(v, d)| self.conforms(v, &d.ty))
    }

    /// Evaluates a lemma on a state.
    pub fn holds(&self, lemma: &Lemma, state: &State) -> Result<bool, EvalError> {
        let mut env = Vec::with_capacity(lemma.prefix.len() + 2);
        self.holds_from(lemma, 0, &Ctx::new(state), &mut env)
    }

    fn holds_from(
        &self,
        lemma: &Lemma,
        level: usize,
        ctx: &Ctx,
        env: &mut Vec<Value>,
    ) -> Result<bool, EvalError> {
        let Some(b) = lemma.prefix.get(level) else {
            return self.eval_bool(&lemma.body, ctx, env);
        };
        let dom = self.eval(&b.domain, ctx, env)?;
        let xs = dom
            .as_set()
            .ok_or_else(|| EvalError::new("quantifier domain is not a set", b.domain.span))?;
        let forall = b.q == Quantifier::Forall;
        for x in xs {
            env.truncate(level);
            env.push(x.clone());
            if self.holds_from(lemma, level + 1, ctx, env)? != forall {
                return Ok(!forall);
            }
        }
        Ok(forall)
    }

    /// The successor of `state` under `action` with the given parameter
    /// binding, or `None` when the guard is false.
    pub fn apply_action(
        &self,
        state: &State,
        action: usize,
        binding: &[Value],
    ) -> Result<Option<State>, EvalError> {
        let a = &self.sys.actions[action];
        let mut env = binding.to_vec();
        let ctx = Ctx::new(state);
        if !self.eval_bool(&a.pre, &ctx, &mut env)? {
            return Ok(None);
        }
        let mut next = Vec::with_capacity(state.len());
        for (i, up) in a.updates.iter().enumerate() {
            let v = match up {
                None => state.0[i].clone(),
                Some(e) => {
                    env.truncate(binding.len());
                    let v = self.eval(e, &ctx, &mut env)?.into_owned();
                    if self.checks_range[i] && !self.conforms(&v, &self.sys.vars[i].ty) {
                        return Err(EvalError::new(
                            format!("update of `{}` leaves its declared range", self.sys.vars[i].name),
                            e.span,
                        ));
                    }
                    v
                }
            };
            next.push(v);
        }
        Ok(Some(State(next)))
    }

    /// All enabled transitions, ordered by action then binding.
    pub fn successors(&self, state: &State) -> Result<Vec<Transition>, EvalError> {
        let mut out = Vec::new();
        for action in 0..self.sys.actions.len() {
            for b in &self.bindings[action] {
                if let Some(next) = self.apply_action(state, action, b)? {
                    out.push(Transition { action, binding: b.clone(), next });
                }
            }
        }
        Ok(out)
    }

    /// The initial states: the cross product of the per-variable initializers.
    pub fn initial_states(&self) -> Result<Vec<State>, EvalError> {
        let blank = self.default_state();
        let ctx = Ctx::new(&blank);
        let mut choices = Vec::with_capacity(self.sys.vars.len());
        for (i, c) in self.sys.init.iter().enumerate() {
            let v = self.eval(&c.expr, &ctx, &mut Vec::new())?.into_owned();
            let opts = match c.kind {
                InitKind::Eq => vec![v],
                InitKind::In => match v {
                    Value::Set(xs) => xs,
                    _ => return Err(EvalError::new("initializer domain is not a set", c.expr.span)),
                },
            };
            for o in &opts {
                if !self.conforms(o, &self.sys.vars[i].ty) {
                    return Err(EvalError::new(
                        format!("initial value of `{}` is outside its type", self.sys.vars[i].name),
                        c.expr.span,
                    ));
                }
            }
            choices.push(opts);
        }
        Ok(cartesian(&choices).into_iter().map(State).collect())
    }

    pub fn fmt_value(&self, v: &Value) -> String {
        let mut s = String::new();
        self.write_value(&mut s, v);
        s
    }

    fn write_value(&self, out: &mut String, v: &Value) {
        let seq = |out: &mut String, open: &str, xs: &[Value], close: &str| {
            out.push_str(open);
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.write_value(out, x);
            }
            out.push_str(close);
        };
        match v {
            Value::Atom(s, e) => match self
                .inst
                .sort_elements
                .get(*s as usize)
                .and_then(|els| els.get(*e as usize))
            {
                Some(name) => out.push_str(name),
                None => {
                    let _ = write!(out, "{v}");
                }
            },
            Value::Tuple(xs) => seq(out, "<<", xs, ">>"),
            Value::Set(xs) => seq(out, "{", xs, "}"),
            Value::Func(xs) => seq(out, "[", xs, "]"),
            _ => {
                let _ = write!(out, "{v}");
            }
        }
    }

    /// Renders a state as `name = value` lines in declaration order.
    pub fn fmt_state(&self, s: &State) -> String {
        let mut out = String::new();
        for (d, v) in self.sys.vars.iter().zip(&s.0) {
            let _ = writeln!(out, "  {} = {}", d.name, self.fmt_value(v));
        }
        out
    }

    pub fn fmt_binding(&self, action: usize, binding: &[Value]) -> String {
        let a = &self.sys.actions[action];
        let args: Vec<String> = binding.iter().map(|v| self.fmt_value(v)).collect();
        format!("{}({})", a.name, args.join(", "))
    }
}

/// Lexicographic cross product.
pub(crate) fn cartesian(doms: &[Vec<Value>]) -> Vec<Vec<Value>> {
    let mut out = vec![Vec::with_capacity(doms.len())];
    for d in doms {
        let mut next = Vec::with_capacity(out.len() * d.len());
        for prefix in &out {
            for x in d {
                let mut p = prefix.clone();
                p.push(x.clone());
                next.push(p);
            }
        }
        out = next;
    }
    out
}
