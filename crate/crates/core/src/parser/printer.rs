//! Pretty printing in the concrete (ASCII) syntax. Printed text parses back
//! to a structurally identical tree.

use std::fmt::Write as _;

use crate::model::{
    BinOp, Expr, ExprKind, InitKind, Instance, IntRange, Lemma, Quantifier, TransitionSystem,
    Type, Value,
};

// Binding strength of each printed form; operands that bind more loosely
// than their context are parenthesized.
const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const CMP: u8 = 5;
const SETOP: u8 = 6;
const ARITH: u8 = 7;
const ATOM: u8 = 8;

pub fn print_expr(sys: &TransitionSystem, e: &Expr) -> String {
    let mut out = String::new();
    Printer { sys }.expr(&mut out, e, QUANT);
    out
}

pub fn print_lemma(sys: &TransitionSystem, l: &Lemma) -> String {
    print_expr(sys, &l.to_expr())
}

pub fn print_type(sys: &TransitionSystem, t: &Type) -> String {
    match t {
        Type::Bool => "bool".into(),
        Type::Int(None) => "int".into(),
        Type::Int(Some(IntRange::Named(i))) => format!("int {}", sys.ranges[*i]),
        Type::Int(Some(IntRange::Literal(lo, hi))) => format!("int {lo}..{hi}"),
        Type::Sort(s) => sys.sorts[*s as usize].name.clone(),
        Type::Set(t) => format!("set of {}", print_type(sys, t)),
        Type::Tuple(ts) => format!(
            "tuple({})",
            ts.iter().map(|t| print_type(sys, t)).collect::<Vec<_>>().join(", ")
        ),
        Type::Fn(s, t) => format!("fn {} -> {}", sys.sorts[*s as usize].name, print_type(sys, t)),
        Type::Any => "any".into(),
    }
}

/// Canonical text of a whole specification.
pub fn print_system(sys: &TransitionSystem) -> String {
    let mut out = String::new();
    let p = Printer { sys };
    let _ = writeln!(out, "protocol {}\n", sys.name);
    for s in &sys.sorts {
        match &s.fixed_elements {
            Some(els) => {
                let _ = writeln!(out, "sort {} = {{{}}};", s.name, els.join(", "));
            }
            None => {
                let _ = writeln!(out, "sort {};", s.name);
            }
        }
    }
    for c in &sys.consts {
        let _ = writeln!(out, "const {} : {};", c.name, print_type(sys, &c.ty));
    }
    for v in &sys.vars {
        let _ = writeln!(out, "var {} : {};", v.name, print_type(sys, &v.ty));
    }
    out.push_str("\ninit {\n");
    for (v, c) in sys.vars.iter().zip(&sys.init) {
        let op = match c.kind {
            InitKind::Eq => "=",
            InitKind::In => "in",
        };
        let _ = write!(out, "  {} {op} ", v.name);
        p.expr(&mut out, &c.expr, QUANT);
        out.push_str(";\n");
    }
    out.push_str("}\n");
    for a in &sys.actions {
        let params: Vec<String> = a
            .params
            .iter()
            .map(|x| format!("{} in {}", x.name, print_expr(sys, &x.domain)))
            .collect();
        let _ = writeln!(out, "\naction {}({}) {{", a.name, params.join(", "));
        out.push_str("  require ");
        p.expr(&mut out, &a.pre, QUANT);
        out.push_str(";\n");
        let mut unchanged = Vec::new();
        for (v, u) in sys.vars.iter().zip(&a.updates) {
            match u {
                Some(e) => {
                    let _ = write!(out, "  {}' = ", v.name);
                    p.expr(&mut out, e, QUANT);
                    out.push_str(";\n");
                }
                None => unchanged.push(v.name.as_str()),
            }
        }
        if !unchanged.is_empty() {
            let _ = writeln!(out, "  unchanged {};", unchanged.join(", "));
        }
        out.push_str("}\n");
    }
    for l in &sys.lemmas {
        let _ = writeln!(out, "\nlemma {} = {};", l.name, print_lemma(sys, l));
    }
    out
}

/// Canonical text of an instance.
pub fn print_instance(sys: &TransitionSystem, inst: &Instance) -> String {
    let mut out = String::new();
    let p = InstPrinter { inst };
    for (s, els) in sys.sorts.iter().zip(&inst.sort_elements) {
        let _ = writeln!(out, "sort {} = {{{}}};", s.name, els.join(", "));
    }
    for (c, v) in sys.consts.iter().zip(&inst.consts) {
        let _ = write!(out, "const {} = ", c.name);
        p.value(&mut out, v);
        out.push_str(";\n");
    }
    for (name, (lo, hi)) in sys.ranges.iter().zip(&inst.ranges) {
        let _ = writeln!(out, "intrange {name} {lo} {hi};");
    }
    out
}

struct InstPrinter<'a> {
    inst: &'a Instance,
}

impl InstPrinter<'_> {
    fn value(&self, out: &mut String, v: &Value) {
        let seq = |out: &mut String, open: &str, xs: &[Value], close: &str| {
            out.push_str(open);
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                self.value(out, x);
            }
            out.push_str(close);
        };
        match v {
            Value::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Value::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Value::Atom(s, e) => out.push_str(&self.inst.sort_elements[*s as usize][*e as usize]),
            Value::Tuple(xs) => seq(out, "<<", xs, ">>"),
            Value::Set(xs) => seq(out, "{", xs, "}"),
            Value::Func(xs) => seq(out, "[", xs, "]"),
        }
    }
}

struct Printer<'a> {
    sys: &'a TransitionSystem,
}

fn binop(op: BinOp) -> (&'static str, u8) {
    match op {
        BinOp::Implies => ("=>", IMPLIES),
        BinOp::Eq => ("=", CMP),
        BinOp::Ne => ("/=", CMP),
        BinOp::In => ("in", CMP),
        BinOp::NotIn => ("notin", CMP),
        BinOp::Subset => ("subseteq", CMP),
        BinOp::Lt => ("<", CMP),
        BinOp::Le => ("<=", CMP),
        BinOp::Gt => (">", CMP),
        BinOp::Ge => (">=", CMP),
        BinOp::Union => ("cup", SETOP),
        BinOp::Inter => ("cap", SETOP),
        BinOp::Diff => ("setminus", SETOP),
        BinOp::Add => ("+", ARITH),
        BinOp::Sub => ("-", ARITH),
    }
}

fn level(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Quant { .. } | ExprKind::Ite(..) => QUANT,
        ExprKind::Binary(op, ..) => binop(*op).1,
        ExprKind::Or(_) => OR,
        ExprKind::And(_) => AND,
        ExprKind::Not(_) => NOT,
        // The updated value extends to the right, so an update used as an
        // operand always needs parentheses.
        ExprKind::Except { .. } => CMP,
        ExprKind::Lit(Value::Int(i)) if *i < 0 => ARITH,
        _ => ATOM,
    }
}

impl Printer<'_> {
    fn expr(&self, out: &mut String, e: &Expr, ctx: u8) {
        let paren = level(e) < ctx;
        if paren {
            out.push('(');
        }
        self.bare(out, e);
        if paren {
            out.push(')');
        }
    }

    fn list(&self, out: &mut String, es: &[Expr], sep: &str, ctx: u8) {
        for (i, x) in es.iter().enumerate() {
            if i > 0 {
                out.push_str(sep);
            }
            self.expr(out, x, ctx);
        }
    }

    fn bare(&self, out: &mut String, e: &Expr) {
        use ExprKind::*;
        match &e.kind {
            Lit(v) => self.lit(out, v),
            Var(i) => out.push_str(&self.sys.vars[*i].name),
            Primed(i) => {
                let _ = write!(out, "{}'", self.sys.vars[*i].name);
            }
            Param { name, .. } => out.push_str(name),
            Const(i) => out.push_str(&self.sys.consts[*i].name),
            SortSet(s) => out.push_str(&self.sys.sorts[*s as usize].name),
            Not(x) => {
                out.push('~');
                self.expr(out, x, NOT);
            }
            // Nested conjunctions and disjunctions keep their parentheses so
            // that re-parsing preserves the tree shape.
            And(xs) => self.list(out, xs, " /\\ ", AND + 1),
            Or(xs) => self.list(out, xs, " \\/ ", OR + 1),
            Binary(op, a, b) => {
                let (sym, lv) = binop(*op);
                let (l, r) = match op {
                    BinOp::Implies => (IMPLIES + 1, QUANT),
                    _ if lv == CMP => (CMP + 1, CMP + 1),
                    _ => (lv, lv + 1),
                };
                self.expr(out, a, l);
                let _ = write!(out, " {sym} ");
                self.expr(out, b, r);
            }
            SetEnum(xs) => {
                out.push('{');
                self.list(out, xs, ", ", QUANT);
                out.push('}');
            }
            SetFilter { binder, cond } => {
                let _ = write!(out, "{{{} in ", binder.name);
                self.expr(out, &binder.domain, SETOP);
                out.push_str(" : ");
                self.expr(out, cond, QUANT);
                out.push('}');
            }
            Tuple(xs) => {
                out.push_str("<<");
                self.list(out, xs, ", ", QUANT);
                out.push_str(">>");
            }
            Apply(f, x) => {
                self.expr(out, f, ATOM);
                out.push('[');
                self.expr(out, x, QUANT);
                out.push(']');
            }
            FnLit { binder, body } => {
                let _ = write!(out, "[{} in ", binder.name);
                self.expr(out, &binder.domain, SETOP);
                out.push_str(" |-> ");
                self.expr(out, body, QUANT);
                out.push(']');
            }
            Except { func, index, value } => {
                self.expr(out, func, ATOM);
                out.push_str(" with [");
                self.expr(out, index, QUANT);
                out.push_str("] := ");
                self.expr(out, value, SETOP);
            }
            Quant { q, binder, body } => {
                let kw = match q {
                    Quantifier::Forall => "forall",
                    Quantifier::Exists => "exists",
                };
                let _ = write!(out, "{kw} {} in ", binder.name);
                self.expr(out, &binder.domain, SETOP);
                out.push_str(" : ");
                self.expr(out, body, QUANT);
            }
            Ite(c, t, f) => {
                out.push_str("if ");
                self.expr(out, c, QUANT);
                out.push_str(" then ");
                self.expr(out, t, QUANT);
                out.push_str(" else ");
                self.expr(out, f, QUANT);
            }
        }
    }

    fn lit(&self, out: &mut String, v: &Value) {
        match v {
            Value::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Value::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Value::Atom(s, e) => {
                match self.sys.sorts[*s as usize]
                    .fixed_elements
                    .as_ref()
                    .and_then(|els| els.get(*e as usize))
                {
                    Some(name) => out.push_str(name),
                    None => {
                        let _ = write!(out, "{v}");
                    }
                }
            }
            other => {
                let _ = write!(out, "{other}");
            }
        }
    }
}
