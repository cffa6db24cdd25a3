//! Resolved, type-checked expression trees.

use std::collections::BTreeSet;

use super::value::{SortId, Value};

/// Location of an expression in its source text: 1-based line and column,
/// length in characters. `Span::default()` marks synthesized expressions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Implies,
    Eq,
    Ne,
    In,
    NotIn,
    Subset,
    Union,
    Inter,
    Diff,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
}

/// A bound name. `slot` is its index in the evaluation environment, which
/// always equals the number of binders enclosing it.
#[derive(Clone, Debug)]
pub struct Binder {
    pub name: String,
    pub slot: usize,
    pub domain: Box<Expr>,
}

impl PartialEq for Binder {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.slot == other.slot && self.domain == other.domain
    }
}

impl Eq for Binder {}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

/// Structural equality; spans are ignored.
impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Expr {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Lit(Value),
    Var(usize),
    Primed(usize),
    Param { slot: usize, name: String },
    Const(usize),
    /// All elements of a sort, as a set.
    SortSet(SortId),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    SetEnum(Vec<Expr>),
    SetFilter { binder: Binder, cond: Box<Expr> },
    Tuple(Vec<Expr>),
    Apply(Box<Expr>, Box<Expr>),
    FnLit { binder: Binder, body: Box<Expr> },
    /// `f with [index] := value`
    Except { func: Box<Expr>, index: Box<Expr>, value: Box<Expr> },
    Quant { q: Quantifier, binder: Binder, body: Box<Expr> },
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::default() }
    }

    pub fn with_span(kind: ExprKind, span: Span) -> Expr {
        Expr { kind, span }
    }

    pub fn lit(v: Value) -> Expr {
        Expr::new(ExprKind::Lit(v))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::new(ExprKind::Not(Box::new(e)))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(a), Box::new(b)))
    }

    /// Direct children, in evaluation order.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Lit(_) | Var(_) | Primed(_) | Param { .. } | Const(_) | SortSet(_) => vec![],
            Not(e) => vec![e],
            And(es) | Or(es) | SetEnum(es) | Tuple(es) => es.iter().collect(),
            Binary(_, a, b) | Apply(a, b) => vec![a, b],
            SetFilter { binder, cond } => vec![&binder.domain, cond],
            FnLit { binder, body } | Quant { binder, body, .. } => vec![&binder.domain, body],
            Except { func, index, value } => vec![func, index, value],
            Ite(c, t, e) => vec![c, t, e],
        }
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Unprimed state variables syntactically referenced.
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let ExprKind::Var(v) = e.kind {
                out.insert(v);
            }
        });
        out
    }

    pub fn has_primed(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e.kind, ExprKind::Primed(_)));
        found
    }

    /// Parameter slots referenced but not bound inside `self`.
    pub fn free_slots(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_free(usize::MAX, &mut out);
        out
    }

    fn collect_free(&self, bound_from: usize, out: &mut BTreeSet<usize>) {
        use ExprKind::*;
        match &self.kind {
            Param { slot, .. } => {
                if *slot < bound_from {
                    out.insert(*slot);
                }
            }
            SetFilter { binder, cond: body }
            | FnLit { binder, body }
            | Quant { binder, body, .. } => {
                binder.domain.collect_free(bound_from, out);
                body.collect_free(bound_from.min(binder.slot), out);
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound_from, out);
                }
            }
        }
    }

    /// Renumbers parameter slots: free references through `map` (indexed by
    /// old slot), binders introduced inside are shifted so that they stay
    /// contiguous after the new free-slot count `base`.
    pub fn remap_slots(&self, map: &[Option<usize>], base: usize) -> Expr {
        let offset_of = |slot: usize, outer: usize| slot - outer + base;
        self.remap_inner(map, map.len(), &offset_of)
    }

    fn remap_inner(
        &self,
        map: &[Option<usize>],
        outer: usize,
        shift: &dyn Fn(usize, usize) -> usize,
    ) -> Expr {
        use ExprKind::*;
        let re = |e: &Expr| Box::new(e.remap_inner(map, outer, shift));
        let rebind = |b: &Binder| Binder {
            name: b.name.clone(),
            slot: shift(b.slot, outer),
            domain: re(&b.domain),
        };
        let kind = match &self.kind {
            Param { slot, name } => Param {
                slot: if *slot < outer {
                    map[*slot].expect("remapped slot must be mapped")
                } else {
                    shift(*slot, outer)
                },
                name: name.clone(),
            },
            Lit(_) | Var(_) | Primed(_) | Const(_) | SortSet(_) => self.kind.clone(),
            Not(e) => Not(re(e)),
            And(es) => And(es.iter().map(|e| *re(e)).collect()),
            Or(es) => Or(es.iter().map(|e| *re(e)).collect()),
            SetEnum(es) => SetEnum(es.iter().map(|e| *re(e)).collect()),
            Tuple(es) => Tuple(es.iter().map(|e| *re(e)).collect()),
            Binary(op, a, b) => Binary(*op, re(a), re(b)),
            Apply(a, b) => Apply(re(a), re(b)),
            SetFilter { binder, cond } => SetFilter { binder: rebind(binder), cond: re(cond) },
            FnLit { binder, body } => FnLit { binder: rebind(binder), body: re(body) },
            Quant { q, binder, body } => Quant { q: *q, binder: rebind(binder), body: re(body) },
            Except { func, index, value } => Except {
                func: re(func),
                index: re(index),
                value: re(value),
            },
            Ite(c, t, e) => Ite(re(c), re(t), re(e)),
        };
        Expr { kind, span: self.span }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(slot: usize, name: &str) -> Expr {
        Expr::new(ExprKind::Param { slot, name: name.into() })
    }

    #[test]
    fn free_slots_skip_inner_binders() {
        // forall x (slot 2) in Sort0 : p0 = x
        let body = Expr::binary(BinOp::Eq, param(0, "p"), param(2, "x"));
        let q = Expr::new(ExprKind::Quant {
            q: Quantifier::Forall,
            binder: Binder {
                name: "x".into(),
                slot: 2,
                domain: Box::new(Expr::new(ExprKind::SortSet(0))),
            },
            body: Box::new(body),
        });
        assert_eq!(q.free_slots().into_iter().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn remap_compacts_slots() {
        let e = Expr::binary(BinOp::Eq, param(1, "j"), param(3, "v"));
        let r = e.remap_slots(&[None, Some(0), None, Some(1)], 2);
        let mut slots = vec![];
        r.walk(&mut |x| {
            if let ExprKind::Param { slot, .. } = x.kind {
                slots.push(slot)
            }
        });
        assert_eq!(slots, vec![0, 1]);
    }
}
