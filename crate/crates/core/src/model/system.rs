//! Symbolic transition systems: declarations, guarded actions and lemmas.

use std::collections::BTreeSet;

use super::expr::{Binder, Expr, ExprKind, Quantifier, Span};
use super::types::{Sort, Type};
use super::value::SortId;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
}

/// A named constant whose value comes from the instance file, e.g. `Quorum`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstDecl {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitKind {
    /// `x = e`
    Eq,
    /// `x in S`: one initial state per member of `S`.
    In,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InitClause {
    pub kind: InitKind,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    /// Set-valued, state-independent expression (a sort or a constant).
    pub domain: Expr,
    pub ty: Type,
}

/// A guarded action `Pre /\ x1' = f1 /\ ... /\ xn' = fn`.
#[derive(Clone, Debug)]
pub struct Action {
    pub name: String,
    pub params: Vec<Param>,
    pub pre: Expr,
    /// One entry per state variable; `None` is the identity update.
    pub updates: Vec<Option<Expr>>,
    pub span: Span,
}

/// Structural equality; the span is ignored.
impl PartialEq for Action {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.params == other.params
            && self.pre == other.pre
            && self.updates == other.updates
    }
}

impl Eq for Action {}

impl Action {
    /// Unprimed variables the update of `var` depends on. The identity
    /// update depends on the variable itself.
    pub fn update_deps(&self, var: usize) -> BTreeSet<usize> {
        match &self.updates[var] {
            None => BTreeSet::from([var]),
            Some(e) => e.vars(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantBinding {
    pub q: Quantifier,
    pub name: String,
    pub domain: Expr,
}

/// A closed formula `Q1 x1 in D1 ... Qn xn in Dn : body`. The body refers to
/// the bound names through parameter slots `0..n` in prefix order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lemma {
    pub name: String,
    pub prefix: Vec<QuantBinding>,
    pub body: Expr,
}

impl Lemma {
    pub fn vars(&self) -> BTreeSet<usize> {
        let mut vs = self.body.vars();
        for b in &self.prefix {
            vs.extend(b.domain.vars());
        }
        vs
    }

    /// The lemma as a single closed expression.
    pub fn to_expr(&self) -> Expr {
        let mut e = self.body.clone();
        for (slot, b) in self.prefix.iter().enumerate().rev() {
            e = Expr::new(ExprKind::Quant {
                q: b.q,
                binder: Binder {
                    name: b.name.clone(),
                    slot,
                    domain: Box::new(b.domain.clone()),
                },
                body: Box::new(e),
            });
        }
        e
    }

    /// Splits a closed formula into its maximal leading quantifier chain and
    /// the remaining body.
    pub fn from_expr(name: impl Into<String>, mut e: Expr) -> Lemma {
        let mut prefix = Vec::new();
        loop {
            match e.kind {
                ExprKind::Quant { q, binder, body } if binder.slot == prefix.len() => {
                    prefix.push(QuantBinding {
                        q,
                        name: binder.name,
                        domain: *binder.domain,
                    });
                    e = *body;
                }
                kind => {
                    return Lemma {
                        name: name.into(),
                        prefix,
                        body: Expr { kind, span: e.span },
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub name: String,
    pub sorts: Vec<Sort>,
    pub consts: Vec<ConstDecl>,
    /// Names of integer ranges bound by the instance file.
    pub ranges: Vec<String>,
    pub vars: Vec<VarDecl>,
    /// One initializer per variable, in declaration order.
    pub init: Vec<InitClause>,
    pub actions: Vec<Action>,
    pub lemmas: Vec<Lemma>,
}

impl TransitionSystem {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn lemma(&self, name: &str) -> Option<&Lemma> {
        self.lemmas.iter().find(|l| l.name == name)
    }

    pub fn sort_index(&self, name: &str) -> Option<SortId> {
        self.sorts
            .iter()
            .position(|s| s.name == name)
            .map(|i| i as SortId)
    }

    pub fn var_names(&self, vars: &BTreeSet<usize>) -> Vec<String> {
        vars.iter().map(|&v| self.vars[v].name.clone()).collect()
    }
}
