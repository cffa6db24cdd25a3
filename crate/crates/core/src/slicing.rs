//! Static variable slicing of local proof obligations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::model::{Action, Expr, Lemma, TransitionSystem};
use crate::parser::Grammar;

/// Unprimed state variables syntactically referenced by `e`.
pub fn vars_of(e: &Expr) -> BTreeSet<usize> {
    e.vars()
}

/// Current-state variables the update of `var` in `action` reads. Purely
/// syntactic, so dead subexpressions still count.
pub fn coi(action: &Action, var: usize) -> BTreeSet<usize> {
    action.update_deps(var)
}

/// The variables sufficient for any support lemma of a (lemma, action)
/// obligation, with the parts they come from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSlice {
    pub pre: BTreeSet<usize>,
    pub lemma: BTreeSet<usize>,
    /// Cone of influence of the lemma's primed variables.
    pub coi: BTreeSet<usize>,
    pub vars: BTreeSet<usize>,
}

impl VarSlice {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// `{a, b}` with variable names.
    pub fn display(&self, sys: &TransitionSystem) -> String {
        format!("{{{}}}", sys.var_names(&self.vars).join(", "))
    }
}

pub fn slice(lemma: &Lemma, action: &Action) -> VarSlice {
    let mut pre = vars_of(&action.pre);
    for p in &action.params {
        pre.extend(vars_of(&p.domain));
    }
    let lemma_vars = lemma.vars();
    let coi: BTreeSet<usize> = lemma_vars.iter().flat_map(|&x| coi(action, x)).collect();
    let vars = pre.iter().chain(&lemma_vars).chain(&coi).copied().collect();
    VarSlice { pre, lemma: lemma_vars, coi, vars }
}

/// The grammar restricted to predicates over `vars`.
pub fn grammar_slice(g: &Grammar, vars: &BTreeSet<usize>) -> Grammar {
    g.slice(vars)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_formula, parse_spec};

    const SPEC: &str = "protocol P
        var a : bool; var b : bool; var c : bool;
        init { a = false; b = false; c = false; }
        action Step() { require b; a' = c; unchanged b, c; }
        action Flip() { require true; c' = ~c; unchanged a, b; }";

    #[test]
    fn slice_combines_guard_lemma_and_cone() {
        let sys = parse_spec(SPEC).unwrap();
        let l = Lemma::from_expr("L", parse_formula("a", &sys).unwrap());
        let s = slice(&l, &sys.actions[0]);
        assert_eq!(s.pre, BTreeSet::from([1]));
        assert_eq!(s.coi, BTreeSet::from([2]));
        assert_eq!(s.vars, BTreeSet::from([0, 1, 2]));
        let s = slice(&l, &sys.actions[1]);
        assert_eq!(s.vars, BTreeSet::from([0]));
        assert_eq!(s.display(&sys), "{a}");
    }
}
