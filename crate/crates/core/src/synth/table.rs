//! Bit-parallel evaluation of clause candidates.
//!
//! For a template `Q0 x0 in D0 ... Qn xn in Dn`, every assignment of the bound
//! names is a position in a bit table; level `i` occupies a field of
//! `ceil(log2 |Di|)` bits, innermost level lowest. A predicate's truth on one
//! state becomes a mask over positions, a clause is the OR of its literal
//! masks, and the quantifiers are folded away innermost first with
//! shift-and-combine steps. Field values at or beyond `|Di|` are padding and
//! are forced to the neutral element of the level's quantifier before that
//! level is folded.

use crate::model::{Ctx, EvalError, Expr, Model, Quantifier, State, Value};
use crate::parser::{Grammar, Template};

/// Templates whose table would exceed this many bits are rejected.
pub const MAX_TABLE_BITS: u32 = 20;

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("template {0} is too large for clause tables (needs 2^{1} positions)")]
    TooLarge(usize, u32),
    #[error("quantifier domains of template {0} must not depend on state or other bound names")]
    DependentDomain(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug)]
struct Level {
    offset: u32,
    bits: u32,
    forall: bool,
    /// Positions whose field for this level is padding.
    pad: Vec<u64>,
}

#[derive(Clone, Debug)]
struct PredTable {
    expr: Expr,
    level_mask: u64,
    /// Environment and position mask per assignment of the predicate's
    /// levels.
    combos: Vec<(Vec<Value>, Vec<u64>)>,
}

/// Clause tables for one template.
#[derive(Clone, Debug)]
pub struct TemplateTable {
    levels: Vec<Level>,
    words: usize,
    preds: Vec<Option<PredTable>>,
}

/// Truth masks of every predicate of a template on one state, stored
/// contiguously (`words` u64s per predicate).
pub type StateMasks = Vec<u64>;

impl TemplateTable {
    pub fn new(model: &Model, g: &Grammar, t: usize) -> Result<TemplateTable, TableError> {
        let tpl: &Template = &g.templates[t];
        let blank = model.default_state();
        let ctx = Ctx::new(&blank);
        let mut domains = Vec::with_capacity(tpl.levels.len());
        for b in &tpl.levels {
            if !b.domain.free_slots().is_empty() || !b.domain.vars().is_empty() {
                return Err(TableError::DependentDomain(t));
            }
            let v = model.eval(&b.domain, &ctx, &mut Vec::new())?.into_owned();
            let xs = v
                .as_set()
                .ok_or_else(|| EvalError::new("quantifier domain is not a set", b.domain.span))?
                .to_vec();
            domains.push(xs);
        }
        let n = tpl.levels.len();
        let mut bits = vec![0u32; n];
        for (i, d) in domains.iter().enumerate() {
            bits[i] = (d.len().max(1) as u64).next_power_of_two().trailing_zeros();
        }
        let total: u32 = bits.iter().sum();
        if total > MAX_TABLE_BITS {
            return Err(TableError::TooLarge(t, total));
        }
        let positions = 1usize << total;
        let words = positions.div_ceil(64);
        let mut offsets = vec![0u32; n];
        for i in (0..n.saturating_sub(1)).rev() {
            offsets[i] = offsets[i + 1] + bits[i + 1];
        }
        let digit = |p: usize, i: usize| (p >> offsets[i]) & ((1usize << bits[i]) - 1);
        let levels = (0..n)
            .map(|i| {
                let mut pad = vec![0u64; words];
                for p in 0..positions {
                    if digit(p, i) >= domains[i].len() {
                        pad[p / 64] |= 1 << (p % 64);
                    }
                }
                Level {
                    offset: offsets[i],
                    bits: bits[i],
                    forall: tpl.levels[i].q == Quantifier::Forall,
                    pad,
                }
            })
            .collect();
        let filler = Value::Bool(false);
        let preds = g
            .preds
            .iter()
            .map(|p| {
                let e = p.per_template[t].as_ref()?;
                let lvls: Vec<usize> = e.free_slots().into_iter().collect();
                let sizes: Vec<usize> = lvls.iter().map(|&l| domains[l].len()).collect();
                let count: usize = sizes.iter().product();
                let mut combos = Vec::with_capacity(count);
                for c in 0..count {
                    let mut rest = c;
                    let mut idx = vec![0usize; lvls.len()];
                    for k in (0..lvls.len()).rev() {
                        idx[k] = rest % sizes[k];
                        rest /= sizes[k];
                    }
                    let mut env = vec![filler.clone(); n];
                    for (k, &l) in lvls.iter().enumerate() {
                        env[l] = domains[l][idx[k]].clone();
                    }
                    let mut mask = vec![0u64; words];
                    for pos in 0..positions {
                        if lvls.iter().enumerate().all(|(k, &l)| digit(pos, l) == idx[k]) {
                            mask[pos / 64] |= 1 << (pos % 64);
                        }
                    }
                    combos.push((env, mask));
                }
                Some(PredTable {
                    expr: e.clone(),
                    level_mask: lvls.iter().fold(0, |m, &l| m | 1 << l),
                    combos,
                })
            })
            .collect();
        Ok(TemplateTable { levels, words, preds })
    }

    pub fn words(&self) -> usize {
        self.words
    }

    /// Levels referenced by predicate `p`, as a bit mask.
    pub fn pred_levels(&self, p: usize) -> u64 {
        self.preds[p].as_ref().map_or(0, |t| t.level_mask)
    }

    pub fn has_pred(&self, p: usize) -> bool {
        self.preds[p].is_some()
    }

    /// Predicate masks on `state`, for the predicates in `which`. Others stay
    /// zero.
    pub fn state_masks(
        &self,
        model: &Model,
        state: &State,
        which: &[usize],
    ) -> Result<StateMasks, EvalError> {
        let w = self.words;
        let mut out = vec![0u64; self.preds.len() * w];
        let ctx = Ctx::new(state);
        let mut env = Vec::new();
        for &p in which {
            let Some(pt) = &self.preds[p] else { continue };
            let dst = &mut out[p * w..(p + 1) * w];
            for (e, mask) in &pt.combos {
                env.clear();
                env.extend_from_slice(e);
                if model.eval_bool(&pt.expr, &ctx, &mut env)? {
                    for (d, m) in dst.iter_mut().zip(mask) {
                        *d |= m;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Truth of the clause `lits` (predicate, positive) under the template,
    /// given the state's predicate masks. `scratch` must hold `words` u64s.
    pub fn clause_holds(
        &self,
        masks: &[u64],
        lits: &[(usize, bool)],
        level_mask: u64,
        scratch: &mut [u64],
    ) -> bool {
        let w = self.words;
        scratch.fill(0);
        for &(p, pos) in lits {
            let m = &masks[p * w..(p + 1) * w];
            if pos {
                for (s, x) in scratch.iter_mut().zip(m) {
                    *s |= x;
                }
            } else {
                for (s, x) in scratch.iter_mut().zip(m) {
                    *s |= !x;
                }
            }
        }
        for (i, lv) in self.levels.iter().enumerate().rev() {
            if level_mask >> i & 1 == 0 {
                continue;
            }
            if lv.forall {
                for (s, x) in scratch.iter_mut().zip(&lv.pad) {
                    *s |= x;
                }
            } else {
                for (s, x) in scratch.iter_mut().zip(&lv.pad) {
                    *s &= !x;
                }
            }
            for step in 0..lv.bits {
                fold(scratch, 1usize << (lv.offset + step), lv.forall);
            }
        }
        scratch[0] & 1 == 1
    }
}

/// `t[p] = t[p] op t[p + sh]` for all positions; reads only positions at or
/// after the one being written, so it can run in place.
fn fold(t: &mut [u64], sh: usize, and: bool) {
    let (ws, bs) = (sh / 64, sh % 64);
    let n = t.len();
    for i in 0..n {
        let lo = if i + ws < n { t[i + ws] } else { 0 };
        let src = if bs == 0 {
            lo
        } else {
            let hi = if i + ws + 1 < n { t[i + ws + 1] } else { 0 };
            (lo >> bs) | (hi << (64 - bs))
        };
        if and {
            t[i] &= src;
        } else {
            t[i] |= src;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_combines_across_words() {
        let mut t = vec![0u64; 2];
        t[1] = 1;
        fold(&mut t, 64, false);
        assert_eq!(t[0] & 1, 1);
        let mut t = vec![u64::MAX, 0];
        fold(&mut t, 32, true);
        assert_eq!(t[0] & 1, 1);
        fold(&mut t, 64, true);
        assert_eq!(t[0] & 1, 0);
    }
}
