use std::collections::{BTreeSet, HashMap};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{EvalError, Expr, ExprKind, Lemma, Model, QuantBinding, State};
use crate::parser::Grammar;

use super::table::{StateMasks, TemplateTable};

/// A clause of distinct literals under one template.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Candidate {
    pub template: usize,
    /// (predicate index, positive), sorted by predicate.
    pub lits: Vec<(usize, bool)>,
}

impl Candidate {
    /// Canonical order: template, then literal count, then literals with
    /// positive before negative.
    pub fn canonical_cmp(&self, other: &Candidate) -> std::cmp::Ordering {
        let key = |c: &Candidate| {
            let lits: Vec<(usize, bool)> = c.lits.iter().map(|&(p, pos)| (p, !pos)).collect();
            (c.template, c.lits.len(), lits)
        };
        key(self).cmp(&key(other))
    }

    /// State variables the candidate refers to.
    pub fn vars(&self, g: &Grammar) -> BTreeSet<usize> {
        self.lits.iter().flat_map(|&(p, _)| g.preds[p].vars.iter().copied()).collect()
    }

    /// The candidate as a lemma. Template levels no literal refers to are
    /// dropped from the prefix.
    pub fn to_lemma(&self, g: &Grammar, name: impl Into<String>) -> Lemma {
        let tpl = &g.templates[self.template];
        let mut used = BTreeSet::new();
        for &(p, _) in &self.lits {
            used.extend(g.preds[p].levels(self.template));
        }
        let mut map = vec![None; tpl.levels.len()];
        let mut prefix: Vec<QuantBinding> = Vec::new();
        for (i, b) in tpl.levels.iter().enumerate() {
            if used.contains(&i) {
                map[i] = Some(prefix.len());
                prefix.push(b.clone());
            }
        }
        let mut lits: Vec<Expr> = self
            .lits
            .iter()
            .map(|&(p, pos)| {
                let e = g.preds[p].per_template[self.template]
                    .as_ref()
                    .expect("candidate predicates resolve under their template")
                    .remap_slots(&map, 0);
                if pos {
                    e
                } else {
                    Expr::not(e)
                }
            })
            .collect();
        let body = if lits.len() == 1 {
            lits.pop().unwrap()
        } else {
            Expr::new(ExprKind::Or(lits))
        };
        Lemma { name: name.into(), prefix, body }
    }
}

/// Predicates usable under each template.
fn eligible(g: &Grammar) -> Vec<Vec<usize>> {
    (0..g.templates.len())
        .map(|t| (0..g.preds.len()).filter(|&p| g.preds[p].per_template[t].is_some()).collect())
        .collect()
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    r
}

/// Number of clauses with 1..=k literals over the grammar.
pub fn candidate_space_size(g: &Grammar, k: usize) -> u128 {
    eligible(g)
        .iter()
        .map(|ps| (1..=k).map(|j| binomial(ps.len(), j).saturating_mul(1 << j)).sum::<u128>())
        .sum()
}

/// Every clause with 1..=k literals, or a uniform sample of `n_invs` of them
/// when there are more. Returned in canonical order, with a flag telling
/// whether the enumeration was complete.
pub fn enumerate(g: &Grammar, k: usize, n_invs: usize, seed: u64) -> (Vec<Candidate>, bool) {
    let total = candidate_space_size(g, k);
    let elig = eligible(g);
    if total <= n_invs as u128 {
        let mut out = Vec::with_capacity(total as usize);
        for (t, ps) in elig.iter().enumerate() {
            for j in 1..=k.min(ps.len()) {
                let mut combo: Vec<usize> = (0..j).collect();
                loop {
                    for signs in 0..1u32 << j {
                        out.push(Candidate {
                            template: t,
                            lits: combo
                                .iter()
                                .enumerate()
                                .map(|(x, &c)| (ps[c], signs >> (j - 1 - x) & 1 == 0))
                                .collect(),
                        });
                    }
                    if !next_combination(&mut combo, ps.len()) {
                        break;
                    }
                }
            }
        }
        out.sort_by(Candidate::canonical_cmp);
        return (out, true);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = usize::try_from(total).unwrap_or(usize::MAX);
    let mut picks = index::sample(&mut rng, total, n_invs).into_vec();
    picks.sort_unstable();
    let mut out: Vec<Candidate> = picks.into_iter().map(|i| unrank(&elig, k, i as u128)).collect();
    out.sort_by(Candidate::canonical_cmp);
    (out, false)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let j = c.len();
    for i in (0..j).rev() {
        if c[i] < n - (j - i) {
            c[i] += 1;
            for x in i + 1..j {
                c[x] = c[x - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// The candidate at position `i` of the enumeration order.
fn unrank(elig: &[Vec<usize>], k: usize, mut i: u128) -> Candidate {
    for (t, ps) in elig.iter().enumerate() {
        for j in 1..=k.min(ps.len()) {
            let block = binomial(ps.len(), j) << j;
            if i >= block {
                i -= block;
                continue;
            }
            let signs = (i % (1 << j)) as u32;
            let mut rank = i >> j;
            // Lexicographic unranking of a j-subset of 0..n.
            let mut combo = Vec::with_capacity(j);
            let mut next = 0;
            for x in 0..j {
                let mut c = next;
                loop {
                    let below = binomial(ps.len() - c - 1, j - x - 1);
                    if rank < below {
                        break;
                    }
                    rank -= below;
                    c += 1;
                }
                combo.push(c);
                next = c + 1;
            }
            return Candidate {
                template: t,
                lits: combo
                    .iter()
                    .enumerate()
                    .map(|(x, &c)| (ps[c], signs >> (j - 1 - x) & 1 == 0))
                    .collect(),
            };
        }
    }
    unreachable!("candidate index out of range")
}

/// Clause tables for every template of a grammar, plus per-candidate level
/// masks.
pub struct Evaluator<'a> {
    pub model: &'a Model,
    pub grammar: &'a Grammar,
    tables: Vec<TemplateTable>,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a Model, grammar: &'a Grammar) -> Result<Evaluator<'a>, super::SynthError> {
        let tables = (0..grammar.templates.len())
            .map(|t| TemplateTable::new(model, grammar, t))
            .collect::<Result<_, _>>()?;
        Ok(Evaluator { model, grammar, tables })
    }

    pub fn table(&self, t: usize) -> &TemplateTable {
        &self.tables[t]
    }

    pub fn level_mask(&self, c: &Candidate) -> u64 {
        c.lits.iter().fold(0, |m, &(p, _)| m | self.tables[c.template].pred_levels(p))
    }

    /// Predicate masks of `states` under every template, restricted to the
    /// predicates in `which`.
    pub fn masks(&self, states: &[State], which: &[usize]) -> Result<Vec<Vec<StateMasks>>, EvalError> {
        self.tables
            .iter()
            .map(|tb| {
                states
                    .par_iter()
                    .map(|s| tb.state_masks(self.model, s, which))
                    .collect()
            })
            .collect()
    }

    pub fn holds(&self, c: &Candidate, masks: &[Vec<StateMasks>], state: usize, scratch: &mut Vec<u64>) -> bool {
        let tb = &self.tables[c.template];
        scratch.resize(tb.words(), 0);
        tb.clause_holds(&masks[c.template][state], &c.lits, self.level_mask(c), scratch)
    }

    /// Truth vector of `c` over all states with precomputed masks.
    pub fn truth_vector(&self, c: &Candidate, masks: &[Vec<StateMasks>]) -> Vec<u64> {
        let n = masks.first().map_or(0, Vec::len);
        let mut out = vec![0u64; n.div_ceil(64)];
        let tb = &self.tables[c.template];
        let lm = self.level_mask(c);
        let mut scratch = vec![0u64; tb.words()];
        for (i, m) in masks[c.template].iter().enumerate() {
            if tb.clause_holds(m, &c.lits, lm, &mut scratch) {
                out[i / 64] |= 1 << (i % 64);
            }
        }
        out
    }

    /// Keeps candidates true on every state, preserving order.
    pub fn filter_on(&self, cands: Vec<Candidate>, states: &[State]) -> Result<Vec<Candidate>, EvalError> {
        let all: Vec<usize> = (0..self.grammar.preds.len()).collect();
        let masks = self.masks(states, &all)?;
        Ok(cands
            .into_par_iter()
            .with_min_len(64)
            .filter(|c| {
                let tb = &self.tables[c.template];
                let lm = self.level_mask(c);
                let mut scratch = vec![0u64; tb.words()];
                masks[c.template].iter().all(|m| tb.clause_holds(m, &c.lits, lm, &mut scratch))
            })
            .collect())
    }

    /// Drops candidates whose truth vector over `sample` repeats that of an
    /// earlier candidate.
    pub fn dedup(&self, cands: Vec<Candidate>, sample: &[State]) -> Result<Vec<Candidate>, EvalError> {
        let all: Vec<usize> = (0..self.grammar.preds.len()).collect();
        let masks = self.masks(sample, &all)?;
        let fps: Vec<Vec<u64>> = cands.par_iter().map(|c| self.truth_vector(c, &masks)).collect();
        let mut seen: HashMap<Vec<u64>, ()> = HashMap::with_capacity(cands.len());
        Ok(cands
            .into_iter()
            .zip(fps)
            .filter_map(|(c, fp)| seen.insert(fp, ()).is_none().then_some(c))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn elig(n: usize) -> Vec<Vec<usize>> {
        vec![(0..n).collect()]
    }

    #[test]
    fn unrank_matches_enumeration_order() {
        let e = elig(5);
        let mut order = Vec::new();
        for j in 1..=3usize {
            let mut combo: Vec<usize> = (0..j).collect();
            loop {
                for signs in 0..1u32 << j {
                    order.push(Candidate {
                        template: 0,
                        lits: combo
                            .iter()
                            .enumerate()
                            .map(|(x, &c)| (c, signs >> (j - 1 - x) & 1 == 0))
                            .collect(),
                    });
                }
                if !next_combination(&mut combo, 5) {
                    break;
                }
            }
        }
        assert_eq!(order.len() as u128, (5 * 2 + 10 * 4 + 10 * 8) as u128);
        for (i, c) in order.iter().enumerate() {
            assert_eq!(&unrank(&e, 3, i as u128), c);
        }
    }
}
