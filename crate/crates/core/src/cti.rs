//! Counterexamples to induction for local (lemma, action) obligations.
//!
//! An obligation `L /\ Supp /\ A => L'` only involves the variables of its
//! slice plus those of the support lemmas. Pre-states are therefore drawn
//! from the subspace over those variables, with every other variable held at
//! its default value. This loses nothing: whether a pre-state is a
//! counterexample does not depend on the variables left out.

use std::collections::{BTreeSet, BinaryHeap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::model::{Domain, EvalError, Lemma, Model, Saturating, State, Value};
use crate::slicing::slice;

/// A local proof obligation: `lemma` is preserved by `action` given the
/// support lemmas.
#[derive(Clone, Copy, Debug)]
pub struct Obligation<'a> {
    pub lemma: &'a Lemma,
    pub action: usize,
    pub support: &'a [Lemma],
}

impl Obligation<'_> {
    /// Variables that determine whether a pre-state is a counterexample.
    pub fn vars(&self, model: &Model) -> BTreeSet<usize> {
        let mut vs = slice(self.lemma, &model.sys.actions[self.action]).vars;
        for s in self.support {
            vs.extend(s.vars());
        }
        vs
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cti {
    pub pre: State,
    pub action: usize,
    /// Index into the action's parameter bindings.
    pub binding_index: usize,
    pub binding: Vec<Value>,
    pub post: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CtiMode {
    /// Exhaustive when the pre-state subspace is small enough, else
    /// randomized.
    #[default]
    Auto,
    Exhaustive,
    Randomized,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtiConfig {
    pub max_ctis: usize,
    pub mode: CtiMode,
    /// Largest number of (pre-state, binding) pairs checked exhaustively.
    pub exhaustive_limit: u128,
    /// Pre-states drawn in randomized mode.
    pub samples: u64,
    pub seed: u64,
}

impl Default for CtiConfig {
    fn default() -> Self {
        CtiConfig {
            max_ctis: 10_000,
            mode: CtiMode::Auto,
            exhaustive_limit: 30_000_000,
            samples: 1_000_000,
            seed: 0,
        }
    }
}

/// How an obligation was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckedBy {
    /// Every pre-state of the obligation's subspace was examined, so an
    /// empty result proves the obligation on this instance.
    Exhaustive { states: u64 },
    /// Random pre-states; an empty result means "probably valid".
    Randomized { samples: u64, seed: u64 },
}

impl CheckedBy {
    pub fn is_exhaustive(&self) -> bool {
        matches!(self, CheckedBy::Exhaustive { .. })
    }
}

impl std::fmt::Display for CheckedBy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CheckedBy::Exhaustive { states } => write!(f, "exhaustive({states})"),
            CheckedBy::Randomized { samples, seed } => write!(f, "randomized({samples}, seed {seed})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CtiSet {
    /// At most `max_ctis` counterexamples in canonical order.
    pub ctis: Vec<Cti>,
    /// Distinct counterexamples found before capping.
    pub found: u64,
    pub checked: CheckedBy,
}

/// Product of the per-variable domain sizes.
pub fn type_state_space_size(model: &Model) -> Saturating {
    model.type_state_space_size()
}

/// Whether `candidate` rules out the counterexample's pre-state.
pub fn eliminates(model: &Model, candidate: &Lemma, cti: &Cti) -> Result<bool, EvalError> {
    Ok(!model.holds(candidate, &cti.pre)?)
}

/// Re-checks the defining properties of a counterexample.
pub fn is_cti(model: &Model, ob: &Obligation, cti: &Cti) -> Result<bool, EvalError> {
    if cti.action != ob.action || !model.holds(ob.lemma, &cti.pre)? {
        return Ok(false);
    }
    for s in ob.support {
        if !model.holds(s, &cti.pre)? {
            return Ok(false);
        }
    }
    match model.apply_action(&cti.pre, cti.action, &cti.binding)? {
        Some(post) if post == cti.post => Ok(!model.holds(ob.lemma, &post)?),
        _ => Ok(false),
    }
}

/// Collects counterexamples to the obligation, keeping the `max_ctis` with
/// the smallest content hash so the selection does not depend on scheduling.
pub fn generate_ctis(model: &Model, ob: &Obligation, cfg: &CtiConfig) -> Result<CtiSet, EvalError> {
    let search = Search::new(model, ob, cfg);
    let cap = cfg.max_ctis;
    let parts: Vec<(Vec<Keyed>, u64, Vec<u64>)> = (0..search.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut heap: BinaryHeap<Keyed> = BinaryHeap::new();
            let mut found = 0u64;
            let mut keys = Vec::new();
            search.run_chunk(chunk, &mut |key, cti| {
                found += 1;
                if !search.exhaustive {
                    keys.push(key);
                }
                if cap > 0 && (heap.len() < cap || key < heap.peek().unwrap().key) {
                    heap.push(Keyed { key, cti });
                    if heap.len() > cap {
                        heap.pop();
                    }
                }
                true
            })?;
            Ok((heap.into_vec(), found, keys))
        })
        .collect::<Result<_, EvalError>>()?;
    let mut found = 0;
    let mut all: Vec<Keyed> = Vec::new();
    let mut keys: HashSet<u64> = HashSet::new();
    for (kept, n, ks) in parts {
        found += n;
        all.extend(kept);
        keys.extend(ks);
    }
    if !search.exhaustive {
        found = keys.len() as u64;
    }
    all.sort_by_key(|k| k.key);
    all.dedup_by_key(|k| k.key);
    all.truncate(cap);
    let mut ctis: Vec<Cti> = all.into_iter().map(|k| k.cti).collect();
    ctis.sort_by(|a, b| {
        (a.pre.encode(), a.binding_index).cmp(&(b.pre.encode(), b.binding_index))
    });
    Ok(CtiSet { ctis, found, checked: search.checked() })
}

/// Whether any counterexample exists, stopping at the first one.
pub fn has_cti(model: &Model, ob: &Obligation, cfg: &CtiConfig) -> Result<(bool, CheckedBy), EvalError> {
    let search = Search::new(model, ob, cfg);
    let hit = (0..search.chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut hit = false;
            search.run_chunk(chunk, &mut |_, _| {
                hit = true;
                false
            })?;
            Ok(hit)
        })
        .find_any(|r: &Result<bool, EvalError>| !matches!(r, Ok(false)));
    match hit {
        Some(Err(e)) => Err(e),
        Some(Ok(h)) => Ok((h, search.checked())),
        None => Ok((false, search.checked())),
    }
}

struct Keyed {
    key: u64,
    cti: Cti,
}

impl PartialEq for Keyed {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}
impl Eq for Keyed {}
impl PartialOrd for Keyed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Keyed {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key.cmp(&other.key)
    }
}

const CHUNK: u128 = 4096;

struct Search<'a> {
    model: &'a Model,
    ob: &'a Obligation<'a>,
    vars: Vec<usize>,
    lemma_vars: Vec<usize>,
    /// Member lists per variable, for exhaustive enumeration.
    values: Vec<Vec<Value>>,
    domains: Vec<Domain>,
    states: u128,
    exhaustive: bool,
    chunks: usize,
    samples: u64,
    seed: u64,
    base: State,
}

impl<'a> Search<'a> {
    fn new(model: &'a Model, ob: &'a Obligation<'a>, cfg: &CtiConfig) -> Search<'a> {
        let vars: Vec<usize> = ob.vars(model).into_iter().collect();
        let domains: Vec<Domain> = vars.iter().map(|&v| model.var_domain(v).clone()).collect();
        let states = model.subspace_size(&vars);
        let bindings = model.bindings(ob.action).len().max(1) as u128;
        let small = states.get().is_some() && states.0.saturating_mul(bindings) <= cfg.exhaustive_limit;
        let exhaustive = match cfg.mode {
            CtiMode::Auto => small,
            // Exhaustive enumeration needs an indexable subspace.
            CtiMode::Exhaustive => states.get().is_some(),
            CtiMode::Randomized => false,
        };
        let values = if exhaustive {
            domains
                .iter()
                .map(|d| d.values(u64::MAX).expect("subspace size fits"))
                .collect()
        } else {
            Vec::new()
        };
        let chunks = if exhaustive {
            states.0.div_ceil(CHUNK) as usize
        } else {
            cfg.samples.div_ceil(CHUNK as u64) as usize
        };
        Search {
            model,
            ob,
            lemma_vars: ob.lemma.vars().into_iter().collect(),
            vars,
            values,
            domains,
            states: states.0,
            exhaustive,
            chunks,
            samples: cfg.samples,
            seed: cfg.seed,
            base: model.default_state(),
        }
    }

    fn checked(&self) -> CheckedBy {
        if self.exhaustive {
            CheckedBy::Exhaustive { states: self.states as u64 }
        } else {
            CheckedBy::Randomized { samples: self.samples, seed: self.seed }
        }
    }

    /// Visits the counterexamples from one chunk of pre-states. `emit`
    /// returns false to stop early.
    fn run_chunk(
        &self,
        chunk: usize,
        emit: &mut dyn FnMut(u64, Cti) -> bool,
    ) -> Result<(), EvalError> {
        let start = chunk as u128 * CHUNK;
        let mut state = self.base.clone();
        if self.exhaustive {
            let end = (start + CHUNK).min(self.states);
            let mut digits = self.digits(start);
            for (k, &v) in self.vars.iter().enumerate() {
                state.0[v] = self.values[k][digits[k]].clone();
            }
            for i in start..end {
                if !self.check(&state, emit)? {
                    return Ok(());
                }
                if i + 1 < end {
                    self.advance(&mut digits, &mut state);
                }
            }
        } else {
            let end = (start + CHUNK).min(self.samples as u128);
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(chunk as u64);
            for _ in start..end {
                for (k, &v) in self.vars.iter().enumerate() {
                    state.0[v] = self.domains[k].sample(&mut rng);
                }
                if !self.check(&state, emit)? {
                    return Ok(());
                }
            }
        }
        Ok(())
    }

    /// Mixed-radix digits of a subspace index; the last variable varies
    /// fastest.
    fn digits(&self, mut index: u128) -> Vec<usize> {
        let mut d = vec![0; self.vars.len()];
        for k in (0..self.vars.len()).rev() {
            let n = self.values[k].len() as u128;
            d[k] = (index % n) as usize;
            index /= n;
        }
        d
    }

    fn advance(&self, digits: &mut [usize], state: &mut State) {
        for k in (0..digits.len()).rev() {
            digits[k] += 1;
            if digits[k] == self.values[k].len() {
                digits[k] = 0;
            }
            state.0[self.vars[k]] = self.values[k][digits[k]].clone();
            if digits[k] != 0 {
                return;
            }
        }
    }

    fn check(&self, pre: &State, emit: &mut dyn FnMut(u64, Cti) -> bool) -> Result<bool, EvalError> {
        let m = self.model;
        if !m.holds(self.ob.lemma, pre)? {
            return Ok(true);
        }
        for s in self.ob.support {
            if !m.holds(s, pre)? {
                return Ok(true);
            }
        }
        let mut enc = None;
        for (bi, b) in m.bindings(self.ob.action).iter().enumerate() {
            let Some(post) = m.apply_action(pre, self.ob.action, b)? else {
                continue;
            };
            // The lemma still holds when none of its variables changed.
            if self.lemma_vars.iter().all(|&v| post.0[v] == pre.0[v]) {
                continue;
            }
            if m.holds(self.ob.lemma, &post)? {
                continue;
            }
            let enc = enc.get_or_insert_with(|| pre.encode());
            let key = cti_key(enc, self.ob.action, bi);
            let cti = Cti {
                pre: pre.clone(),
                action: self.ob.action,
                binding_index: bi,
                binding: b.clone(),
                post,
            };
            if !emit(key, cti) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn cti_key(enc: &[u8], action: usize, binding: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(enc);
    h.update((action as u64).to_le_bytes());
    h.update((binding as u64).to_le_bytes());
    u64::from_le_bytes(h.finalize()[..8].try_into().unwrap())
}
