use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cti::{generate_ctis, CheckedBy, Cti, CtiConfig, Obligation};
use crate::model::{Lemma, Model, State};
use crate::parser::Grammar;
use crate::reach::Reachable;
use crate::slicing::{slice, VarSlice};

use super::candidates::{enumerate, Candidate, Evaluator};
use super::SynthError;

#[derive(Clone, Debug)]
pub struct SynthConfig {
    /// Candidates drawn per round when the grammar has more.
    pub n_invs: usize,
    /// Overrides the grammar's literal bound.
    pub max_literals: Option<usize>,
    /// Candidate rounds before giving up on a sampled grammar.
    pub max_rounds: usize,
    pub seed: u64,
    pub cti: CtiConfig,
    /// States in the fingerprint sample used to drop equivalent candidates.
    pub fingerprint_states: usize,
    pub node_timeout: Option<Duration>,
    /// Absolute deadline shared by the whole run.
    pub deadline: Option<Instant>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_invs: 80_000,
            max_literals: None,
            max_rounds: 3,
            seed: 0,
            cti: CtiConfig::default(),
            fingerprint_states: 1024,
            node_timeout: None,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateStats {
    /// Clauses generated, summed over rounds.
    pub generated: u64,
    /// Whether the first round enumerated the whole grammar.
    pub complete: bool,
    /// Clauses that hold on the projected reachable states.
    pub invariant: u64,
    /// Survivors after dropping equivalent clauses.
    pub distinct: u64,
}

#[derive(Clone, Debug)]
pub struct LocalResult {
    /// Support lemmas in the order they were chosen, named `Supp0`, `Supp1`,
    /// and so on.
    pub support: Vec<Lemma>,
    pub success: bool,
    pub timed_out: bool,
    pub rounds: usize,
    pub slice: VarSlice,
    /// Predicates left after slicing the grammar.
    pub grammar_preds: usize,
    pub projected_states: usize,
    /// Distinct counterexamples found by the first check.
    pub ctis_initial: u64,
    /// Counterexamples examined, summed over regenerations.
    pub ctis_generated: u64,
    pub ctis_eliminated: u64,
    pub candidates: CandidateStats,
    /// How the final obligation check was done.
    pub checked: Option<CheckedBy>,
    /// Up to five counterexamples left when inference failed.
    pub surviving: Vec<Cti>,
    pub elapsed: Duration,
}

/// Searches for support lemmas that make `lemma` inductive for `action`:
/// counterexamples are generated, and the candidate eliminating the most of
/// them is added until none remain.
pub fn local_inv_inference(
    model: &Model,
    reach: &Reachable,
    grammar: &Grammar,
    lemma: &Lemma,
    action: usize,
    cfg: &SynthConfig,
) -> Result<LocalResult, SynthError> {
    let start = Instant::now();
    let node_deadline = cfg.node_timeout.map(|t| start + t);
    let expired = || {
        let now = Instant::now();
        node_deadline.is_some_and(|d| now >= d) || cfg.deadline.is_some_and(|d| now >= d)
    };
    let sl = slice(lemma, &model.sys.actions[action]);
    let gs = grammar.slice(&sl.vars);
    let k = cfg.max_literals.unwrap_or(grammar.max_literals);
    let proj = reach.project(&sl.vars);
    let mut res = LocalResult {
        support: Vec::new(),
        success: false,
        timed_out: false,
        rounds: 0,
        slice: sl.clone(),
        grammar_preds: gs.preds.len(),
        projected_states: proj.len(),
        ctis_initial: 0,
        ctis_generated: 0,
        ctis_eliminated: 0,
        candidates: CandidateStats::default(),
        checked: None,
        surviving: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let ob = Obligation { lemma, action, support: &[] };
    let first = generate_ctis(model, &ob, &cfg.cti)?;
    res.ctis_initial = first.found;
    res.ctis_generated = first.ctis.len() as u64;
    res.checked = Some(first.checked);
    if first.found == 0 {
        res.success = true;
        res.elapsed = start.elapsed();
        return Ok(res);
    }
    tracing::debug!(
        lemma = %lemma.name,
        action = %model.sys.actions[action].name,
        ctis = first.found,
        slice = %sl.display(&model.sys),
        preds = gs.preds.len(),
        "local inference"
    );
    let ev = Evaluator::new(model, &gs)?;
    let mut chosen: Vec<Candidate> = Vec::new();
    let mut remaining: Vec<Cti> = first.ctis;
    let mut pool: Option<Vec<Candidate>> = None;
    let mut complete = false;
    loop {
        if expired() {
            res.timed_out = true;
            break;
        }
        let cands = match &mut pool {
            Some(p) => p,
            None => {
                res.rounds += 1;
                let round_seed = cfg.seed ^ (res.rounds as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                let (raw, all) = enumerate(&gs, k, cfg.n_invs, round_seed);
                if res.rounds == 1 {
                    res.candidates.complete = all;
                }
                complete = all;
                res.candidates.generated += raw.len() as u64;
                let inv = filter_reachable(&ev, raw, reach)?;
                res.candidates.invariant += inv.len() as u64;
                let sample = fingerprint_sample(model, &sl.vars, &remaining, cfg);
                let mut distinct = ev.dedup(inv, &sample)?;
                distinct.retain(|c| !chosen.contains(c));
                res.candidates.distinct += distinct.len() as u64;
                tracing::debug!(round = res.rounds, candidates = distinct.len(), "candidate round");
                pool.insert(distinct)
            }
        };
        let pres: Vec<State> = remaining.iter().map(|c| c.pre.clone()).collect();
        let all: Vec<usize> = (0..gs.preds.len()).collect();
        let masks = ev.masks(&pres, &all)?;
        let n = pres.len();
        let counts: Vec<usize> = cands
            .par_iter()
            .with_min_len(32)
            .map(|c| n - popcount(&ev.truth_vector(c, &masks), n))
            .collect();
        // Earliest candidate in canonical order among those eliminating the
        // most; canonical order already prefers fewer literals.
        let best = counts
            .iter()
            .enumerate()
            .fold(None, |acc: Option<(usize, usize)>, (i, &c)| match acc {
                Some((_, bc)) if bc >= c => acc,
                _ => Some((i, c)),
            });
        match best {
            Some((i, count)) if count > 0 => {
                let c = cands.remove(i);
                let truth = ev.truth_vector(&c, &masks);
                let mut idx = 0;
                remaining.retain(|_| {
                    let keep = truth[idx / 64] >> (idx % 64) & 1 == 1;
                    idx += 1;
                    keep
                });
                res.ctis_eliminated += count as u64;
                tracing::debug!(
                    lemma = %crate::parser::print_lemma(&model.sys, &c.to_lemma(&gs, "")),
                    eliminated = count,
                    remaining = remaining.len(),
                    "support lemma"
                );
                chosen.push(c);
            }
            _ => {
                if complete || res.rounds >= cfg.max_rounds {
                    break;
                }
                pool = None;
                continue;
            }
        }
        if remaining.is_empty() {
            let support: Vec<Lemma> = support_lemmas(&chosen, &gs);
            let ob = Obligation { lemma, action, support: &support };
            let again = generate_ctis(model, &ob, &cfg.cti)?;
            res.checked = Some(again.checked);
            if again.found == 0 {
                res.success = true;
                break;
            }
            res.ctis_generated += again.ctis.len() as u64;
            remaining = again.ctis;
        }
    }
    res.support = support_lemmas(&chosen, &gs);
    if !res.success {
        res.surviving = remaining.into_iter().take(5).collect();
    }
    res.elapsed = start.elapsed();
    Ok(res)
}

fn support_lemmas(chosen: &[Candidate], g: &Grammar) -> Vec<Lemma> {
    chosen
        .iter()
        .enumerate()
        .map(|(i, c)| c.to_lemma(g, format!("Supp{i}")))
        .collect()
}

/// Count of set bits among the first `n`.
fn popcount(v: &[u64], n: usize) -> usize {
    let mut total = 0;
    for (i, w) in v.iter().enumerate() {
        let valid = n.saturating_sub(i * 64).min(64);
        let m = if valid == 64 { u64::MAX } else { (1u64 << valid) - 1 };
        total += (w & m).count_ones() as usize;
    }
    total
}

/// Keeps the candidates that hold on every reachable state. Each candidate is
/// checked against the projection onto its own variables.
fn filter_reachable(
    ev: &Evaluator,
    cands: Vec<Candidate>,
    reach: &Reachable,
) -> Result<Vec<Candidate>, SynthError> {
    let g = ev.grammar;
    let mut groups: BTreeMap<BTreeSet<usize>, Vec<usize>> = BTreeMap::new();
    for (i, c) in cands.iter().enumerate() {
        groups.entry(c.vars(g)).or_default().push(i);
    }
    let mut keep = vec![false; cands.len()];
    for (vars, idxs) in groups {
        let states = reach.project(&vars).states(ev.model);
        let which: Vec<usize> = (0..g.preds.len()).filter(|&p| g.preds[p].vars.is_subset(&vars)).collect();
        let masks = ev.masks(&states, &which)?;
        let ok: Vec<bool> = idxs
            .par_iter()
            .with_min_len(32)
            .map(|&i| {
                let c = &cands[i];
                let mut scratch = Vec::new();
                (0..states.len()).all(|s| ev.holds(c, &masks, s, &mut scratch))
            })
            .collect();
        for (&i, ok) in idxs.iter().zip(ok) {
            keep[i] = ok;
        }
    }
    Ok(cands.into_iter().zip(keep).filter_map(|(c, k)| k.then_some(c)).collect())
}

/// Pre-states of the current counterexamples (up to half the sample), padded
/// with random type-correct states over the slice variables.
fn fingerprint_sample(model: &Model, vars: &BTreeSet<usize>, ctis: &[Cti], cfg: &SynthConfig) -> Vec<State> {
    let n = cfg.fingerprint_states;
    let mut out: Vec<State> = ctis.iter().take(n / 2).map(|c| c.pre.clone()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let base = model.default_state();
    while out.len() < n {
        let mut s = base.clone();
        for &v in vars {
            s.0[v] = model.var_domain(v).sample(&mut rng);
        }
        out.push(s);
    }
    out
}
