use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{EvalError, Model, State};

use super::stateset::{Provenance, StateSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExploreMode {
    /// Breadth-first closure, stopping after `max_states` distinct states.
    Exhaustive { max_states: u64 },
    /// Random walks until `budget` distinct states have been seen.
    Sampled { budget: u64, seed: u64 },
}

/// Explores the reachable states of `model`.
///
/// Exhaustive mode is breadth-first; each frontier is expanded in parallel
/// and merged in frontier order, so the result does not depend on the number
/// of workers. When the state limit is hit the partial set is returned with
/// [`Provenance::Truncated`].
pub fn explore(model: &Model, mode: ExploreMode) -> Result<StateSet, EvalError> {
    match mode {
        ExploreMode::Exhaustive { max_states } => bfs(model, max_states),
        ExploreMode::Sampled { budget, seed } => sample(model, budget, seed),
    }
}

fn bfs(model: &Model, max_states: u64) -> Result<StateSet, EvalError> {
    let width = model.sys.vars.len();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut frontier = Vec::new();
    for s in model.initial_states()? {
        if seen.insert(s.encode()) {
            frontier.push(s);
        }
    }
    let mut truncated = seen.len() as u64 > max_states;
    let mut depth = 0;
    while !frontier.is_empty() && !truncated {
        let succs: Vec<Vec<State>> = frontier
            .par_iter()
            .map(|s| {
                model
                    .successors(s)
                    .map(|ts| ts.into_iter().map(|t| t.next).collect())
            })
            .collect::<Result<_, _>>()?;
        let mut next = Vec::new();
        'merge: for group in succs {
            for s in group {
                let enc = s.encode();
                if !seen.contains(&enc) {
                    if seen.len() as u64 >= max_states {
                        truncated = true;
                        break 'merge;
                    }
                    seen.insert(enc);
                    next.push(s);
                }
            }
        }
        depth += 1;
        tracing::debug!(depth, frontier = next.len(), total = seen.len(), "bfs level");
        frontier = next;
    }
    let provenance = if truncated {
        Provenance::Truncated { limit: max_states }
    } else {
        Provenance::Exhaustive
    };
    Ok(StateSet::from_encodings(
        (0..width).collect(),
        width,
        seen.into_iter().collect(),
        provenance,
    ))
}

/// Chance per step of abandoning the current walk and restarting from a
/// random initial state. Keeps walks from settling in terminal regions.
const RESTART_PROBABILITY: f64 = 1.0 / 32.0;

fn sample(model: &Model, budget: u64, seed: u64) -> Result<StateSet, EvalError> {
    let width = model.sys.vars.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inits = model.initial_states()?;
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    // Walks stop once this many steps have been taken without reaching the
    // budget, which happens when fewer states are reachable.
    let max_steps = budget.saturating_mul(64).max(1024);
    let mut steps = 0u64;
    let mut cur: Option<State> = None;
    while (seen.len() as u64) < budget && steps < max_steps {
        let s = match cur.take() {
            Some(s) => s,
            None => match inits.choose(&mut rng) {
                Some(s) => s.clone(),
                None => break,
            },
        };
        let enc = s.encode();
        seen.insert(enc.clone());
        steps += 1;
        if rng.gen_bool(RESTART_PROBABILITY) {
            continue;
        }
        // Stuttering steps are skipped so that idempotent actions do not
        // dominate the walk.
        let succ: Vec<State> = model
            .successors(&s)?
            .into_iter()
            .map(|t| t.next)
            .filter(|n| n.encode() != enc)
            .collect();
        cur = succ.choose(&mut rng).cloned();
    }
    Ok(StateSet::from_encodings(
        (0..width).collect(),
        width,
        seen.into_iter().collect(),
        Provenance::Sampled { seed, budget },
    ))
}
