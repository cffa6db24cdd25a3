use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cti::{has_cti, CtiConfig, CtiMode, Obligation};
use crate::model::{EvalError, Lemma, Model};
use crate::parser::{print_lemma, Grammar};
use crate::reach::Reachable;
use crate::synth::{local_inv_inference, SynthConfig, SynthError};

use super::check::equivalent;
use super::{ActionStatus, FailReason, NodeStats, Origin, ProofGraph};

/// How the reachable states used for candidate filtering were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReachMode {
    Exhaustive { max_states: u64 },
    Sampled { budget: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub n_invs: usize,
    pub n_ctis: usize,
    /// Overrides the grammar's literal bound when set.
    pub max_literals: Option<usize>,
    pub max_rounds: usize,
    pub seed: u64,
    /// Worker threads; does not affect results, so it is not recorded.
    #[serde(skip)]
    pub workers: Option<usize>,
    pub node_timeout_secs: u64,
    pub global_timeout_secs: u64,
    pub cti_mode: CtiMode,
    /// Largest (pre-state, binding) count checked exhaustively.
    pub cti_exhaustive_limit: u64,
    /// Pre-states drawn per randomized check.
    pub cti_samples: u64,
    pub fingerprint_states: usize,
    /// States enumerated exactly when deciding whether two lemmas coincide.
    pub equivalence_limit: u64,
    pub reach: ReachMode,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        InferenceConfig {
            n_invs: 80_000,
            n_ctis: 10_000,
            max_literals: None,
            max_rounds: 3,
            seed: 0,
            workers: None,
            node_timeout_secs: 600,
            global_timeout_secs: 14_400,
            cti_mode: CtiMode::Auto,
            cti_exhaustive_limit: 30_000_000,
            cti_samples: 1_000_000,
            fingerprint_states: 1024,
            equivalence_limit: 1 << 22,
            reach: ReachMode::Exhaustive { max_states: 50_000_000 },
        }
    }
}

impl InferenceConfig {
    pub fn cti(&self) -> CtiConfig {
        CtiConfig {
            max_ctis: self.n_ctis,
            mode: self.cti_mode,
            exhaustive_limit: self.cti_exhaustive_limit as u128,
            samples: self.cti_samples,
            seed: self.seed,
        }
    }

    pub fn synth(&self, deadline: Option<Instant>) -> SynthConfig {
        SynthConfig {
            n_invs: self.n_invs,
            max_literals: self.max_literals,
            max_rounds: self.max_rounds,
            seed: self.seed,
            cti: self.cti(),
            fingerprint_states: self.fingerprint_states,
            node_timeout: Some(Duration::from_secs(self.node_timeout_secs)),
            deadline,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InferenceError {
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Builds an inductive proof graph rooted at `safety`.
///
/// Action nodes are discharged eagerly when they hold with no support.
/// Otherwise the least-depth open node is handed to local inference; its
/// support lemmas become new lemma nodes, or edges to existing nodes with an
/// equivalent formula. A node whose inference fails is marked failed and the
/// loop moves on, so the result may be a partial graph.
pub fn do_ind_proof_slice(
    model: &Model,
    reach: &Reachable,
    safety: &Lemma,
    grammar: &Grammar,
    cfg: &InferenceConfig,
) -> Result<ProofGraph, InferenceError> {
    let start = Instant::now();
    let deadline = start.checked_add(Duration::from_secs(cfg.global_timeout_secs));
    let expired = || deadline.is_some_and(|d| Instant::now() >= d);
    let mut g = ProofGraph::new(model, safety.clone());
    let cti_cfg = cfg.cti();
    let synth_cfg = cfg.synth(deadline);
    let mut synthesized = 0usize;
    if !expired() {
        discharge_eagerly(model, &mut g, 0, &cti_cfg)?;
    }
    let mut iteration = 0;
    loop {
        if expired() {
            time_out_open_nodes(&mut g);
            tracing::warn!("global timeout reached");
            break;
        }
        let Ok((l, a)) = g.pick_node() else { break };
        iteration += 1;
        let lemma = g.lemmas[l].lemma.clone();
        let res = local_inv_inference(model, reach, grammar, &lemma, a, &synth_cfg)?;
        tracing::info!(
            iteration,
            lemma = %lemma.name,
            action = %model.sys.actions[a].name,
            slice = %res.slice.display(&model.sys),
            projected = res.projected_states,
            preds = res.grammar_preds,
            ctis = res.ctis_initial,
            candidates = res.candidates.distinct,
            support = res.support.len(),
            success = res.success,
            "node"
        );
        let mut stats = NodeStats {
            projected_states: res.projected_states as u64,
            grammar_preds: res.grammar_preds as u64,
            ctis_initial: res.ctis_initial,
            ctis_generated: res.ctis_generated,
            ctis_eliminated: res.ctis_eliminated,
            rounds: res.rounds as u64,
            candidates: res.candidates.clone(),
            partial_support: Vec::new(),
            surviving: Vec::new(),
        };
        if res.success {
            let depth = g.lemmas[l].depth + 1;
            for s in res.support {
                let id = match find_equivalent(model, &g, &s, cfg)? {
                    Some(id) => id,
                    None => {
                        synthesized += 1;
                        let named = Lemma { name: format!("Inv{synthesized}"), ..s };
                        tracing::info!(lemma = %print_lemma(&model.sys, &named), "new lemma");
                        let id = g.add_lemma(model, named, Origin::Support { lemma: l, action: a }, depth);
                        if !expired() {
                            discharge_eagerly(model, &mut g, id, &cti_cfg)?;
                        }
                        id
                    }
                };
                if id != l {
                    g.edges.insert((id, l, a));
                }
            }
            let node = &mut g.actions[l][a];
            node.status = ActionStatus::Proven;
            node.checked = res.checked;
            node.stats = Some(stats);
        } else {
            stats.partial_support = res.support.iter().map(|s| print_lemma(&model.sys, s)).collect();
            stats.surviving = res
                .surviving
                .iter()
                .map(|c| {
                    let show = |s: &crate::model::State| {
                        res.slice
                            .vars
                            .iter()
                            .map(|&v| format!("{} = {}", model.sys.vars[v].name, model.fmt_value(&s.0[v])))
                            .collect::<Vec<_>>()
                            .join(", ")
                    };
                    format!(
                        "[{}] --{}--> [{}]",
                        show(&c.pre),
                        model.fmt_binding(c.action, &c.binding),
                        show(&c.post)
                    )
                })
                .collect();
            let reason = if res.timed_out { FailReason::Timeout } else { FailReason::NoCandidate };
            let node = &mut g.actions[l][a];
            node.status = ActionStatus::Failed { reason };
            node.checked = res.checked;
            node.stats = Some(stats);
            g.failed.push((l, a));
            tracing::warn!(lemma = %lemma.name, action = %model.sys.actions[a].name, ?reason, "node failed");
        }
        if cfg!(debug_assertions) {
            g.assert_well_formed(model.sys.actions.len());
        }
    }
    Ok(g)
}

/// Marks the action nodes of lemma `l` that hold with no support as proven.
fn discharge_eagerly(
    model: &Model,
    g: &mut ProofGraph,
    l: usize,
    cfg: &CtiConfig,
) -> Result<(), EvalError> {
    let lemma = g.lemmas[l].lemma.clone();
    for a in 0..model.sys.actions.len() {
        let ob = Obligation { lemma: &lemma, action: a, support: &[] };
        let (found, checked) = has_cti(model, &ob, cfg)?;
        if !found {
            let node = &mut g.actions[l][a];
            node.status = ActionStatus::Proven;
            node.self_inductive = true;
            node.checked = Some(checked);
        }
    }
    Ok(())
}

fn time_out_open_nodes(g: &mut ProofGraph) {
    for (l, nodes) in g.actions.iter_mut().enumerate() {
        for (a, n) in nodes.iter_mut().enumerate() {
            if n.status == ActionStatus::Unproven {
                n.status = ActionStatus::Failed { reason: FailReason::Timeout };
                g.failed.push((l, a));
            }
        }
    }
}

/// An existing lemma node with the same formula, or one that agrees with
/// `lemma` on every type-correct state of the instance.
fn find_equivalent(
    model: &Model,
    g: &ProofGraph,
    lemma: &Lemma,
    cfg: &InferenceConfig,
) -> Result<Option<usize>, EvalError> {
    let text = |l: &Lemma| print_lemma(&model.sys, l);
    let want = text(lemma);
    if let Some(i) = g.lemmas.iter().position(|n| text(&n.lemma) == want) {
        return Ok(Some(i));
    }
    for (i, n) in g.lemmas.iter().enumerate() {
        if equivalent(model, &n.lemma, lemma, cfg.equivalence_limit, cfg.seed)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}
