//! Inductive proof graphs: lemma nodes, one action node per (lemma, action)
//! pair, and support edges from lemmas to the action nodes they help prove.

mod check;
mod export;
mod infer;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

pub use check::{check_graph_validity, equivalent, extract_invariant, GraphReport, NodeVerdict};
pub use export::{
    from_json, to_dot, to_json, to_report, GraphFile, ImportError, ReachSummary, GRAPH_FORMAT_VERSION,
};
pub use infer::{do_ind_proof_slice, InferenceConfig, InferenceError, ReachMode};

use crate::cti::CheckedBy;
use crate::model::{Lemma, Model};
use crate::slicing::{slice, VarSlice};
use crate::synth::CandidateStats;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Origin {
    Safety,
    /// Synthesized as support for the given action node.
    Support { lemma: usize, action: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaNode {
    pub lemma: Lemma,
    pub origin: Origin,
    /// Distance from the root along support edges.
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailReason {
    /// No candidate eliminated the remaining counterexamples.
    NoCandidate,
    /// The node or global time budget ran out.
    Timeout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ActionStatus {
    Unproven,
    Proven,
    Failed { reason: FailReason },
}

/// Statistics of the local inference run at an action node.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeStats {
    pub projected_states: u64,
    pub grammar_preds: u64,
    pub ctis_initial: u64,
    pub ctis_generated: u64,
    pub ctis_eliminated: u64,
    pub rounds: u64,
    pub candidates: CandidateStats,
    /// Support lemmas chosen before a failure; kept for the report only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partial_support: Vec<String>,
    /// Rendered counterexamples left at a failed node.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub surviving: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionNode {
    pub status: ActionStatus,
    pub checked: Option<CheckedBy>,
    pub slice: VarSlice,
    /// Discharged with an empty support set without local inference.
    pub self_inductive: bool,
    pub stats: Option<NodeStats>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Every action node is proven.
    Valid,
    /// Inference finished with failed nodes.
    Partial,
    /// The global time budget ran out.
    TimedOut,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofGraph {
    pub lemmas: Vec<LemmaNode>,
    /// `actions[l][a]` is the node for lemma `l` and action `a`.
    pub actions: Vec<Vec<ActionNode>>,
    /// (support lemma, lemma, action).
    pub edges: BTreeSet<(usize, usize, usize)>,
    pub failed: Vec<(usize, usize)>,
}

#[derive(Debug, thiserror::Error)]
pub enum GraphError {
    #[error("nothing to pick: every action node is proven or failed")]
    NothingToPick,
    #[error("graph is not valid; refusing to extract an invariant")]
    NotValid,
}

impl ProofGraph {
    /// A graph holding only the root lemma, all of its action nodes unproven.
    pub fn new(model: &Model, safety: Lemma) -> ProofGraph {
        let mut g = ProofGraph {
            lemmas: Vec::new(),
            actions: Vec::new(),
            edges: BTreeSet::new(),
            failed: Vec::new(),
        };
        g.add_lemma(model, safety, Origin::Safety, 0);
        g
    }

    pub fn add_lemma(&mut self, model: &Model, lemma: Lemma, origin: Origin, depth: usize) -> usize {
        let nodes = model
            .sys
            .actions
            .iter()
            .map(|a| ActionNode {
                status: ActionStatus::Unproven,
                checked: None,
                slice: slice(&lemma, a),
                self_inductive: false,
                stats: None,
            })
            .collect();
        self.lemmas.push(LemmaNode { lemma, origin, depth });
        self.actions.push(nodes);
        self.lemmas.len() - 1
    }

    pub fn root(&self) -> &Lemma {
        &self.lemmas[0].lemma
    }

    /// Lemmas with an edge into action node (l, a).
    pub fn support(&self, l: usize, a: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(_, el, ea)| el == l && ea == a)
            .map(|&(s, _, _)| s)
            .collect()
    }

    pub fn support_lemmas(&self, l: usize, a: usize) -> Vec<Lemma> {
        self.support(l, a).into_iter().map(|s| self.lemmas[s].lemma.clone()).collect()
    }

    /// The next node to work on: least depth, then action order, then lemma
    /// creation order.
    pub fn pick_node(&self) -> Result<(usize, usize), GraphError> {
        let mut best: Option<(usize, usize, usize)> = None;
        for (l, nodes) in self.actions.iter().enumerate() {
            for (a, n) in nodes.iter().enumerate() {
                if n.status != ActionStatus::Unproven {
                    continue;
                }
                let key = (self.lemmas[l].depth, a, l);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        best.map(|(_, a, l)| (l, a)).ok_or(GraphError::NothingToPick)
    }

    pub fn outcome(&self) -> Outcome {
        let timed_out = self.actions.iter().flatten().any(|n| {
            matches!(n.status, ActionStatus::Failed { reason: FailReason::Timeout })
        });
        if timed_out {
            Outcome::TimedOut
        } else if self.failed.is_empty()
            && self.actions.iter().flatten().all(|n| n.status == ActionStatus::Proven)
        {
            Outcome::Valid
        } else {
            Outcome::Partial
        }
    }

    pub fn is_valid(&self) -> bool {
        self.outcome() == Outcome::Valid
    }

    /// Panics if a structural invariant is broken.
    pub fn assert_well_formed(&self, actions: usize) {
        assert_eq!(self.lemmas.len(), self.actions.len());
        for nodes in &self.actions {
            assert_eq!(nodes.len(), actions, "one action node per action");
        }
        for &(s, l, a) in &self.edges {
            assert!(s < self.lemmas.len() && l < self.lemmas.len() && a < actions);
            assert_ne!(s, l, "self-edges are not allowed");
        }
        for &(l, a) in &self.failed {
            assert!(matches!(self.actions[l][a].status, ActionStatus::Failed { .. }));
        }
    }
}
