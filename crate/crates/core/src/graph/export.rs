use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::cti::CheckedBy;
use crate::model::{Lemma, Model};
use crate::parser::{parse_formula, print_lemma, ParseError};
use crate::reach::Provenance;
use crate::slicing::slice;

use super::{ActionNode, ActionStatus, InferenceConfig, LemmaNode, NodeStats, Origin, Outcome, ProofGraph};

pub const GRAPH_FORMAT_VERSION: u32 = 1;
const GRAPH_FORMAT: &str = "proofslice-graph";

/// The reachable set a run filtered candidates against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachSummary {
    pub states: u64,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaEntry {
    pub name: String,
    pub formula: String,
    pub origin: Origin,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub lemma: String,
    pub action: String,
    #[serde(flatten)]
    pub status: ActionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checked: Option<CheckedBy>,
    pub self_inductive: bool,
    pub slice: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<NodeStats>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeEntry {
    pub support: String,
    pub lemma: String,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRef {
    pub lemma: String,
    pub action: String,
}

/// On-disk form of a proof graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphFile {
    pub format: String,
    pub version: u32,
    pub protocol: String,
    pub spec_hash: String,
    pub instance_hash: String,
    pub outcome: Outcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<InferenceConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<ReachSummary>,
    pub lemmas: Vec<LemmaEntry>,
    pub action_nodes: Vec<ActionEntry>,
    pub edges: Vec<EdgeEntry>,
    pub failed: Vec<NodeRef>,
}

#[derive(Debug, thiserror::Error)]
pub enum ImportError {
    #[error("malformed graph file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("not a proof graph file (format `{0}`)")]
    Format(String),
    #[error("unsupported graph file version {0}")]
    Version(u32),
    #[error("lemma `{lemma}`: {error}")]
    Formula { lemma: String, error: ParseError },
    #[error("unknown lemma `{0}`")]
    UnknownLemma(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("graph file lists {found} action nodes, expected {expected}")]
    NodeCount { found: usize, expected: usize },
}

impl GraphFile {
    pub fn build(
        graph: &ProofGraph,
        model: &Model,
        config: Option<&InferenceConfig>,
        reachable: Option<ReachSummary>,
    ) -> GraphFile {
        let sys = &model.sys;
        let lname = |l: usize| graph.lemmas[l].lemma.name.clone();
        let aname = |a: usize| sys.actions[a].name.clone();
        GraphFile {
            format: GRAPH_FORMAT.into(),
            version: GRAPH_FORMAT_VERSION,
            protocol: sys.name.clone(),
            spec_hash: hex::encode(crate::reach::spec_hash(model)),
            instance_hash: hex::encode(crate::reach::instance_hash(model)),
            outcome: graph.outcome(),
            config: config.cloned(),
            reachable,
            lemmas: graph
                .lemmas
                .iter()
                .map(|n| LemmaEntry {
                    name: n.lemma.name.clone(),
                    formula: print_lemma(sys, &n.lemma),
                    origin: n.origin.clone(),
                    depth: n.depth,
                })
                .collect(),
            action_nodes: graph
                .actions
                .iter()
                .enumerate()
                .flat_map(|(l, nodes)| {
                    nodes.iter().enumerate().map(move |(a, n)| ActionEntry {
                        lemma: lname(l),
                        action: aname(a),
                        status: n.status,
                        checked: n.checked,
                        self_inductive: n.self_inductive,
                        slice: sys.var_names(&n.slice.vars),
                        stats: n.stats.clone(),
                    })
                })
                .collect(),
            edges: graph
                .edges
                .iter()
                .map(|&(s, l, a)| EdgeEntry { support: lname(s), lemma: lname(l), action: aname(a) })
                .collect(),
            failed: graph
                .failed
                .iter()
                .map(|&(l, a)| NodeRef { lemma: lname(l), action: aname(a) })
                .collect(),
        }
    }

    /// Rebuilds the graph against `model`, re-parsing every formula.
    pub fn to_graph(&self, model: &Model) -> Result<ProofGraph, ImportError> {
        let sys = &model.sys;
        let mut lemmas = Vec::with_capacity(self.lemmas.len());
        for e in &self.lemmas {
            let expr = parse_formula(&e.formula, sys)
                .map_err(|error| ImportError::Formula { lemma: e.name.clone(), error })?;
            lemmas.push(LemmaNode {
                lemma: Lemma::from_expr(e.name.clone(), expr),
                origin: e.origin.clone(),
                depth: e.depth,
            });
        }
        let lemma_index = |name: &str| {
            lemmas
                .iter()
                .position(|n: &LemmaNode| n.lemma.name == name)
                .ok_or_else(|| ImportError::UnknownLemma(name.to_string()))
        };
        let action_index =
            |name: &str| sys.action_index(name).ok_or_else(|| ImportError::UnknownAction(name.to_string()));
        let expected = lemmas.len() * sys.actions.len();
        if self.action_nodes.len() != expected {
            return Err(ImportError::NodeCount { found: self.action_nodes.len(), expected });
        }
        let mut actions: Vec<Vec<Option<ActionNode>>> = vec![vec![None; sys.actions.len()]; lemmas.len()];
        for e in &self.action_nodes {
            let l = lemma_index(&e.lemma)?;
            let a = action_index(&e.action)?;
            actions[l][a] = Some(ActionNode {
                status: e.status,
                checked: e.checked,
                slice: slice(&lemmas[l].lemma, &sys.actions[a]),
                self_inductive: e.self_inductive,
                stats: e.stats.clone(),
            });
        }
        let actions: Vec<Vec<ActionNode>> = actions
            .into_iter()
            .map(|row| row.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<_>>()
            .ok_or(ImportError::NodeCount { found: self.action_nodes.len(), expected })?;
        let mut edges = BTreeSet::new();
        for e in &self.edges {
            edges.insert((lemma_index(&e.support)?, lemma_index(&e.lemma)?, action_index(&e.action)?));
        }
        let failed = self
            .failed
            .iter()
            .map(|f| Ok((lemma_index(&f.lemma)?, action_index(&f.action)?)))
            .collect::<Result<_, ImportError>>()?;
        Ok(ProofGraph { lemmas, actions, edges, failed })
    }
}

/// The graph file as pretty-printed JSON.
pub fn to_json(
    graph: &ProofGraph,
    model: &Model,
    config: Option<&InferenceConfig>,
    reachable: Option<ReachSummary>,
) -> String {
    let file = GraphFile::build(graph, model, config, reachable);
    let mut s = serde_json::to_string_pretty(&file).expect("graph files serialize");
    s.push('\n');
    s
}

/// Parses a graph file and rebuilds the graph against `model`. Hashes are
/// returned in the file for the caller to compare.
pub fn from_json(text: &str, model: &Model) -> Result<(ProofGraph, GraphFile), ImportError> {
    let file: GraphFile = serde_json::from_str(text)?;
    if file.format != GRAPH_FORMAT {
        return Err(ImportError::Format(file.format));
    }
    if file.version != GRAPH_FORMAT_VERSION {
        return Err(ImportError::Version(file.version));
    }
    let g = file.to_graph(model)?;
    Ok((g, file))
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering. Lemma nodes are ellipses and action nodes boxes;
/// action nodes discharged with no support are omitted. Boxes show the
/// variable slice and, given the full reachable count, the projected count
/// and its reduction factor.
pub fn to_dot(graph: &ProofGraph, model: &Model, total_states: Option<u64>) -> String {
    let sys = &model.sys;
    let mut out = String::from("digraph proof {\n  rankdir=BT;\n  node [fontname=\"Helvetica\"];\n");
    for (l, n) in graph.lemmas.iter().enumerate() {
        let style = if l == 0 { ", penwidth=2" } else { "" };
        let _ = writeln!(out, "  L{l} [shape=ellipse, label=\"{}\"{style}];", dot_escape(&n.lemma.name));
    }
    for (l, nodes) in graph.actions.iter().enumerate() {
        for (a, n) in nodes.iter().enumerate() {
            if n.self_inductive {
                continue;
            }
            let mut label = format!(
                "{}\\nV_slice={{{}}}",
                dot_escape(&sys.actions[a].name),
                dot_escape(&sys.var_names(&n.slice.vars).join(","))
            );
            if let (Some(st), Some(total)) = (&n.stats, total_states) {
                let proj = st.projected_states.max(1);
                let factor = (total as f64 / proj as f64).round() as u64;
                let _ = write!(
                    label,
                    "\\n|R|={}/{} ({}x reduction)",
                    thousands(st.projected_states),
                    thousands(total),
                    thousands(factor)
                );
            }
            let style = match n.status {
                ActionStatus::Proven => String::new(),
                ActionStatus::Unproven => ", style=dashed".into(),
                ActionStatus::Failed { .. } => ", color=red, fontcolor=red, penwidth=2".into(),
            };
            let _ = writeln!(out, "  A{l}_{a} [shape=box, label=\"{label}\"{style}];");
            let _ = writeln!(out, "  A{l}_{a} -> L{l};");
        }
    }
    for &(s, l, a) in &graph.edges {
        let _ = writeln!(out, "  L{s} -> A{l}_{a};");
    }
    out.push_str("}\n");
    out
}

/// Plain-text summary, with details of every failed obligation.
pub fn to_report(graph: &ProofGraph, model: &Model) -> String {
    let sys = &model.sys;
    let mut out = String::new();
    let outcome = match graph.outcome() {
        Outcome::Valid => "valid",
        Outcome::Partial => "partial (some obligations failed)",
        Outcome::TimedOut => "timed out",
    };
    let _ = writeln!(out, "Proof graph for {} ({})", graph.root().name, sys.name);
    let _ = writeln!(out, "Outcome: {outcome}");
    let _ = writeln!(out, "\nLemmas ({}):", graph.lemmas.len());
    for n in &graph.lemmas {
        let origin = match &n.origin {
            Origin::Safety => "safety".to_string(),
            Origin::Support { lemma, action } => {
                format!("supports {}/{}", graph.lemmas[*lemma].lemma.name, sys.actions[*action].name)
            }
        };
        let _ = writeln!(out, "  {} [{origin}]\n    {}", n.lemma.name, print_lemma(sys, &n.lemma));
    }
    let _ = writeln!(out, "\nAction nodes:");
    for (l, nodes) in graph.actions.iter().enumerate() {
        for (a, n) in nodes.iter().enumerate() {
            let status = match n.status {
                ActionStatus::Proven if n.self_inductive => "self-inductive".to_string(),
                ActionStatus::Proven => "proven".to_string(),
                ActionStatus::Unproven => "unproven".to_string(),
                ActionStatus::Failed { reason } => format!("FAILED ({reason:?})"),
            };
            let checked = n.checked.map(|c| format!(" by {c}")).unwrap_or_default();
            let support: Vec<&str> =
                graph.support(l, a).into_iter().map(|s| graph.lemmas[s].lemma.name.as_str()).collect();
            let _ = write!(
                out,
                "  {} / {}: {status}{checked}, slice {{{}}}",
                graph.lemmas[l].lemma.name,
                sys.actions[a].name,
                sys.var_names(&n.slice.vars).join(", ")
            );
            if let Some(st) = &n.stats {
                let _ = write!(out, ", |R| {}, CTIs {}", st.projected_states, st.ctis_initial);
            }
            if !support.is_empty() {
                let _ = write!(out, ", support {}", support.join(", "));
            }
            out.push('\n');
        }
    }
    if !graph.failed.is_empty() {
        let _ = writeln!(out, "\nFailed obligations ({}):", graph.failed.len());
        for &(l, a) in &graph.failed {
            let n = &graph.actions[l][a];
            let _ = writeln!(out, "  {} / {}", graph.lemmas[l].lemma.name, sys.actions[a].name);
            let _ = writeln!(out, "    slice: {{{}}}", sys.var_names(&n.slice.vars).join(", "));
            if let Some(st) = &n.stats {
                let _ = writeln!(out, "    sliced grammar: {} predicates", st.grammar_preds);
                let _ = writeln!(out, "    projected reachable states: {}", st.projected_states);
                let _ = writeln!(
                    out,
                    "    candidates: {} generated, {} invariant, {} distinct",
                    st.candidates.generated, st.candidates.invariant, st.candidates.distinct
                );
                if !st.partial_support.is_empty() {
                    let _ = writeln!(out, "    partial support:");
                    for s in &st.partial_support {
                        let _ = writeln!(out, "      {s}");
                    }
                }
                if !st.surviving.is_empty() {
                    let _ = writeln!(out, "    surviving counterexamples (up to 5):");
                    for c in &st.surviving {
                        let _ = writeln!(out, "      {c}");
                    }
                }
            }
        }
    }
    out
}
