use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cti::{generate_ctis, has_cti, CheckedBy, CtiConfig, Obligation};
use crate::model::{EvalError, Expr, ExprKind, Lemma, Model};

use super::{GraphError, ProofGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeVerdict {
    pub lemma: String,
    pub action: String,
    pub valid: bool,
    pub checked: CheckedBy,
    pub support: Vec<String>,
    /// A counterexample, when the node is not valid.
    pub example: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphReport {
    pub nodes: Vec<NodeVerdict>,
    /// Lemmas some initial state violates.
    pub initiation_failures: Vec<String>,
    pub valid: bool,
}

impl GraphReport {
    pub fn invalid_nodes(&self) -> impl Iterator<Item = &NodeVerdict> {
        self.nodes.iter().filter(|n| !n.valid)
    }
}

/// Re-verifies every action node against its support edges, and initiation
/// for every lemma, independently of the statuses recorded in the graph.
pub fn check_graph_validity(
    graph: &ProofGraph,
    model: &Model,
    cfg: &CtiConfig,
) -> Result<GraphReport, EvalError> {
    let inits = model.initial_states()?;
    let mut initiation_failures = Vec::new();
    for n in &graph.lemmas {
        for s in &inits {
            if !model.holds(&n.lemma, s)? {
                initiation_failures.push(n.lemma.name.clone());
                break;
            }
        }
    }
    let mut nodes = Vec::new();
    for (l, node) in graph.lemmas.iter().enumerate() {
        for a in 0..model.sys.actions.len() {
            let support = graph.support_lemmas(l, a);
            let ob = Obligation { lemma: &node.lemma, action: a, support: &support };
            let (found, checked) = has_cti(model, &ob, cfg)?;
            let example = if found {
                let one = CtiConfig { max_ctis: 1, ..*cfg };
                generate_ctis(model, &ob, &one)?.ctis.first().map(|c| {
                    format!(
                        "{}\n  --{}-->\n{}",
                        model.fmt_state(&c.pre),
                        model.fmt_binding(c.action, &c.binding),
                        model.fmt_state(&c.post)
                    )
                })
            } else {
                None
            };
            nodes.push(NodeVerdict {
                lemma: node.lemma.name.clone(),
                action: model.sys.actions[a].name.clone(),
                valid: !found,
                checked,
                support: support.iter().map(|s| s.name.clone()).collect(),
                example,
            });
        }
    }
    let valid = initiation_failures.is_empty() && nodes.iter().all(|n| n.valid);
    Ok(GraphReport { nodes, initiation_failures, valid })
}

/// The conjunction of all lemma nodes of a valid graph.
pub fn extract_invariant(graph: &ProofGraph) -> Result<Lemma, GraphError> {
    if !graph.is_valid() {
        return Err(GraphError::NotValid);
    }
    if graph.lemmas.len() == 1 {
        return Ok(graph.root().clone());
    }
    let parts: Vec<Expr> = graph.lemmas.iter().map(|n| n.lemma.to_expr()).collect();
    Ok(Lemma {
        name: "Ind".into(),
        prefix: Vec::new(),
        body: Expr::new(ExprKind::And(parts)),
    })
}

/// Whether two lemmas agree on every type-correct state of the instance.
///
/// Only the variables either lemma mentions matter. A random sample is
/// compared first; if it agrees and the subspace over those variables has at
/// most `limit` states, every one of them is compared. Larger subspaces are
/// judged by the sample alone.
pub fn equivalent(model: &Model, a: &Lemma, b: &Lemma, limit: u64, seed: u64) -> Result<bool, EvalError> {
    let mut vars: Vec<usize> = a.vars().union(&b.vars()).copied().collect();
    vars.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = model.default_state();
    for _ in 0..256 {
        let mut s = base.clone();
        for &v in &vars {
            s.0[v] = model.var_domain(v).sample(&mut rng);
        }
        if model.holds(a, &s)? != model.holds(b, &s)? {
            return Ok(false);
        }
    }
    let size = model.subspace_size(&vars);
    match size.get() {
        Some(n) if n <= limit => {
            let differs = (0..n).into_par_iter().map(|i| -> Result<bool, EvalError> {
                let s = model.subspace_state(&vars, i as u128);
                Ok(model.holds(a, &s)? != model.holds(b, &s)?)
            });
            let found = differs.find_any(|r| !matches!(r, Ok(false)));
            match found {
                Some(Err(e)) => Err(e),
                Some(Ok(_)) => Ok(false),
                None => Ok(true),
            }
        }
        _ => Ok(true),
    }
}
