mod common;

use common::oracle::{check_inductive_generic, ScParams};
use common::{grammar, lemma, load, models_dir};
use proofslice::cti::{has_cti, CtiConfig, CtiMode, Obligation};
use proofslice::graph::{
    check_graph_validity, do_ind_proof_slice, extract_invariant, from_json, to_dot, to_json, to_report,
    ActionStatus, GraphError, InferenceConfig, Origin, Outcome, ProofGraph,
};
use proofslice::model::{Lemma, Model};
use proofslice::parser::parse_formula;
use proofslice::reach::{explore, ExploreMode, Reachable};

fn reachable(m: &Model) -> Reachable {
    Reachable::new(explore(m, ExploreMode::Exhaustive { max_states: 10_000_000 }).unwrap())
}

fn exhaustive() -> CtiConfig {
    CtiConfig { mode: CtiMode::Exhaustive, ..CtiConfig::default() }
}

fn golden() -> String {
    std::fs::read_to_string(models_dir().join("golden/simple_consensus_n2v2.graph.json")).unwrap()
}

/// The ring's three well-formedness lemmas, each supporting the next.
fn ring_cycle(m: &Model) -> ProofGraph {
    let mut g = ProofGraph::new(m, lemma(m, "WellFormedA"));
    let b = g.add_lemma(m, lemma(m, "WellFormedB"), Origin::Support { lemma: 2, action: 0 }, 2);
    let c = g.add_lemma(m, lemma(m, "WellFormedC"), Origin::Support { lemma: 0, action: 0 }, 1);
    // a' = c, b' = a, c' = b.
    g.edges.insert((c, 0, 0));
    g.edges.insert((0, b, 0));
    g.edges.insert((b, c, 0));
    for nodes in &mut g.actions {
        nodes[0].status = ActionStatus::Proven;
    }
    g
}

#[test]
fn ring_cycle_is_valid() {
    let m = load("ring_counter.gap", "ring.inst");
    assert_eq!(reachable(&m).len(), 3);
    let g = ring_cycle(&m);
    g.assert_well_formed(1);
    let report = check_graph_validity(&g, &m, &exhaustive()).unwrap();
    assert!(report.valid, "{report:?}");
    let inv = extract_invariant(&g).unwrap();
    check_inductive_generic(&m, &[inv], 1000).unwrap();
    // No single lemma is inductive on its own.
    for name in ["WellFormedA", "WellFormedB", "WellFormedC"] {
        assert!(check_inductive_generic(&m, &[lemma(&m, name)], 1000).is_err());
    }

    let mut broken = g.clone();
    broken.edges.remove(&(0, 1, 0));
    let report = check_graph_validity(&broken, &m, &exhaustive()).unwrap();
    assert!(!report.valid);
    let bad: Vec<_> = report.invalid_nodes().map(|n| n.lemma.as_str()).collect();
    assert_eq!(bad, ["WellFormedB"]);
}

#[test]
fn ring_inference_finds_a_cycle() {
    let m = load("ring_counter.gap", "ring.inst");
    let reach = reachable(&m);
    let g = do_ind_proof_slice(&m, &reach, &lemma(&m, "WellFormedA"), &grammar(&m, "ring_counter.grm"), &InferenceConfig::default())
        .unwrap();
    assert_eq!(g.outcome(), Outcome::Valid);
    assert_eq!(g.lemmas.len(), 3);
    // Each lemma is supported by another, and the root is supported too.
    assert_eq!(g.edges.len(), 3);
    assert!(g.edges.iter().any(|&(s, _, _)| s == 0));
    assert!(check_graph_validity(&g, &m, &exhaustive()).unwrap().valid);
    check_inductive_generic(&m, &[extract_invariant(&g).unwrap()], 1000).unwrap();
}

#[test]
fn golden_graph_checks_out() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let text = golden();
    let (g, file) = from_json(&text, &m).unwrap();
    assert_eq!(file.instance_hash, hex(&proofslice::reach::instance_hash(&m)));
    assert_eq!(file.spec_hash, hex(&proofslice::reach::spec_hash(&m)));
    assert!(g.is_valid());
    g.assert_well_formed(m.sys.actions.len());

    let report = check_graph_validity(&g, &m, &exhaustive()).unwrap();
    assert!(report.valid);
    assert!(report.nodes.iter().all(|n| n.checked.is_exhaustive()));
    assert_eq!(report.nodes.len(), g.lemmas.len() * m.sys.actions.len());

    // Inductive by brute force over all type-correct states, and it implies
    // the safety property because the root is one of its conjuncts.
    let inv = extract_invariant(&g).unwrap();
    ScParams::new(2, 2).check_inductive(&m, std::slice::from_ref(&inv)).unwrap();
    assert_eq!(g.lemmas[0].lemma, lemma(&m, "NoConflictingValues"));

    // Byte-identical when written back.
    assert_eq!(to_json(&g, &m, file.config.as_ref(), file.reachable.clone()), text);
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[test]
fn deleting_decide_support_breaks_the_graph() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let (mut g, _) = from_json(&golden(), &m).unwrap();
    let decide = m.sys.action_index("Decide").unwrap();
    let before = g.edges.len();
    g.edges.retain(|&(_, l, a)| !(l == 0 && a == decide));
    assert!(g.edges.len() < before);
    let report = check_graph_validity(&g, &m, &exhaustive()).unwrap();
    assert!(!report.valid);
    let bad: Vec<_> = report.invalid_nodes().collect();
    assert_eq!(bad.len(), 1);
    assert_eq!((bad[0].lemma.as_str(), bad[0].action.as_str()), ("NoConflictingValues", "Decide"));
    assert!(bad[0].example.is_some());
    let example = bad[0].example.as_ref().unwrap();
    assert!(example.contains("leader") && example.contains("Decide"), "{example}");
}

#[test]
fn import_rejects_bad_files() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let text = golden();
    assert!(from_json("{", &m).is_err());
    assert!(from_json(&text.replace("\"version\": 1", "\"version\": 99"), &m).is_err());
    assert!(from_json(&text.replace("proofslice-graph", "other"), &m).is_err());
    assert!(from_json(&text.replace("\"action\": \"Decide\"", "\"action\": \"Nope\""), &m).is_err());
    assert!(from_json(&text.replace("~leader[i]", "~leeder[i]"), &m).is_err());
}

#[test]
fn exports_mention_slices_and_counts() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let (g, _) = from_json(&golden(), &m).unwrap();
    let dot = to_dot(&g, &m, Some(336));
    assert!(dot.starts_with("digraph"));
    assert!(dot.contains("V_slice={leader,decided}"), "{dot}");
    assert!(dot.contains("/336"));
    let report = to_report(&g, &m);
    assert!(report.contains("valid"));
    assert!(report.contains("NoConflictingValues"));
}

#[test]
fn extraction_is_refused_for_partial_graphs() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let g = ProofGraph::new(&m, lemma(&m, "NoConflictingValues"));
    assert!(matches!(extract_invariant(&g), Err(GraphError::NotValid)));
    let (mut g, _) = from_json(&golden(), &m).unwrap();
    assert!(matches!(g.pick_node(), Err(GraphError::NothingToPick)));
    g.actions[1][0].status = ActionStatus::Failed { reason: proofslice::graph::FailReason::NoCandidate };
    g.failed.push((1, 0));
    assert_eq!(g.outcome(), Outcome::Partial);
    assert!(matches!(extract_invariant(&g), Err(GraphError::NotValid)));
}

#[test]
fn single_node_graphs() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let reach = reachable(&m);
    let truth = Lemma::from_expr("Trivial", parse_formula("forall n in Node : n = n", &m.sys).unwrap());
    let g = do_ind_proof_slice(&m, &reach, &truth, &grammar(&m, "simple_consensus.grm"), &InferenceConfig::default())
        .unwrap();
    assert_eq!(g.lemmas.len(), 1);
    assert!(g.edges.is_empty());
    assert!(g.actions[0].iter().all(|n| n.status == ActionStatus::Proven && n.self_inductive));
    assert_eq!(extract_invariant(&g).unwrap(), truth);
}

#[test]
fn only_decide_threatens_safety() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let safety = lemma(&m, "NoConflictingValues");
    for (a, act) in m.sys.actions.iter().enumerate() {
        let ob = Obligation { lemma: &safety, action: a, support: &[] };
        let (found, _) = has_cti(&m, &ob, &CtiConfig::default()).unwrap();
        assert_eq!(found, act.name == "Decide", "{}", act.name);
    }
    let mut g = ProofGraph::new(&m, safety);
    let decide = m.sys.action_index("Decide").unwrap();
    for (a, n) in g.actions[0].iter_mut().enumerate() {
        if a != decide {
            n.status = ActionStatus::Proven;
        }
    }
    assert_eq!(g.pick_node().unwrap(), (0, decide));
    // Ties at equal depth go to the earlier action.
    g.actions[0][0].status = ActionStatus::Unproven;
    assert_eq!(g.pick_node().unwrap(), (0, 0));
}

fn two_phase_run(m: &Model, reach: &Reachable) -> ProofGraph {
    do_ind_proof_slice(m, reach, &lemma(m, "Consistent"), &grammar(m, "two_phase.grm"), &InferenceConfig::default())
        .unwrap()
}

#[test]
fn two_phase_inference() {
    let m = load("two_phase.gap", "rm3.inst");
    let reach = reachable(&m);
    assert_eq!(reach.len(), 288);
    let g = two_phase_run(&m, &reach);
    assert_eq!(g.outcome(), Outcome::Valid);
    g.assert_well_formed(m.sys.actions.len());
    assert!(check_graph_validity(&g, &m, &exhaustive()).unwrap().valid);
    let inv = extract_invariant(&g).unwrap();
    check_inductive_generic(&m, &[inv], 100_000).unwrap();

    let again = two_phase_run(&m, &reach);
    assert_eq!(to_json(&again, &m, None, None), to_json(&g, &m, None, None));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
    let other = pool.install(|| two_phase_run(&m, &reach));
    assert_eq!(to_json(&other, &m, None, None), to_json(&g, &m, None, None));
}

#[test]
fn zero_global_timeout() {
    let m = load("two_phase.gap", "rm2.inst");
    let reach = reachable(&m);
    let cfg = InferenceConfig { global_timeout_secs: 0, ..InferenceConfig::default() };
    let g = do_ind_proof_slice(&m, &reach, &lemma(&m, "Consistent"), &grammar(&m, "two_phase.grm"), &cfg).unwrap();
    assert_eq!(g.outcome(), Outcome::TimedOut);
    assert_eq!(g.lemmas.len(), 1);
    assert_eq!(g.failed.len(), m.sys.actions.len());
}
