mod common;

use common::oracle::{all_states, ScParams};
use common::{lemma, load, SIMPLE_CONSENSUS_IND};
use proofslice::cti::{eliminates, generate_ctis, has_cti, is_cti, CtiConfig, CtiMode, Obligation};
use proofslice::model::{Lemma, Model, Value};
use proofslice::parser::parse_formula;

fn formula(m: &Model, name: &str, text: &str) -> Lemma {
    Lemma::from_expr(name, parse_formula(text, &m.sys).unwrap())
}

fn exhaustive() -> CtiConfig {
    CtiConfig { mode: CtiMode::Exhaustive, ..CtiConfig::default() }
}

/// The three defining properties, checked without `is_cti`.
fn verify(m: &Model, ob: &Obligation, pre: &proofslice::model::State, binding: &[Value], post: &proofslice::model::State) {
    assert!(m.holds(ob.lemma, pre).unwrap());
    for s in ob.support {
        assert!(m.holds(s, pre).unwrap());
    }
    assert_eq!(m.apply_action(pre, ob.action, binding).unwrap().as_ref(), Some(post));
    assert!(!m.holds(ob.lemma, post).unwrap());
}

#[test]
fn two_leader_counterexample() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let p = ScParams::new(2, 2);
    let mut sc = p.init();
    sc.leader = 0b11;
    sc.decided[1] = 0b10;
    let pre = p.to_state(&m, &sc);
    let decide = m.sys.action_index("Decide").unwrap();
    let node = m.sys.sort_index("Node").unwrap();
    let value = m.sys.sort_index("Value").unwrap();
    let binding = vec![Value::Atom(node, 0), Value::Atom(value, 0)];
    let post = m.apply_action(&pre, decide, &binding).unwrap().unwrap();
    let safety = lemma(&m, "NoConflictingValues");
    let ob = Obligation { lemma: &safety, action: decide, support: &[] };
    verify(&m, &ob, &pre, &binding, &post);

    let binding_index = m.bindings(decide).iter().position(|b| *b == binding).unwrap();
    let cti = proofslice::cti::Cti { pre, action: decide, binding_index, binding, post };
    assert!(is_cti(&m, &ob, &cti).unwrap());
    assert!(eliminates(&m, &lemma(&m, "UniqueLeaders"), &cti).unwrap());
    assert!(!eliminates(&m, &formula(&m, "T", "forall n in Node : n = n"), &cti).unwrap());
    assert!(!eliminates(&m, &safety, &cti).unwrap());

    let found = generate_ctis(&m, &ob, &exhaustive()).unwrap();
    assert!(found.ctis.contains(&cti));
}

#[test]
fn generated_ctis_reverify() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let safety = lemma(&m, "NoConflictingValues");
    let unique = lemma(&m, "UniqueLeaders");
    let supports: [&[Lemma]; 2] = [&[], std::slice::from_ref(&unique)];
    for support in supports {
        for a in 0..m.sys.actions.len() {
            let ob = Obligation { lemma: &safety, action: a, support };
            let set = generate_ctis(&m, &ob, &CtiConfig { max_ctis: 500, ..exhaustive() }).unwrap();
            assert!(set.checked.is_exhaustive());
            assert!(set.ctis.len() <= 500);
            for c in &set.ctis {
                assert!(is_cti(&m, &ob, c).unwrap());
                assert_eq!(&m.bindings(a)[c.binding_index], &c.binding);
                verify(&m, &ob, &c.pre, &c.binding, &c.post);
            }
        }
    }
}

#[test]
fn inductive_strengthening_has_no_ctis() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let ind: Vec<Lemma> = SIMPLE_CONSENSUS_IND.iter().map(|n| lemma(&m, n)).collect();
    for (i, l) in ind.iter().enumerate() {
        let rest: Vec<Lemma> = ind.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, l)| l.clone()).collect();
        for a in 0..m.sys.actions.len() {
            let ob = Obligation { lemma: l, action: a, support: &rest };
            let set = generate_ctis(&m, &ob, &exhaustive()).unwrap();
            assert!(set.ctis.is_empty(), "{} / {}", l.name, m.sys.actions[a].name);
            assert!(set.checked.is_exhaustive());
        }
    }
}

#[test]
fn unsatisfiable_guard_gives_nothing() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    // No leader anywhere, so Decide is never enabled.
    let l = formula(&m, "NoLeader", "forall n in Node : ~leader[n]");
    let decide = m.sys.action_index("Decide").unwrap();
    let ob = Obligation { lemma: &l, action: decide, support: &[] };
    assert!(generate_ctis(&m, &ob, &exhaustive()).unwrap().ctis.is_empty());
}

/// Emptiness of the exhaustive search agrees with a direct enumeration of
/// every (state, binding) pair.
#[test]
fn exhaustive_agrees_with_brute_force() {
    let m = load("two_phase.gap", "rm2.inst");
    let states = all_states(&m, 10_000);
    let lemmas = [
        lemma(&m, "Consistent"),
        formula(&m, "A", "forall i in RM : rmState[i] = committed => msgsCommit"),
        formula(&m, "B", "msgsCommit => tmState = tm_committed"),
        formula(&m, "C", "forall i in RM : i in tmPrepared => i in msgsPrepared"),
        formula(&m, "D", "forall i in RM : rmState[i] = aborted => msgsAbort"),
        formula(&m, "E", "~(msgsCommit /\\ msgsAbort)"),
        formula(&m, "F", "forall i in RM : i in msgsPrepared => rmState[i] /= working"),
    ];
    let mut saw = [0usize; 2];
    for l in &lemmas {
        for support in [&lemmas[..0], &lemmas[1..3], &lemmas[1..]] {
            let support: Vec<Lemma> = support.iter().filter(|s| s.name != l.name).cloned().collect();
            for a in 0..m.sys.actions.len() {
                let ob = Obligation { lemma: l, action: a, support: &support };
                let brute = states.iter().any(|s| {
                    m.holds(l, s).unwrap()
                        && support.iter().all(|x| m.holds(x, s).unwrap())
                        && m.bindings(a).iter().any(|b| {
                            m.apply_action(s, a, b)
                                .unwrap()
                                .is_some_and(|t| !m.holds(l, &t).unwrap())
                        })
                });
                let (found, checked) = has_cti(&m, &ob, &exhaustive()).unwrap();
                assert!(checked.is_exhaustive());
                assert_eq!(found, brute, "{} / {}", l.name, m.sys.actions[a].name);
                assert_eq!(!generate_ctis(&m, &ob, &exhaustive()).unwrap().ctis.is_empty(), brute);
                saw[brute as usize] += 1;
            }
        }
    }
    assert!(saw[0] > 0 && saw[1] > 0, "{saw:?}");
}

#[test]
fn randomized_mode_is_reproducible() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let safety = lemma(&m, "NoConflictingValues");
    let decide = m.sys.action_index("Decide").unwrap();
    let ob = Obligation { lemma: &safety, action: decide, support: &[] };
    let cfg = CtiConfig { mode: CtiMode::Randomized, samples: 20_000, max_ctis: 50, seed: 9, ..CtiConfig::default() };
    let a = generate_ctis(&m, &ob, &cfg).unwrap();
    let b = generate_ctis(&m, &ob, &cfg).unwrap();
    assert!(!a.checked.is_exhaustive());
    assert!(!a.ctis.is_empty());
    assert_eq!(a.ctis, b.ctis);
    assert_eq!(a.found, b.found);
    for c in &a.ctis {
        assert!(is_cti(&m, &ob, c).unwrap());
    }
    // The sliced subspace is small enough for the samples to cover it.
    let all = generate_ctis(&m, &ob, &CtiConfig { max_ctis: 50, ..exhaustive() }).unwrap();
    assert_eq!(a.found, all.found);
}

#[test]
fn exhaustive_results_do_not_depend_on_worker_count() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let safety = lemma(&m, "NoConflictingValues");
    let ob = Obligation { lemma: &safety, action: m.sys.action_index("Decide").unwrap(), support: &[] };
    let cfg = CtiConfig { max_ctis: 7, ..exhaustive() };
    let base = generate_ctis(&m, &ob, &cfg).unwrap();
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let other = pool.install(|| generate_ctis(&m, &ob, &cfg).unwrap());
        assert_eq!(other.ctis, base.ctis);
        assert_eq!(other.found, base.found);
    }
}
