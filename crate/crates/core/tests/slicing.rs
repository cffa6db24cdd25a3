mod common;

use std::collections::BTreeSet;

use common::{lemma, load, vars};
use proofslice::model::Model;
use proofslice::parser::parse_formula;
use proofslice::slicing::{coi, slice, vars_of};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn action(m: &Model, name: &str) -> usize {
    m.sys.action_index(name).unwrap()
}

#[test]
fn footprints() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    assert_eq!(lemma(&m, "NoConflictingValues").vars(), vars(&m, &["decided"]));
    let f = |text: &str| vars_of(&parse_formula(text, &m.sys).unwrap());
    assert_eq!(f("forall i, j in Node : i = j"), BTreeSet::new());
    assert_eq!(f("forall n in Node, Q in Quorum : Q subseteq votes[n]"), vars(&m, &["votes"]));
}

#[test]
fn cones_of_influence() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let decide = &m.sys.actions[action(&m, "Decide")];
    assert_eq!(coi(decide, m.sys.var_index("decided").unwrap()), vars(&m, &["decided"]));
    // Unlisted variables keep their value.
    assert_eq!(coi(decide, m.sys.var_index("votes").unwrap()), vars(&m, &["votes"]));
    let send = &m.sys.actions[action(&m, "SendVote")];
    assert_eq!(coi(send, m.sys.var_index("voteMsg").unwrap()), vars(&m, &["voteMsg"]));
}

#[test]
fn reported_slices() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let cases: [(&str, &str, &[&str]); 4] = [
        ("NoConflictingValues", "Decide", &["leader", "decided"]),
        ("UniqueLeaders", "BecomeLeader", &["leader", "votes"]),
        ("NodesVoteOnce", "RecvVote", &["voteMsg", "votes"]),
        ("VoteMsgsUnique", "SendVote", &["voteMsg", "voteRequestMsg", "voted"]),
    ];
    for (l, a, want) in cases {
        let s = slice(&lemma(&m, l), &m.sys.actions[action(&m, a)]);
        assert_eq!(s.vars, vars(&m, want), "{l}/{a}");
    }
}

#[test]
fn slice_covers_lemma_and_guard() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    for l in &m.sys.lemmas {
        for a in &m.sys.actions {
            let s = slice(l, a);
            assert!(s.vars.is_superset(&l.vars()));
            assert!(s.vars.is_superset(&vars_of(&a.pre)));
            assert_eq!(slice(l, a), s);
        }
    }
}

/// Perturbing every variable outside the cone of influence of `x` (and the
/// guard's variables, so the same binding stays enabled) never changes `x'`.
fn perturbation_trials(m: &Model, trials: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.sys.vars.len();
    let random_state = |rng: &mut ChaCha8Rng| {
        let mut s = m.default_state();
        for v in 0..n {
            s.0[v] = m.var_domain(v).sample(rng);
        }
        s
    };
    for (a, act) in m.sys.actions.iter().enumerate() {
        let guard = vars_of(&act.pre);
        let mut done = 0;
        let mut attempts = 0;
        while done < trials {
            attempts += 1;
            assert!(attempts < 200 * trials, "{} is rarely enabled", act.name);
            let s1 = random_state(&mut rng);
            let enabled: Vec<usize> = (0..m.bindings(a).len())
                .filter(|&b| m.apply_action(&s1, a, &m.bindings(a)[b]).unwrap().is_some())
                .collect();
            if enabled.is_empty() {
                continue;
            }
            let b = &m.bindings(a)[enabled[rng.gen_range(0..enabled.len())]];
            let x = rng.gen_range(0..n);
            let keep: BTreeSet<usize> = coi(act, x).union(&guard).copied().collect();
            let mut s2 = s1.clone();
            for v in (0..n).filter(|v| !keep.contains(v)) {
                s2.0[v] = m.var_domain(v).sample(&mut rng);
            }
            let t1 = m.apply_action(&s1, a, b).unwrap().unwrap();
            let t2 = m.apply_action(&s2, a, b).unwrap().expect("guard variables unchanged");
            assert_eq!(t1.0[x], t2.0[x], "{} / {}", act.name, m.sys.vars[x].name);
            done += 1;
        }
    }
}

#[test]
fn cone_of_influence_survives_perturbation() {
    perturbation_trials(&load("simple_consensus.gap", "n3v2.inst"), 1000, 1);
    perturbation_trials(&load("two_phase.gap", "rm3.inst"), 1000, 2);
}
