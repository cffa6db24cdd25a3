mod common;

use std::collections::HashSet;

use common::oracle::{ScParams, Sc};
use common::{load, read};
use proofslice::model::{Ctx, Lemma, Model, State, Value};
use proofslice::parser::{parse_formula, parse_instance, parse_spec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn formula(m: &Model, text: &str) -> Lemma {
    Lemma::from_expr("F", parse_formula(text, &m.sys).unwrap())
}

fn action(m: &Model, name: &str) -> usize {
    m.sys.action_index(name).unwrap()
}

fn atom(m: &Model, sort: &str, i: u16) -> Value {
    Value::Atom(m.sys.sort_index(sort).unwrap(), i)
}

fn random_state(m: &Model, rng: &mut ChaCha8Rng) -> State {
    State((0..m.sys.vars.len()).map(|v| m.var_domain(v).sample(rng)).collect())
}

#[test]
fn evaluation_examples() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let init = &m.initial_states().unwrap()[0];
    assert!(!m.holds(&formula(&m, "exists a in Node : leader[a]"), init).unwrap());
    assert!(m.holds(&formula(&m, "forall x in Node : x = x"), init).unwrap());

    let p = ScParams::new(3, 2);
    let one_msg = Sc { vote_msg: 1 << 3, ..p.init() };
    let s = p.to_state(&m, &one_msg);
    // Evaluate the membership with the bound names supplied directly.
    let member = formula(&m, "forall a, b in Node : <<a, b>> in voteMsg");
    let ctx = Ctx::new(&s);
    let (n1, n2) = (atom(&m, "Node", 0), atom(&m, "Node", 1));
    assert!(m.eval_bool(&member.body, &ctx, &mut vec![n2.clone(), n1.clone()]).unwrap());
    assert!(!m.eval_bool(&member.body, &ctx, &mut vec![n1, n2]).unwrap());
}

#[test]
fn action_examples() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let p = ScParams::new(3, 2);
    let init = m.initial_states().unwrap().remove(0);
    let (n1, n2) = (atom(&m, "Node", 0), atom(&m, "Node", 1));

    let decide = m.apply_action(&init, action(&m, "Decide"), &[n1.clone(), atom(&m, "Value", 0)]);
    assert_eq!(decide.unwrap(), None);

    let sent = m.apply_action(&init, action(&m, "SendRequestVote"), &[n1.clone(), n2.clone()]);
    let want = Sc { vote_request: 1 << 1, ..p.init() };
    assert_eq!(sent.unwrap(), Some(p.to_state(&m, &want)));

    let mut pre = p.init();
    pre.votes[0] = 0b011;
    let q = Value::set_from(vec![n1.clone(), n2]);
    let post = m
        .apply_action(&p.to_state(&m, &pre), action(&m, "BecomeLeader"), &[n1, q])
        .unwrap()
        .unwrap();
    assert_eq!(post, p.to_state(&m, &Sc { leader: 1, ..pre }));
}

#[test]
fn successors_match_native_enumeration() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let p = ScParams::new(3, 2);
    let init = m.initial_states().unwrap().remove(0);
    let succ = m.successors(&init).unwrap();
    assert_eq!(succ.len(), p.successors(&p.init()).len());
    assert!(succ.iter().all(|t| t.action == action(&m, "SendRequestVote")));
    assert_eq!(m.successors(&init).unwrap(), succ);

    // Deadlock: every guard false.
    let sys = parse_spec(
        "protocol Stuck\nvar x : bool;\ninit { x = false; }\naction A() { require x; x' = false; }\n",
    )
    .unwrap();
    let stuck = Model::new(sys.clone(), parse_instance("", &sys).unwrap()).unwrap();
    let s = stuck.initial_states().unwrap().remove(0);
    assert!(stuck.successors(&s).unwrap().is_empty());
}

#[test]
fn transitions_round_trip() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let s = random_state(&m, &mut rng);
        for t in m.successors(&s).unwrap() {
            let a = &m.sys.actions[t.action];
            let ctx = Ctx::new(&s);
            let mut env = t.binding.clone();
            assert!(m.eval_bool(&a.pre, &ctx, &mut env).unwrap());
            for (v, up) in a.updates.iter().enumerate() {
                let want = match up {
                    None => s.0[v].clone(),
                    Some(e) => {
                        let mut env = t.binding.clone();
                        m.eval(e, &ctx, &mut env).unwrap().into_owned()
                    }
                };
                assert_eq!(t.next.0[v], want);
            }
        }
    }
}

#[test]
fn identity_action_returns_its_input() {
    let sys = parse_spec(&format!(
        "{}\naction Idle() {{ require true; unchanged voteRequestMsg, voted, voteMsg, votes, leader, decided; }}\n",
        read("simple_consensus.gap").split("lemma").next().unwrap()
    ))
    .unwrap();
    let inst = parse_instance(&read("n3v2.inst"), &sys).unwrap();
    let m = Model::new(sys, inst).unwrap();
    let idle = action(&m, "Idle");
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let s = random_state(&m, &mut rng);
        assert_eq!(m.apply_action(&s, idle, &[]).unwrap(), Some(s));
    }
}

#[test]
fn encoding_is_canonical() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let p = ScParams::new(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut by_enc = std::collections::HashMap::new();
    for _ in 0..5000 {
        let i = rng.gen_range(0..p.state_count());
        let s = p.to_state(&m, &p.state_at(i));
        let enc = s.encode();
        assert_eq!(State::decode(&enc).unwrap(), s);
        if let Some(prev) = by_enc.insert(enc, i) {
            assert_eq!(prev, i);
        }
    }
    let distinct: HashSet<u64> = by_enc.values().copied().collect();
    assert_eq!(distinct.len(), by_enc.len());
}

#[test]
fn type_state_space_sizes() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let size = |name: &str| m.var_domain(m.sys.var_index(name).unwrap()).size().get();
    assert_eq!(size("leader"), Some(8));
    assert_eq!(size("voteMsg"), Some(512));
    let m2 = load("simple_consensus.gap", "n2v2.inst");
    assert_eq!(m2.type_state_space_size().get(), Some(ScParams::new(2, 2).state_count()));
    assert_eq!(m2.type_state_space_size().get(), Some(1_048_576));
}

#[test]
fn out_of_range_update_is_an_error() {
    let sys = parse_spec(
        "protocol Count\nvar x : int 0..2;\ninit { x = 2; }\naction Inc() { require true; x' = x + 1; }\n",
    )
    .unwrap();
    let m = Model::new(sys.clone(), parse_instance("", &sys).unwrap()).unwrap();
    let s = m.initial_states().unwrap().remove(0);
    let err = m.apply_action(&s, 0, &[]).unwrap_err();
    assert!(err.to_string().contains("range"), "{err}");
}
