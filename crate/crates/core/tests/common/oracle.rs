//! Brute-force reference implementations used to check the engine.
//!
//! SimpleConsensus and TwoPhase are re-implemented natively on bitmasks,
//! with their own successor functions and state enumeration, so that counts
//! and inductiveness verdicts do not go through the interpreter, the explorer
//! or the counterexample search. Lemmas are still evaluated by the library's
//! expression evaluator on converted states.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use proofslice::model::{Lemma, Model, State, Value};
use rayon::prelude::*;

/// A SimpleConsensus state over at most four nodes and eight values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sc {
    /// Bit `src * n + dst` set when `<<src, dst>>` is in the set.
    pub vote_request: u16,
    pub voted: u8,
    pub vote_msg: u16,
    pub votes: [u8; 4],
    pub leader: u8,
    pub decided: [u8; 4],
}

#[derive(Clone, Debug)]
pub struct ScParams {
    pub nodes: usize,
    pub values: usize,
    /// Majority quorums as node masks.
    pub quorums: Vec<u8>,
}

impl ScParams {
    pub fn new(nodes: usize, values: usize) -> ScParams {
        assert!(nodes <= 4 && values <= 8);
        let quorums = (0u8..1 << nodes).filter(|q| 2 * q.count_ones() as usize > nodes).collect();
        ScParams { nodes, values, quorums }
    }

    fn pair(&self, src: usize, dst: usize) -> u16 {
        1 << (src * self.nodes + dst)
    }

    pub fn init(&self) -> Sc {
        Sc { vote_request: 0, voted: 0, vote_msg: 0, votes: [0; 4], leader: 0, decided: [0; 4] }
    }

    pub fn successors(&self, s: &Sc) -> Vec<Sc> {
        let n = self.nodes;
        let mut out = Vec::new();
        for src in 0..n {
            for dst in 0..n {
                let mut t = *s;
                t.vote_request |= self.pair(src, dst);
                out.push(t);
            }
        }
        for src in 0..n {
            for dst in 0..n {
                if s.voted & (1 << src) == 0 && s.vote_request & self.pair(dst, src) != 0 {
                    let mut t = *s;
                    t.vote_msg |= self.pair(src, dst);
                    t.voted |= 1 << src;
                    t.vote_request &= !self.pair(src, dst);
                    out.push(t);
                }
            }
        }
        for node in 0..n {
            for sender in 0..n {
                if s.vote_msg & self.pair(sender, node) != 0 {
                    let mut t = *s;
                    t.votes[node] |= 1 << sender;
                    out.push(t);
                }
            }
        }
        for node in 0..n {
            for &q in &self.quorums {
                if q & !s.votes[node] == 0 {
                    let mut t = *s;
                    t.leader |= 1 << node;
                    out.push(t);
                }
            }
        }
        for node in 0..n {
            for v in 0..self.values {
                if s.leader & (1 << node) != 0 && s.decided[node] == 0 {
                    let mut t = *s;
                    t.decided[node] = 1 << v;
                    out.push(t);
                }
            }
        }
        out
    }

    /// Number of type-correct states.
    pub fn state_count(&self) -> u64 {
        let n = self.nodes as u32;
        let bits = 2 * n * n + 2 * n + n * n + self.values as u32 * n;
        1u64 << bits
    }

    /// The `i`-th type-correct state, for `i < state_count()`.
    pub fn state_at(&self, mut i: u64) -> Sc {
        let n = self.nodes;
        let mut take = |bits: usize| {
            let v = i & ((1u64 << bits) - 1);
            i >>= bits;
            v
        };
        let mut s = self.init();
        s.vote_request = take(n * n) as u16;
        s.voted = take(n) as u8;
        s.vote_msg = take(n * n) as u16;
        for k in 0..n {
            s.votes[k] = take(n) as u8;
        }
        s.leader = take(n) as u8;
        for k in 0..n {
            s.decided[k] = take(self.values) as u8;
        }
        s
    }

    pub fn reachable(&self) -> HashSet<Sc> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(self.init());
        queue.push_back(self.init());
        while let Some(s) = queue.pop_front() {
            for t in self.successors(&s) {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// The same state as a value of the parsed model.
    pub fn to_state(&self, model: &Model, s: &Sc) -> State {
        let sys = &model.sys;
        let node = sys.sort_index("Node").expect("Node sort");
        let value = sys.sort_index("Value").expect("Value sort");
        let n = self.nodes;
        let atom = |sort, i: usize| Value::Atom(sort, i as u16);
        let pairs = |mask: u16| {
            let mut out = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    if mask & self.pair(a, b) != 0 {
                        out.push(Value::Tuple(vec![atom(node, a), atom(node, b)]));
                    }
                }
            }
            Value::set_from(out)
        };
        let members = |mask: u8, sort, size: usize| {
            Value::set_from((0..size).filter(|i| mask & (1 << i) != 0).map(|i| atom(sort, i)).collect())
        };
        let flags = |mask: u8| Value::Func((0..n).map(|i| Value::Bool(mask & (1 << i) != 0)).collect());
        let mut st = model.default_state();
        let mut put = |name: &str, v: Value| {
            st.0[sys.var_index(name).expect("declared variable")] = v;
        };
        put("voteRequestMsg", pairs(s.vote_request));
        put("voted", flags(s.voted));
        put("voteMsg", pairs(s.vote_msg));
        put("votes", Value::Func((0..n).map(|k| members(s.votes[k], node, n)).collect()));
        put("leader", flags(s.leader));
        put("decided", Value::Func((0..n).map(|k| members(s.decided[k], value, self.values)).collect()));
        st
    }

    fn holds_all(&self, model: &Model, lemmas: &[Lemma], s: &Sc) -> bool {
        let st = self.to_state(model, s);
        lemmas.iter().all(|l| model.holds(l, &st).expect("lemma evaluates"))
    }

    /// Initiation and consecution of the conjunction of `lemmas` over every
    /// type-correct state. Returns a description of the first violation.
    pub fn check_inductive(&self, model: &Model, lemmas: &[Lemma]) -> Result<(), String> {
        if !self.holds_all(model, lemmas, &self.init()) {
            return Err("initial state violates the invariant".into());
        }
        let bad = (0..self.state_count()).into_par_iter().find_map_first(|i| {
            let s = self.state_at(i);
            if !self.holds_all(model, lemmas, &s) {
                return None;
            }
            self.successors(&s)
                .into_iter()
                .find(|t| !self.holds_all(model, lemmas, t))
                .map(|t| format!("{s:?} -> {t:?}"))
        });
        bad.map_or(Ok(()), Err)
    }

    /// Whether both conjunctions agree on every type-correct state.
    pub fn first_disagreement(&self, model: &Model, a: &[Lemma], b: &[Lemma]) -> Option<Sc> {
        (0..self.state_count()).into_par_iter().find_map_first(|i| {
            let s = self.state_at(i);
            (self.holds_all(model, a, &s) != self.holds_all(model, b, &s)).then_some(s)
        })
    }
}

/// A TwoPhase state over at most eight resource managers. Resource manager
/// states are 0 working, 1 prepared, 2 committed, 3 aborted; the manager is
/// 0 init, 1 committed, 2 aborted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Tp {
    pub rm: [u8; 8],
    pub tm: u8,
    pub tm_prepared: u8,
    pub msgs_prepared: u8,
    pub commit: bool,
    pub abort: bool,
}

pub fn two_phase_reachable(rms: usize) -> usize {
    let all = ((1u16 << rms) - 1) as u8;
    let init = Tp { rm: [0; 8], tm: 0, tm_prepared: 0, msgs_prepared: 0, commit: false, abort: false };
    let mut seen = HashSet::from([init]);
    let mut queue = VecDeque::from([init]);
    while let Some(s) = queue.pop_front() {
        let mut next = Vec::new();
        for r in 0..rms {
            let bit = 1u8 << r;
            if s.tm == 0 && s.msgs_prepared & bit != 0 {
                next.push(Tp { tm_prepared: s.tm_prepared | bit, ..s });
            }
            if s.rm[r] == 0 {
                let mut t = s;
                t.rm[r] = 1;
                t.msgs_prepared |= bit;
                next.push(t);
                let mut t = s;
                t.rm[r] = 3;
                next.push(t);
            }
            if s.commit {
                let mut t = s;
                t.rm[r] = 2;
                next.push(t);
            }
            if s.abort {
                let mut t = s;
                t.rm[r] = 3;
                next.push(t);
            }
        }
        if s.tm == 0 && s.tm_prepared == all {
            next.push(Tp { tm: 1, commit: true, ..s });
        }
        if s.tm == 0 {
            next.push(Tp { tm: 2, abort: true, ..s });
        }
        for t in next {
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen.len()
}

/// Every type-correct state of a small model, by cross product of the
/// variable domains.
pub fn all_states(model: &Model, limit: u64) -> Vec<State> {
    let domains: Vec<Vec<Value>> = (0..model.sys.vars.len())
        .map(|v| model.var_domain(v).values(limit).expect("domain small enough"))
        .collect();
    let total: u64 = domains.iter().map(|d| d.len() as u64).product();
    assert!(total <= limit, "{total} states exceed the oracle limit");
    let mut out = Vec::with_capacity(total as usize);
    let mut idx = vec![0usize; domains.len()];
    loop {
        out.push(State(idx.iter().zip(&domains).map(|(&i, d)| d[i].clone()).collect()));
        let mut k = domains.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Initiation and consecution over every type-correct state, using the
/// interpreter's successor function.
pub fn check_inductive_generic(model: &Model, lemmas: &[Lemma], limit: u64) -> Result<(), String> {
    let holds = |s: &State| lemmas.iter().all(|l| model.holds(l, s).expect("lemma evaluates"));
    for s in model.initial_states().expect("initial states") {
        if !holds(&s) {
            return Err(format!("initial state violates the invariant: {}", model.fmt_state(&s)));
        }
    }
    let states = all_states(model, limit);
    let bad = states.par_iter().find_map_first(|s| {
        if !holds(s) {
            return None;
        }
        model
            .successors(s)
            .expect("successors")
            .into_iter()
            .find(|t| !holds(&t.next))
            .map(|t| format!("{} --{}-->", model.fmt_state(s), model.sys.actions[t.action].name))
    });
    bad.map_or(Ok(()), Err)
}
