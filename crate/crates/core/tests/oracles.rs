//! Cross-checks between the engine and the native reference models.

mod common;

use std::collections::HashSet;

use common::oracle::{two_phase_reachable, ScParams};
use common::{lemma, load, SIMPLE_CONSENSUS_IND};
use proofslice::reach::{explore, ExploreMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn native_simple_consensus_matches_explorer() {
    for (inst, n, v) in [("n2v2.inst", 2, 2), ("n3v2.inst", 3, 2)] {
        let m = load("simple_consensus.gap", inst);
        let p = ScParams::new(n, v);
        let native = p.reachable();
        let set = explore(&m, ExploreMode::Exhaustive { max_states: 10_000_000 }).unwrap();
        assert_eq!(set.len(), native.len(), "{inst}");
        // Same states, not just the same count.
        for s in native.iter().take(2000) {
            assert!(set.contains(&p.to_state(&m, s)));
        }
    }
}

#[test]
fn native_simple_consensus_n3v2_count() {
    assert_eq!(ScParams::new(3, 2).reachable().len(), 110_464);
}

#[test]
fn native_successors_match_interpreter() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let p = ScParams::new(2, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let s = p.state_at(rng.gen_range(0..p.state_count()));
        let native: HashSet<Vec<u8>> =
            p.successors(&s).iter().map(|t| p.to_state(&m, t).encode()).collect();
        let interp: HashSet<Vec<u8>> = m
            .successors(&p.to_state(&m, &s))
            .unwrap()
            .iter()
            .map(|t| t.next.encode())
            .collect();
        assert_eq!(native, interp);
    }
}

#[test]
fn two_phase_counts_match_explorer() {
    for rms in 2..=4 {
        let m = load("two_phase.gap", &format!("rm{rms}.inst"));
        let set = explore(&m, ExploreMode::Exhaustive { max_states: 1_000_000 }).unwrap();
        assert_eq!(set.len(), two_phase_reachable(rms), "rm{rms}");
    }
}

#[test]
fn shipped_strengthening_is_inductive_at_n2v2() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let ind: Vec<_> = SIMPLE_CONSENSUS_IND.iter().map(|n| lemma(&m, n)).collect();
    ScParams::new(2, 2).check_inductive(&m, &ind).unwrap();
    // The safety property alone is not.
    assert!(ScParams::new(2, 2).check_inductive(&m, &ind[..1]).is_err());
}
