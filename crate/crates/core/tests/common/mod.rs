#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeSet;
use std::path::PathBuf;

use proofslice::model::{Lemma, Model};
use proofslice::parser::{parse_grammar, parse_instance, parse_spec, Grammar};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(models_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn load(spec: &str, inst: &str) -> Model {
    let sys = parse_spec(&read(spec)).unwrap();
    let inst = parse_instance(&read(inst), &sys).unwrap();
    Model::new(sys, inst).unwrap()
}

pub fn grammar(model: &Model, name: &str) -> Grammar {
    parse_grammar(&read(name), &model.sys).unwrap()
}

pub fn lemma(model: &Model, name: &str) -> Lemma {
    model.sys.lemma(name).unwrap_or_else(|| panic!("no lemma {name}")).clone()
}

pub fn vars(model: &Model, names: &[&str]) -> BTreeSet<usize> {
    names.iter().map(|n| model.sys.var_index(n).unwrap()).collect()
}

/// The conjunction shipped in the SimpleConsensus spec as a known inductive
/// strengthening of the safety property.
pub const SIMPLE_CONSENSUS_IND: [&str; 8] = [
    "NoConflictingValues",
    "UniqueLeaders",
    "LeaderHasQuorum",
    "LeadersDecide",
    "NodesVoteOnce",
    "VoteRecordedImpliesVoteMsg",
    "VoteMsgsUnique",
    "VoteMsgImpliesNodeVoted",
];
