use std::collections::BTreeSet;
use std::path::PathBuf;

use proofslice::model::Model;
use proofslice::parser::{parse_instance, parse_spec};
use proofslice::reach::{cache, cache_key, explore, ExploreMode, Provenance, Reachable};

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(spec: &str, inst: &str) -> Model {
    let dir = models_dir();
    let sys = parse_spec(&std::fs::read_to_string(dir.join(spec)).unwrap()).unwrap();
    let inst = parse_instance(&std::fs::read_to_string(dir.join(inst)).unwrap(), &sys).unwrap();
    Model::new(sys, inst).unwrap()
}

fn vars(m: &Model, names: &[&str]) -> BTreeSet<usize> {
    names.iter().map(|n| m.sys.var_index(n).unwrap()).collect()
}

#[test]
fn simple_consensus_reachable_counts() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let r = explore(&m, ExploreMode::Exhaustive { max_states: 10_000_000 }).unwrap();
    assert_eq!(r.provenance, Provenance::Exhaustive);
    assert_eq!(r.len(), 110_464);
    let reach = Reachable::new(r);
    assert_eq!(reach.project(&vars(&m, &["leader", "decided"])).len(), 10);
    assert_eq!(reach.project(&vars(&m, &["leader", "votes"])).len(), 94);
    assert_eq!(reach.project(&vars(&m, &["voteMsg", "votes"])).len(), 343);
    assert_eq!(reach.project(&vars(&m, &["voteMsg", "voteRequestMsg", "voted"])).len(), 16_128);
}

#[test]
fn cache_round_trip_and_corruption() {
    let m = load("simple_consensus.gap", "n2v2.inst");
    let r = explore(&m, ExploreMode::Exhaustive { max_states: 1_000_000 }).unwrap();
    let key = cache_key(&m);
    let dir = tempfile::tempdir().unwrap();
    let path = key.path(dir.path(), None);
    cache::save(&r, &m.sys, &key, &path).unwrap();
    let back = cache::load(&path, &m.sys, &key).unwrap();
    assert_eq!(back, r);

    let p = r.project(&vars(&m, &["votes"]));
    let bytes = cache::to_bytes(&p, &m.sys, &key);
    assert_eq!(cache::from_bytes(&bytes, &m.sys, &key).unwrap(), p);

    let mut bad = bytes.clone();
    let mid = bad.len() / 2;
    bad[mid] ^= 1;
    assert!(matches!(cache::from_bytes(&bad, &m.sys, &key), Err(cache::CacheError::Checksum)));
    assert!(matches!(
        cache::from_bytes(&bytes[..bytes.len() - 5], &m.sys, &key),
        Err(cache::CacheError::Checksum)
    ));
    assert!(matches!(cache::from_bytes(b"XXXXX", &m.sys, &key), Err(cache::CacheError::Version)));
    let other = load("simple_consensus.gap", "n3v2.inst");
    assert!(matches!(
        cache::from_bytes(&bytes, &other.sys, &cache_key(&other)),
        Err(cache::CacheError::Hash)
    ));
}

#[test]
fn sampling_is_a_deterministic_subset() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let a = explore(&m, ExploreMode::Sampled { budget: 2000, seed: 7 }).unwrap();
    let b = explore(&m, ExploreMode::Sampled { budget: 2000, seed: 7 }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 2000);
    let full = explore(&m, ExploreMode::Exhaustive { max_states: 10_000_000 }).unwrap();
    assert!(a.encodings().all(|e| full.contains_encoding(e)));
}

#[test]
fn truncation_is_reported() {
    let m = load("simple_consensus.gap", "n3v2.inst");
    let r = explore(&m, ExploreMode::Exhaustive { max_states: 500 }).unwrap();
    assert_eq!(r.provenance, Provenance::Truncated { limit: 500 });
    assert_eq!(r.len(), 500);
}
