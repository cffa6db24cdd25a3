//! Reachable-state exploration, state sets and their on-disk cache.

pub mod cache;
mod explore;
mod stateset;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

pub use cache::{CacheError, CacheKey};
pub use explore::{explore, ExploreMode};
pub use stateset::{Provenance, StateSet};

use crate::model::Model;
use crate::parser::{print_instance, print_system};

/// Content hash of the canonical rendering of the specification.
pub fn spec_hash(model: &Model) -> [u8; 32] {
    Sha256::digest(print_system(&model.sys).as_bytes()).into()
}

/// Content hash of the canonical rendering of the instance.
pub fn instance_hash(model: &Model) -> [u8; 32] {
    Sha256::digest(print_instance(&model.sys, &model.inst).as_bytes()).into()
}

pub fn cache_key(model: &Model) -> CacheKey {
    CacheKey { spec: spec_hash(model), instance: instance_hash(model) }
}

/// The reachable set together with memoized projections onto variable
/// subsets.
pub struct Reachable {
    full: Arc<StateSet>,
    projections: Mutex<HashMap<BTreeSet<usize>, Arc<StateSet>>>,
}

impl Reachable {
    pub fn new(full: StateSet) -> Reachable {
        assert!(full.is_full(), "reachable set must cover every variable");
        Reachable { full: Arc::new(full), projections: Mutex::new(HashMap::new()) }
    }

    pub fn full(&self) -> &Arc<StateSet> {
        &self.full
    }

    pub fn len(&self) -> usize {
        self.full.len()
    }

    pub fn is_empty(&self) -> bool {
        self.full.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.full.provenance
    }

    /// Projection onto `vars`, computed on first use.
    pub fn project(&self, vars: &BTreeSet<usize>) -> Arc<StateSet> {
        if vars.len() == self.full.width() {
            return self.full.clone();
        }
        if let Some(p) = self.projections.lock().unwrap().get(vars) {
            return p.clone();
        }
        // Computed outside the lock; a concurrent duplicate is harmless.
        let p = Arc::new(self.full.project(vars));
        self.projections
            .lock()
            .unwrap()
            .entry(vars.clone())
            .or_insert(p)
            .clone()
    }

    /// Number of projections currently memoized.
    pub fn cached_projections(&self) -> usize {
        self.projections.lock().unwrap().len()
    }
}
