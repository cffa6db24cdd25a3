use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use proofslice::model::{Lemma, Model};
use proofslice::parser::{parse_grammar, parse_instance, parse_spec, Grammar, ParseError};
use proofslice::reach::{self, cache, CacheError, ExploreMode, Provenance, StateSet};
use sha2::{Digest, Sha256};

use crate::Failure;

/// A loaded specification plus instance, with the raw file hashes kept for
/// the run manifest.
pub struct Inputs {
    pub model: Model,
    pub files: Vec<(PathBuf, String)>,
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::Input)
}

fn diagnostics(e: ParseError, path: &Path) -> Failure {
    let e = e.in_file(&path.display().to_string());
    let lines: Vec<String> = e.diagnostics.iter().map(ToString::to_string).collect();
    Failure::Input(anyhow!("{}", lines.join("\n")))
}

fn file_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn load(spec: &Path, inst: &Path) -> Result<Inputs, Failure> {
    let spec_text = read(spec)?;
    let inst_text = read(inst)?;
    let sys = parse_spec(&spec_text).map_err(|e| diagnostics(e, spec))?;
    let instance = parse_instance(&inst_text, &sys).map_err(|e| diagnostics(e, inst))?;
    let model = Model::new(sys, instance)
        .map_err(|e| Failure::Input(anyhow!("{}: {e}", inst.display())))?;
    Ok(Inputs {
        model,
        files: vec![(spec.into(), file_hash(&spec_text)), (inst.into(), file_hash(&inst_text))],
    })
}

pub fn load_grammar(inputs: &mut Inputs, path: &Path) -> Result<Grammar, Failure> {
    let text = read(path)?;
    let g = parse_grammar(&text, &inputs.model.sys).map_err(|e| diagnostics(e, path))?;
    inputs.files.push((path.into(), file_hash(&text)));
    Ok(g)
}

pub fn read_file(inputs: &mut Inputs, path: &Path) -> Result<String, Failure> {
    let text = read(path)?;
    inputs.files.push((path.into(), file_hash(&text)));
    Ok(text)
}

pub fn lemma(model: &Model, name: Option<&str>) -> Result<Lemma, Failure> {
    match name {
        Some(n) => model
            .sys
            .lemma(n)
            .cloned()
            .ok_or_else(|| Failure::Input(anyhow!("no lemma named `{n}` in the specification"))),
        None => model
            .sys
            .lemmas
            .first()
            .cloned()
            .ok_or_else(|| Failure::Input(anyhow!("the specification declares no lemmas"))),
    }
}

fn provenance_matches(p: Provenance, mode: ExploreMode) -> bool {
    match (p, mode) {
        (Provenance::Exhaustive, ExploreMode::Exhaustive { .. }) => true,
        (Provenance::Sampled { seed, budget }, ExploreMode::Sampled { seed: s, budget: b }) => seed == s && budget == b,
        _ => false,
    }
}

/// The reachable set, from the cache when a matching entry exists.
/// Truncated exhaustive runs are reported as a resource failure and not
/// cached.
pub fn reachable(
    model: &Model,
    mode: ExploreMode,
    cache_dir: Option<&Path>,
) -> Result<(StateSet, Option<PathBuf>, bool), Failure> {
    let key = reach::cache_key(model);
    let path = cache_dir.map(|d| key.path(d, None));
    if let Some(p) = path.as_deref().filter(|p| p.exists()) {
        match cache::load(p, &model.sys, &key) {
            Ok(set) if provenance_matches(set.provenance, mode) => {
                tracing::info!(path = %p.display(), states = set.len(), "loaded reachable states from cache");
                return Ok((set, path, true));
            }
            Ok(_) => tracing::info!(path = %p.display(), "cache holds a different exploration mode; recomputing"),
            Err(e @ CacheError::Io { .. }) => return Err(Failure::Input(e.into())),
            Err(e) => tracing::warn!(path = %p.display(), error = %e, "ignoring unreadable cache"),
        }
    }
    let set = reach::explore(model, mode).map_err(|e| Failure::Input(e.into()))?;
    if let Provenance::Truncated { limit } = set.provenance {
        return Err(Failure::Resource(anyhow!(
            "exhaustive exploration stopped at the state limit ({limit}); raise --max-states or use --mode sampled"
        )));
    }
    if let Some(p) = &path {
        cache::save(&set, &model.sys, &key, p).map_err(|e| Failure::Input(e.into()))?;
    }
    Ok((set, path, false))
}
