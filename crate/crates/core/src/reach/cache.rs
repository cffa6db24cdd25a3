//! On-disk state sets.
//!
//! Layout (integers little-endian):
//!
//! ```text
//! "GAPR1"
//! spec hash [32]  instance hash [32]
//! schema descriptor: u32 length + UTF-8 text
//! provenance: u8 tag, u64 seed, u64 budget/limit
//! u64 count, then count x (u32 length + encoding)
//! sha256 of everything above [32]
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::model::TransitionSystem;
use crate::parser::print_type;

use super::stateset::{Provenance, StateSet};

const MAGIC: &[u8; 5] = b"GAPR1";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("not a state cache file, or an unsupported version")]
    Version,
    #[error("checksum mismatch: the cache file is truncated or corrupt")]
    Checksum,
    #[error("cache was written for a different variable schema")]
    Schema,
    #[error("cache was written for a different specification or instance")]
    Hash,
    #[error("malformed cache contents at byte {0}")]
    Malformed(usize),
}

/// Content hashes identifying the model a cache belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CacheKey {
    pub spec: [u8; 32],
    pub instance: [u8; 32],
}

impl CacheKey {
    /// File stem for this key: abbreviated hex of both hashes.
    pub fn stem(&self) -> String {
        format!("{}-{}", &hex::encode(self.spec)[..16], &hex::encode(self.instance)[..16])
    }

    /// Path of the full reachable set, or of a projection onto `vars`.
    pub fn path(&self, dir: &Path, vars: Option<&BTreeSet<usize>>) -> PathBuf {
        match vars {
            None => dir.join(format!("{}.gapr", self.stem())),
            Some(vs) => {
                let tag: Vec<String> = vs.iter().map(usize::to_string).collect();
                dir.join(format!("{}-p{}.gapr", self.stem(), tag.join("_")))
            }
        }
    }
}

/// Text describing the variables and their types, plus which of them a set
/// covers.
pub fn schema_descriptor(sys: &TransitionSystem, schema: &[usize]) -> String {
    let vars: Vec<String> = sys
        .vars
        .iter()
        .map(|v| format!("{}:{}", v.name, print_type(sys, &v.ty)))
        .collect();
    let covered: Vec<String> = schema.iter().map(usize::to_string).collect();
    format!("{}|{}", vars.join(";"), covered.join(","))
}

pub fn save(
    states: &StateSet,
    sys: &TransitionSystem,
    key: &CacheKey,
    path: &Path,
) -> Result<(), CacheError> {
    let bytes = to_bytes(states, sys, key);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CacheError::Io { path: dir.into(), source })?;
    }
    // Write to a sibling file first so readers never observe partial files.
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|source| CacheError::Io { path: tmp.clone(), source })?;
    fs::rename(&tmp, path).map_err(|source| CacheError::Io { path: path.into(), source })
}

pub fn to_bytes(states: &StateSet, sys: &TransitionSystem, key: &CacheKey) -> Vec<u8> {
    let (data, offsets) = states.raw_parts();
    let mut out = Vec::with_capacity(data.len() + 4 * states.len() + 256);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&key.spec);
    out.extend_from_slice(&key.instance);
    let desc = schema_descriptor(sys, states.schema());
    out.extend_from_slice(&(desc.len() as u32).to_le_bytes());
    out.extend_from_slice(desc.as_bytes());
    let (tag, a, b) = match states.provenance {
        Provenance::Exhaustive => (0u8, 0, 0),
        Provenance::Sampled { seed, budget } => (1, seed, budget),
        Provenance::Truncated { limit } => (2, 0, limit),
    };
    out.push(tag);
    out.extend_from_slice(&a.to_le_bytes());
    out.extend_from_slice(&b.to_le_bytes());
    out.extend_from_slice(&(states.len() as u64).to_le_bytes());
    for w in offsets.windows(2) {
        out.extend_from_slice(&((w[1] - w[0]) as u32).to_le_bytes());
        out.extend_from_slice(&data[w[0]..w[1]]);
    }
    let sum = Sha256::digest(&out);
    out.extend_from_slice(&sum);
    out
}

pub fn load(
    path: &Path,
    sys: &TransitionSystem,
    key: &CacheKey,
) -> Result<StateSet, CacheError> {
    let bytes = fs::read(path).map_err(|source| CacheError::Io { path: path.into(), source })?;
    from_bytes(&bytes, sys, key)
}

pub fn from_bytes(
    bytes: &[u8],
    sys: &TransitionSystem,
    key: &CacheKey,
) -> Result<StateSet, CacheError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(CacheError::Version);
    }
    if bytes.len() < MAGIC.len() + 32 {
        return Err(CacheError::Checksum);
    }
    let (body, sum) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != sum {
        return Err(CacheError::Checksum);
    }
    let mut r = Reader { b: body, pos: MAGIC.len() };
    let spec = r.take(32)?;
    let inst = r.take(32)?;
    if spec != key.spec || inst != key.instance {
        return Err(CacheError::Hash);
    }
    let n = r.u32()? as usize;
    let desc = std::str::from_utf8(r.take(n)?).map_err(|_| CacheError::Malformed(r.pos))?;
    let (vars_part, covered) = desc.split_once('|').ok_or(CacheError::Malformed(r.pos))?;
    let schema: Vec<usize> = if covered.is_empty() {
        Vec::new()
    } else {
        covered
            .split(',')
            .map(|x| x.parse().map_err(|_| CacheError::Malformed(r.pos)))
            .collect::<Result<_, _>>()?
    };
    if schema_descriptor(sys, &[]).split_once('|').map(|x| x.0) != Some(vars_part) {
        return Err(CacheError::Schema);
    }
    if schema.iter().any(|&v| v >= sys.vars.len()) || schema.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CacheError::Schema);
    }
    let tag = r.take(1)?[0];
    let a = r.u64()?;
    let b = r.u64()?;
    let provenance = match tag {
        0 => Provenance::Exhaustive,
        1 => Provenance::Sampled { seed: a, budget: b },
        2 => Provenance::Truncated { limit: b },
        _ => return Err(CacheError::Malformed(r.pos)),
    };
    let count = r.u64()? as usize;
    let mut encs = Vec::with_capacity(count.min(body.len()));
    for _ in 0..count {
        let n = r.u32()? as usize;
        let at = r.pos;
        let e = r.take(n)?;
        crate::model::State::decode(e).map_err(|_| CacheError::Malformed(at))?;
        encs.push(e.to_vec());
    }
    if r.pos != body.len() {
        return Err(CacheError::Malformed(r.pos));
    }
    let set = StateSet::from_encodings(schema, sys.vars.len(), encs, provenance);
    if set.len() != count {
        return Err(CacheError::Malformed(r.pos));
    }
    Ok(set)
}

struct Reader<'a> {
    b: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CacheError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.b.len());
        let end = end.ok_or(CacheError::Malformed(self.pos))?;
        let s = &self.b[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, CacheError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, CacheError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
