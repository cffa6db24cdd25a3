use std::collections::BTreeSet;

use crate::model::{DecodeError, Model, State};

/// How a state set was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    /// Complete breadth-first closure of the initial states.
    Exhaustive,
    /// Uniform random walks; a subset of the reachable states.
    Sampled { seed: u64, budget: u64 },
    /// Exploration stopped at a state limit before reaching the fixed point.
    Truncated { limit: u64 },
}

/// A deduplicated set of states in canonical encoding, sorted bytewise.
///
/// `schema` lists the (ascending) variables the encodings cover. A full set
/// covers every variable; a projection covers a subset, and decodes to
/// states whose other variables hold their default value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSet {
    schema: Vec<usize>,
    width: usize,
    data: Vec<u8>,
    offsets: Vec<usize>,
    pub provenance: Provenance,
}

impl StateSet {
    /// Builds a set from encodings, sorting and deduplicating them.
    pub fn from_encodings(
        schema: Vec<usize>,
        width: usize,
        mut encs: Vec<Vec<u8>>,
        provenance: Provenance,
    ) -> StateSet {
        encs.sort_unstable();
        encs.dedup();
        let mut data = Vec::with_capacity(encs.iter().map(Vec::len).sum());
        let mut offsets = Vec::with_capacity(encs.len() + 1);
        offsets.push(0);
        for e in &encs {
            data.extend_from_slice(e);
            offsets.push(data.len());
        }
        StateSet { schema, width, data, offsets, provenance }
    }

    pub fn from_states(states: &[State], provenance: Provenance) -> StateSet {
        let width = states.first().map_or(0, State::len);
        StateSet::from_encodings(
            (0..width).collect(),
            width,
            states.iter().map(State::encode).collect(),
            provenance,
        )
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Variables covered by the encodings.
    pub fn schema(&self) -> &[usize] {
        &self.schema
    }

    /// Number of variables of the full states.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn is_full(&self) -> bool {
        self.schema.len() == self.width
    }

    pub fn encoding(&self, i: usize) -> &[u8] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn encodings(&self) -> impl ExactSizeIterator<Item = &[u8]> + '_ {
        (0..self.len()).map(|i| self.encoding(i))
    }

    pub fn contains_encoding(&self, enc: &[u8]) -> bool {
        let (mut lo, mut hi) = (0, self.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.encoding(mid).cmp(enc) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Whether the set contains `s` restricted to this set's schema.
    pub fn contains(&self, s: &State) -> bool {
        self.contains_encoding(&s.encode_vars(&self.schema))
    }

    /// Decodes state `i`; variables outside the schema take the values of
    /// `fill`.
    pub fn state(&self, i: usize, fill: &State) -> Result<State, DecodeError> {
        let vals = crate::model::State::decode(self.encoding(i))?.0;
        if self.is_full() {
            return Ok(State(vals));
        }
        let mut out = fill.clone();
        for (v, x) in self.schema.iter().zip(vals) {
            out.0[*v] = x;
        }
        Ok(out)
    }

    /// Decodes every state, filling unprojected variables with defaults.
    pub fn states(&self, model: &Model) -> Vec<State> {
        let fill = model.default_state();
        (0..self.len())
            .map(|i| self.state(i, &fill).expect("state set holds valid encodings"))
            .collect()
    }

    /// Restriction of every state to `vars`, deduplicated.
    pub fn project(&self, vars: &BTreeSet<usize>) -> StateSet {
        let positions: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.schema
                    .iter()
                    .position(|s| s == v)
                    .expect("projection variables must lie in the schema")
            })
            .collect();
        let mut spans = Vec::with_capacity(self.schema.len());
        let mut encs = Vec::with_capacity(self.len());
        for enc in self.encodings() {
            split_values(enc, &mut spans);
            let mut out = Vec::with_capacity(enc.len());
            out.extend_from_slice(&(positions.len() as u32).to_le_bytes());
            for &p in &positions {
                let (a, b) = spans[p];
                out.extend_from_slice(&enc[a..b]);
            }
            encs.push(out);
        }
        StateSet::from_encodings(vars.iter().copied().collect(), self.width, encs, self.provenance)
    }

    pub(crate) fn raw_parts(&self) -> (&[u8], &[usize]) {
        (&self.data, &self.offsets)
    }
}

/// Byte ranges of the top-level values in a state encoding.
fn split_values(enc: &[u8], out: &mut Vec<(usize, usize)>) {
    out.clear();
    let n = u32::from_le_bytes(enc[..4].try_into().unwrap()) as usize;
    let mut pos = 4;
    for _ in 0..n {
        let len = value_len(&enc[pos..]);
        out.push((pos, pos + len));
        pos += len;
    }
}

/// Length of the value encoding at the front of `b`.
fn value_len(b: &[u8]) -> usize {
    match b[0] {
        0 | 1 => 1,
        2 => 9,
        3 => 5,
        _ => {
            let n = u32::from_le_bytes(b[1..5].try_into().unwrap()) as usize;
            let mut pos = 5;
            for _ in 0..n {
                pos += value_len(&b[pos..]);
            }
            pos
        }
    }
}
