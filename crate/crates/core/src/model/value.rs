//! Concrete values and their canonical byte encoding.

use std::fmt;

/// Index of a sort in [`TransitionSystem::sorts`](super::TransitionSystem).
pub type SortId = u16;

/// A concrete value carried by a state variable, a parameter or a constant.
///
/// The derived ordering is the canonical one: booleans < integers < atoms <
/// tuples < sets < functions, compared recursively. Sets are kept sorted and
/// deduplicated, so structural equality is semantic equality.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    /// Element `index` of sort `sort`.
    Atom(SortId, u16),
    Tuple(Vec<Value>),
    /// Sorted, duplicate-free members.
    Set(Vec<Value>),
    /// Total function over a sort; position `i` holds the image of element `i`.
    Func(Vec<Value>),
}

impl Value {
    pub const TRUE: Value = Value::Bool(true);
    pub const FALSE: Value = Value::Bool(false);

    pub fn empty_set() -> Value {
        Value::Set(Vec::new())
    }

    /// Builds a set from arbitrary members, sorting and deduplicating them.
    pub fn set_from(mut members: Vec<Value>) -> Value {
        members.sort_unstable();
        members.dedup();
        Value::Set(members)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_set(&self) -> Option<&[Value]> {
        match self {
            Value::Set(xs) => Some(xs),
            _ => None,
        }
    }

    pub fn set_contains(&self, x: &Value) -> Option<bool> {
        self.as_set().map(|xs| xs.binary_search(x).is_ok())
    }

    /// Appends the canonical encoding of `self` to `out`.
    pub fn encode_into(&self, out: &mut Vec<u8>) {
        match self {
            Value::Bool(false) => out.push(0),
            Value::Bool(true) => out.push(1),
            Value::Int(i) => {
                out.push(2);
                out.extend_from_slice(&i.to_le_bytes());
            }
            Value::Atom(s, e) => {
                out.push(3);
                out.extend_from_slice(&s.to_le_bytes());
                out.extend_from_slice(&e.to_le_bytes());
            }
            Value::Tuple(xs) => encode_seq(4, xs, out),
            Value::Set(xs) => encode_seq(5, xs, out),
            Value::Func(xs) => encode_seq(6, xs, out),
        }
    }

    /// Decodes one value from the front of `bytes`, returning it with the
    /// number of bytes consumed.
    pub fn decode(bytes: &[u8]) -> Result<(Value, usize), DecodeError> {
        let mut cur = Cursor { bytes, pos: 0 };
        let v = cur.value(0)?;
        Ok((v, cur.pos))
    }
}

fn encode_seq(tag: u8, xs: &[Value], out: &mut Vec<u8>) {
    out.push(tag);
    out.extend_from_slice(&(xs.len() as u32).to_le_bytes());
    for x in xs {
        x.encode_into(out);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed value encoding at byte {offset}")]
pub struct DecodeError {
    pub offset: usize,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

const MAX_DEPTH: usize = 64;

impl Cursor<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], DecodeError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(DecodeError { offset: self.pos }),
        }
    }

    fn value(&mut self, depth: usize) -> Result<Value, DecodeError> {
        if depth > MAX_DEPTH {
            return Err(DecodeError { offset: self.pos });
        }
        let at = self.pos;
        let tag = self.take(1)?[0];
        Ok(match tag {
            0 => Value::Bool(false),
            1 => Value::Bool(true),
            2 => Value::Int(i64::from_le_bytes(self.take(8)?.try_into().unwrap())),
            3 => {
                let s = u16::from_le_bytes(self.take(2)?.try_into().unwrap());
                let e = u16::from_le_bytes(self.take(2)?.try_into().unwrap());
                Value::Atom(s, e)
            }
            4..=6 => {
                let n = u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize;
                if n > self.bytes.len() - self.pos {
                    return Err(DecodeError { offset: at });
                }
                let mut xs = Vec::with_capacity(n);
                for _ in 0..n {
                    xs.push(self.value(depth + 1)?);
                }
                match tag {
                    4 => Value::Tuple(xs),
                    5 => {
                        if xs.windows(2).any(|w| w[0] >= w[1]) {
                            return Err(DecodeError { offset: at });
                        }
                        Value::Set(xs)
                    }
                    _ => Value::Func(xs),
                }
            }
            _ => return Err(DecodeError { offset: at }),
        })
    }
}

/// A full assignment of values to the declared state variables, in
/// declaration order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub Vec<Value>);

impl State {
    pub fn get(&self, var: usize) -> &Value {
        &self.0[var]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Canonical encoding: variable count followed by each value in
    /// declaration order. Equal states have equal encodings and vice versa.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        self.encode_into(&mut out);
        out
    }

    pub fn encode_into(&self, out: &mut Vec<u8>) {
        encode_values(self.0.iter(), self.0.len(), out);
    }

    /// Encodes only the variables listed in `vars` (ascending indices).
    pub fn encode_vars(&self, vars: &[usize]) -> Vec<u8> {
        let mut out = Vec::with_capacity(32);
        encode_values(vars.iter().map(|&v| &self.0[v]), vars.len(), &mut out);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<State, DecodeError> {
        decode_values(bytes).map(State)
    }
}

pub(crate) fn encode_values<'a>(
    values: impl Iterator<Item = &'a Value>,
    n: usize,
    out: &mut Vec<u8>,
) {
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for v in values {
        v.encode_into(out);
    }
}

pub(crate) fn decode_values(bytes: &[u8]) -> Result<Vec<Value>, DecodeError> {
    if bytes.len() < 4 {
        return Err(DecodeError { offset: 0 });
    }
    let n = u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize;
    if n > bytes.len() {
        return Err(DecodeError { offset: 0 });
    }
    let mut pos = 4;
    let mut vals = Vec::with_capacity(n);
    for _ in 0..n {
        let (v, used) = Value::decode(&bytes[pos..]).map_err(|e| DecodeError {
            offset: e.offset + pos,
        })?;
        pos += used;
        vals.push(v);
    }
    if pos != bytes.len() {
        return Err(DecodeError { offset: pos });
    }
    Ok(vals)
}

impl fmt::Display for Value {
    /// Context-free rendering; atoms print as `sort#index`. Use
    /// [`Model::fmt_value`](super::Model::fmt_value) for element names.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Atom(s, e) => write!(f, "{s}#{e}"),
            Value::Tuple(xs) => write_seq(f, "<<", xs, ">>"),
            Value::Set(xs) => write_seq(f, "{", xs, "}"),
            Value::Func(xs) => write_seq(f, "[", xs, "]"),
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, open: &str, xs: &[Value], close: &str) -> fmt::Result {
    f.write_str(open)?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(close)
}
