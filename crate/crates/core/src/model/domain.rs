//! Finite type domains: counting, indexing and sampling of type-correct values.

use rand::Rng;

use super::types::Type;
use super::value::{SortId, Value};
use super::Model;

/// A count that saturates at `u128::MAX` instead of overflowing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Saturating(pub u128);

impl Saturating {
    pub const ONE: Saturating = Saturating(1);

    pub fn mul(self, other: Saturating) -> Saturating {
        Saturating(self.0.saturating_mul(other.0))
    }

    pub fn is_saturated(self) -> bool {
        self.0 == u128::MAX
    }

    /// The count as `u64` when it fits.
    pub fn get(self) -> Option<u64> {
        u64::try_from(self.0).ok().filter(|_| !self.is_saturated())
    }
}

impl std::fmt::Display for Saturating {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_saturated() {
            f.write_str(">=2^128")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// The finite set of values of a type under an instance, with a bijection
/// between `0..size` and its members.
#[derive(Clone, Debug)]
pub enum Domain {
    Bool,
    Int(i64, i64),
    Sort(SortId, u16),
    /// Subsets of the listed elements (sorted); index bits select members.
    Set(Vec<Value>),
    /// Sets over an element domain too large to index.
    HugeSet,
    Tuple(Vec<Domain>),
    Fn(u16, Box<Domain>),
}

/// Element lists of set domains are materialized; anything larger than this
/// cannot be indexed by a `u128` anyway.
const MAX_SET_ELEMS: u128 = 127;

impl Domain {
    pub fn new(model: &Model, ty: &Type) -> Domain {
        match ty {
            Type::Bool => Domain::Bool,
            Type::Int(Some(r)) => {
                let (lo, hi) = model.range_bounds(r);
                Domain::Int(lo, hi)
            }
            Type::Int(None) | Type::Any => Domain::Int(0, 0),
            Type::Sort(s) => Domain::Sort(*s, model.sort_size(*s) as u16),
            Type::Set(t) => {
                let inner = Domain::new(model, t);
                let n = inner.size();
                if n.0 > MAX_SET_ELEMS {
                    return Domain::HugeSet;
                }
                let mut elems: Vec<Value> = (0..n.0).map(|i| inner.value_at(i)).collect();
                elems.sort_unstable();
                Domain::Set(elems)
            }
            Type::Tuple(ts) => Domain::Tuple(ts.iter().map(|t| Domain::new(model, t)).collect()),
            Type::Fn(s, t) => Domain::Fn(model.sort_size(*s) as u16, Box::new(Domain::new(model, t))),
        }
    }

    pub fn size(&self) -> Saturating {
        match self {
            Domain::Bool => Saturating(2),
            Domain::Int(lo, hi) => Saturating((hi - lo + 1).max(0) as u128),
            Domain::Sort(_, n) => Saturating(*n as u128),
            Domain::Set(els) => Saturating(1u128 << els.len()),
            Domain::HugeSet => Saturating(u128::MAX),
            Domain::Tuple(ds) => ds.iter().fold(Saturating::ONE, |a, d| a.mul(d.size())),
            Domain::Fn(n, d) => (0..*n).fold(Saturating::ONE, |a, _| a.mul(d.size())),
        }
    }

    /// The member with the given index; index 0 is the canonical least value.
    pub fn value_at(&self, index: u128) -> Value {
        match self {
            Domain::Bool => Value::Bool(index & 1 == 1),
            Domain::Int(lo, _) => Value::Int(lo + index as i64),
            Domain::Sort(s, _) => Value::Atom(*s, index as u16),
            Domain::Set(els) => Value::Set(
                els.iter()
                    .enumerate()
                    .filter(|(i, _)| index >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect(),
            ),
            Domain::HugeSet => Value::empty_set(),
            Domain::Tuple(ds) => {
                let mut rest = index;
                let mut out: Vec<Value> = Vec::with_capacity(ds.len());
                for d in ds.iter().rev() {
                    let n = d.size().0.max(1);
                    out.push(d.value_at(rest % n));
                    rest /= n;
                }
                out.reverse();
                Value::Tuple(out)
            }
            Domain::Fn(k, d) => {
                let n = d.size().0.max(1);
                let mut rest = index;
                let mut out = Vec::with_capacity(*k as usize);
                for _ in 0..*k {
                    out.push(d.value_at(rest % n));
                    rest /= n;
                }
                Value::Func(out)
            }
        }
    }

    /// All members in index order, if there are at most `limit` of them.
    pub fn values(&self, limit: u64) -> Option<Vec<Value>> {
        let n = self.size().get().filter(|&n| n <= limit)?;
        Some((0..n as u128).map(|i| self.value_at(i)).collect())
    }

    /// A random member. Set members are included independently with
    /// probability 1/2; all other choices are uniform.
    pub fn sample(&self, rng: &mut impl Rng) -> Value {
        match self {
            Domain::Bool => Value::Bool(rng.gen()),
            Domain::Int(lo, hi) => Value::Int(rng.gen_range(*lo..=*hi)),
            Domain::Sort(s, n) => Value::Atom(*s, rng.gen_range(0..*n)),
            Domain::Set(els) => {
                Value::Set(els.iter().filter(|_| rng.gen::<bool>()).cloned().collect())
            }
            Domain::HugeSet => Value::empty_set(),
            Domain::Tuple(ds) => Value::Tuple(ds.iter().map(|d| d.sample(rng)).collect()),
            Domain::Fn(k, d) => Value::Func((0..*k).map(|_| d.sample(rng)).collect()),
        }
    }
}
