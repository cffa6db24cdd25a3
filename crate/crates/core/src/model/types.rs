use super::value::SortId;

/// Reference to an integer range. Named ranges are bound by the instance
/// file (`intrange NAME lo hi`); literal ranges are fixed in the spec.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntRange {
    Named(usize),
    Literal(i64, i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Bool,
    /// Bounded integer. `None` is the type of integer literals and
    /// arithmetic results, compatible with every range.
    Int(Option<IntRange>),
    Sort(SortId),
    Set(Box<Type>),
    Tuple(Vec<Type>),
    /// Total function from a sort.
    Fn(SortId, Box<Type>),
    /// Unknown element type of the empty set literal.
    Any,
}

impl Type {
    pub fn set_of(t: Type) -> Type {
        Type::Set(Box::new(t))
    }

    pub fn elem(&self) -> Option<&Type> {
        match self {
            Type::Set(t) => Some(t),
            _ => None,
        }
    }

    /// Least common type of `self` and `other`, if they are compatible.
    pub fn unify(&self, other: &Type) -> Option<Type> {
        use Type::*;
        Some(match (self, other) {
            (Any, t) | (t, Any) => t.clone(),
            (Bool, Bool) => Bool,
            (Int(a), Int(b)) => Int(a.clone().or_else(|| b.clone())),
            (Sort(a), Sort(b)) if a == b => Sort(*a),
            (Set(a), Set(b)) => Set(Box::new(a.unify(b)?)),
            (Tuple(a), Tuple(b)) if a.len() == b.len() => Tuple(
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.unify(y))
                    .collect::<Option<Vec<_>>>()?,
            ),
            (Fn(s, a), Fn(t, b)) if s == t => Fn(*s, Box::new(a.unify(b)?)),
            _ => return None,
        })
    }

    pub fn compatible(&self, other: &Type) -> bool {
        self.unify(other).is_some()
    }

    pub fn contains_int(&self) -> bool {
        match self {
            Type::Int(_) => true,
            Type::Set(t) | Type::Fn(_, t) => t.contains_int(),
            Type::Tuple(ts) => ts.iter().any(Type::contains_int),
            _ => false,
        }
    }
}

/// A sort: a finite, nonempty set of atoms. Element names either come from
/// the spec (enumerated sorts, referable by name in expressions) or from the
/// instance file (parameter sorts such as `Node`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Sort {
    pub name: String,
    pub fixed_elements: Option<Vec<String>>,
}
