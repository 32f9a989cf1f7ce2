//! Names, predicate symbols and fresh-name generation.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

/// A name marks a free place (a node of a draft).
///
/// Names are ordered lexicographically on their text; that order is the
/// linear order used for ordered name lists (`Lst`).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(text: impl AsRef<str>) -> Self {
        Name(Arc::from(text.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// Text with any trailing `_<digits>` suffix removed.
    fn base(&self) -> &str {
        match self.0.rfind('_') {
            Some(i) if i > 0 && self.0[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < self.0.len() => {
                &self.0[..i]
            }
            _ => &self.0,
        }
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

/// A predicate symbol with a fixed arity. `=` is the distinguished 2-ary one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredSym {
    name: Arc<str>,
    arity: usize,
}

pub const EQUALITY: &str = "=";

impl PredSym {
    pub fn new(name: impl AsRef<str>, arity: usize) -> Self {
        PredSym { name: Arc::from(name.as_ref()), arity }
    }

    pub fn equality() -> Self {
        PredSym::new(EQUALITY, 2)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_equality(&self) -> bool {
        &*self.name == EQUALITY && self.arity == 2
    }

    /// `p/1` style key used in model JSON and signatures.
    pub fn key(&self) -> String {
        format!("{}/{}", self.name, self.arity)
    }

    pub fn parse_key(key: &str) -> Option<Self> {
        let (name, arity) = key.rsplit_once('/')?;
        let arity = arity.parse().ok()?;
        if name.is_empty() {
            return None;
        }
        Some(PredSym::new(name, arity))
    }
}

impl fmt::Debug for PredSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for PredSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Source of fresh names.
///
/// Generated names have the shape `{base}_{k}` with `k` drawn from a
/// counter that only increases, so two generated names never coincide.
/// Names in the reserved set are skipped. Cloning a generator forks it:
/// both copies continue from the same counter, which is fine as long as
/// their outputs live in separate namespaces (separate slices).
#[derive(Clone, Debug)]
pub struct NameGen {
    next: u64,
    reserved: Arc<BTreeSet<Name>>,
}

impl Default for NameGen {
    fn default() -> Self {
        NameGen::new()
    }
}

impl NameGen {
    pub fn new() -> Self {
        NameGen { next: 1, reserved: Arc::new(BTreeSet::new()) }
    }

    /// Generator whose first suffix is `next`.
    pub fn starting_at(next: u64) -> Self {
        NameGen { next, reserved: Arc::new(BTreeSet::new()) }
    }

    pub fn reserving<I: IntoIterator<Item = Name>>(names: I) -> Self {
        NameGen { next: 1, reserved: Arc::new(names.into_iter().collect()) }
    }

    /// Adds names that must never be produced.
    pub fn reserve<I: IntoIterator<Item = Name>>(&mut self, names: I) {
        let reserved = Arc::make_mut(&mut self.reserved);
        reserved.extend(names);
    }

    pub fn counter(&self) -> u64 {
        self.next
    }

    pub fn fresh(&mut self, like: &Name) -> Name {
        loop {
            let candidate = Name::new(format!("{}_{}", like.base(), self.next));
            self.next += 1;
            if !self.reserved.contains(&candidate) {
                return candidate;
            }
        }
    }

    pub fn fresh_from(&mut self, base: &str) -> Name {
        self.fresh(&Name::new(base))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fresh_names_skip_reserved_and_never_repeat() {
        let mut g = NameGen::reserving([Name::new("u_1"), Name::new("u_2")]);
        let a = g.fresh(&Name::new("u"));
        let b = g.fresh(&Name::new("u_7"));
        assert_eq!(a.as_str(), "u_3");
        assert_eq!(b.as_str(), "u_4");
        assert_ne!(a, b);
    }

    #[test]
    fn names_order_lexicographically() {
        let mut v = vec![Name::new("w"), Name::new("u"), Name::new("v")];
        v.sort();
        assert_eq!(v, vec![Name::new("u"), Name::new("v"), Name::new("w")]);
    }

    #[test]
    fn pred_key_round_trip() {
        let p = PredSym::new("r", 2);
        assert_eq!(PredSym::parse_key(&p.key()), Some(p));
        assert!(PredSym::equality().is_equality());
        assert_eq!(PredSym::parse_key("bad"), None);
    }
}
