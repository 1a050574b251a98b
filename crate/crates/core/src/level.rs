//! Resource amounts in `N ∪ {∞}` and per-state vectors of them.

use std::fmt;
use std::ops::{Add, Index, IndexMut};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::model::StateId;

/// A resource amount, either a finite number of units or infinity.
///
/// The derived ordering puts every finite value below `Infinite`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Finite(u64),
    #[default]
    Infinite,
}

impl Level {
    pub const ZERO: Level = Level::Finite(0);

    pub fn is_finite(self) -> bool {
        matches!(self, Level::Finite(_))
    }

    pub fn finite(self) -> Option<u64> {
        match self {
            Level::Finite(n) => Some(n),
            Level::Infinite => None,
        }
    }

    /// `true` if the value is finite and at most `bound`.
    pub fn within(self, bound: u64) -> bool {
        matches!(self, Level::Finite(n) if n <= bound)
    }
}

impl From<u64> for Level {
    fn from(n: u64) -> Self {
        Level::Finite(n)
    }
}

impl Add for Level {
    type Output = Level;

    fn add(self, rhs: Level) -> Level {
        match (self, rhs) {
            (Level::Finite(a), Level::Finite(b)) => a.checked_add(b).map_or(Level::Infinite, Level::Finite),
            _ => Level::Infinite,
        }
    }
}

impl Add<u64> for Level {
    type Output = Level;

    fn add(self, rhs: u64) -> Level {
        self + Level::Finite(rhs)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Infinite => f.write_str("inf"),
        }
    }
}

// JSON has no infinity literal, so `Infinite` travels as `null`.
impl Serialize for Level {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Level::Finite(n) => serializer.serialize_u64(*n),
            Level::Infinite => serializer.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Option::<u64>::deserialize(deserializer)?.map_or(Level::Infinite, Level::Finite))
    }
}

/// One [`Level`] per state, indexed by [`StateId`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LevelVector(Vec<Level>);

impl LevelVector {
    pub fn new(len: usize, fill: Level) -> Self {
        LevelVector(vec![fill; len])
    }

    pub fn infinite(len: usize) -> Self {
        Self::new(len, Level::Infinite)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Level> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[Level] {
        &self.0
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &LevelVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Replaces values above `cap` by infinity and sets the remaining entries of
    /// `zeroed` states to 0.
    pub fn truncate(&mut self, cap: u64, zeroed: &[bool]) {
        for (value, &zero) in self.0.iter_mut().zip(zeroed) {
            if !value.within(cap) {
                *value = Level::Infinite;
            } else if zero {
                *value = Level::ZERO;
            }
        }
    }
}

impl From<Vec<Level>> for LevelVector {
    fn from(values: Vec<Level>) -> Self {
        LevelVector(values)
    }
}

impl FromIterator<Level> for LevelVector {
    fn from_iter<I: IntoIterator<Item = Level>>(iter: I) -> Self {
        LevelVector(iter.into_iter().collect())
    }
}

impl Index<StateId> for LevelVector {
    type Output = Level;

    fn index(&self, state: StateId) -> &Level {
        &self.0[state]
    }
}

impl IndexMut<StateId> for LevelVector {
    fn index_mut(&mut self, state: StateId) -> &mut Level {
        &mut self.0[state]
    }
}

impl<'a> IntoIterator for &'a LevelVector {
    type Item = &'a Level;
    type IntoIter = std::slice::Iter<'a, Level>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(Level::Finite(3) < Level::Finite(4));
        assert!(Level::Finite(u64::MAX) < Level::Infinite);
        assert_eq!(Level::Finite(7).max(Level::Infinite), Level::Infinite);
    }

    #[test]
    fn addition_saturates_at_infinity() {
        assert_eq!(Level::Finite(2) + 3, Level::Finite(5));
        assert_eq!(Level::Infinite + 3, Level::Infinite);
        assert_eq!(Level::Finite(u64::MAX) + 1, Level::Infinite);
    }

    #[test]
    fn truncation() {
        let mut v = LevelVector::from(vec![Level::Finite(3), Level::Finite(11), Level::Finite(4), Level::Infinite]);
        v.truncate(10, &[false, false, true, true]);
        assert_eq!(v.as_slice(), &[Level::Finite(3), Level::Infinite, Level::ZERO, Level::Infinite]);
    }

    #[test]
    fn json_uses_null_for_infinity() {
        let v = LevelVector::from(vec![Level::Finite(2), Level::Infinite]);
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(text, "[2,null]");
        assert_eq!(serde_json::from_str::<LevelVector>(&text).unwrap(), v);
    }
}
