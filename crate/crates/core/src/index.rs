use num_bigint::BigInt;
use num_traits::One;
use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use std::fmt;

use crate::rational::factorial;

/// Basis coordinate label. Coordinates start at 1.
pub type Coord = u32;

/// Finitely supported exponent vector `a`, indexing the Hermite basis element
/// `H_a = Π_i H_{a_i}(ξ_i)`.
///
/// Stored as `(coordinate, exponent)` pairs sorted by coordinate with no zero
/// exponents, so derived equality and ordering are structural.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(SmallVec<[(Coord, u32); 4]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    /// Builds an index from arbitrary pairs; repeated coordinates add up and
    /// zero exponents are dropped.
    pub fn new(pairs: impl IntoIterator<Item = (Coord, u32)>) -> Self {
        let mut v: SmallVec<[(Coord, u32); 4]> = pairs.into_iter().collect();
        assert!(v.iter().all(|&(c, _)| c >= 1), "coordinates start at 1");
        v.sort_unstable_by_key(|&(c, _)| c);
        let mut out: SmallVec<[(Coord, u32); 4]> = SmallVec::new();
        for (c, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == c => last.1 += e,
                _ => out.push((c, e)),
            }
        }
        out.retain(|&mut (_, e)| e != 0);
        MultiIndex(out)
    }

    /// `entries[0]` is the exponent of coordinate 1, and so on.
    pub fn from_dense(entries: &[u32]) -> Self {
        Self::new(
            entries
                .iter()
                .enumerate()
                .map(|(i, &e)| (i as Coord + 1, e)),
        )
    }

    /// `n·δ_i`.
    pub fn single(coord: Coord, n: u32) -> Self {
        Self::new([(coord, n)])
    }

    pub fn unit(coord: Coord) -> Self {
        Self::single(coord, 1)
    }

    pub(crate) fn from_sorted_unchecked(v: SmallVec<[(Coord, u32); 4]>) -> Self {
        debug_assert!(v.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(v.iter().all(|&(c, e)| c >= 1 && e > 0));
        MultiIndex(v)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coord, u32)> + '_ {
        self.0.iter().copied()
    }

    pub fn get(&self, coord: Coord) -> u32 {
        match self.0.binary_search_by_key(&coord, |&(c, _)| c) {
            Ok(pos) => self.0[pos].1,
            Err(_) => 0,
        }
    }

    /// `|a| = Σ a_i`.
    pub fn order(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    /// `a! = Π a_i!`.
    pub fn factorial(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, &(_, e)| acc * factorial(e))
    }

    pub fn max_coord(&self) -> Option<Coord> {
        self.0.last().map(|&(c, _)| c)
    }

    /// Returns a copy with the exponent at `coord` replaced.
    pub fn with(&self, coord: Coord, exponent: u32) -> Self {
        let mut v = self.0.clone();
        match v.binary_search_by_key(&coord, |&(c, _)| c) {
            Ok(pos) if exponent == 0 => {
                v.remove(pos);
            }
            Ok(pos) => v[pos].1 = exponent,
            Err(_) if exponent == 0 => {}
            Err(pos) => v.insert(pos, (coord, exponent)),
        }
        MultiIndex(v)
    }

    /// Index with the entry at `coord` removed.
    pub fn without(&self, coord: Coord) -> Self {
        self.with(coord, 0)
    }

    /// `a + b`.
    pub fn add(&self, other: &MultiIndex) -> Self {
        Self::new(self.iter().chain(other.iter()))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (c, e)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}:{e}")?;
        }
        f.write_str(")")
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (c, e) in self.iter() {
            map.serialize_entry(&c.to_string(), &e)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct IndexVisitor;
        impl<'de> Visitor<'de> for IndexVisitor {
            type Value = MultiIndex;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a map from decimal coordinate strings to exponents")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<MultiIndex, A::Error> {
                let mut pairs = Vec::new();
                while let Some((k, e)) = map.next_entry::<String, u32>()? {
                    let c = parse_coord(&k).map_err(serde::de::Error::custom)?;
                    if pairs.iter().any(|&(p, _)| p == c) {
                        return Err(serde::de::Error::custom(format!(
                            "duplicate coordinate {c}"
                        )));
                    }
                    pairs.push((c, e));
                }
                Ok(MultiIndex::new(pairs))
            }
        }
        d.deserialize_map(IndexVisitor)
    }
}

/// Parses a decimal coordinate key (`"1"`, `"12"`, ...). Zero is rejected.
pub(crate) fn parse_coord(key: &str) -> Result<Coord, String> {
    if key.is_empty() || !key.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("invalid coordinate key {key:?}"));
    }
    match key.parse::<Coord>() {
        Ok(0) | Err(_) => Err(format!("invalid coordinate key {key:?}")),
        Ok(c) => Ok(c),
    }
}
