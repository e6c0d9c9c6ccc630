use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

use crate::chaos::ChaosElement;
use crate::index::{parse_coord, Coord, MultiIndex};
use crate::rational::{self, Rational};

/// A Cameron–Martin direction `θ = Σ_i θ_i·e_i`, stored by its coordinates in
/// the fixed orthonormal basis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Direction {
    coords: BTreeMap<Coord, Rational>,
    norm_sq: Rational,
}

impl Direction {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(coords: impl IntoIterator<Item = (Coord, Rational)>) -> Self {
        let mut map: BTreeMap<Coord, Rational> = BTreeMap::new();
        for (c, v) in coords {
            assert!(c >= 1, "coordinates start at 1");
            *map.entry(c).or_insert_with(Rational::zero) += v;
        }
        map.retain(|_, v| !v.is_zero());
        let norm_sq = map.values().map(|v| v * v).sum();
        Direction {
            coords: map,
            norm_sq,
        }
    }

    /// `scale·e_coord`.
    pub fn axis(coord: Coord, scale: Rational) -> Self {
        Self::new([(coord, scale)])
    }

    pub fn coords(&self) -> &BTreeMap<Coord, Rational> {
        &self.coords
    }

    pub fn get(&self, coord: Coord) -> Rational {
        self.coords
            .get(&coord)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// `|θ|²_H`.
    pub fn norm_sq(&self) -> &Rational {
        &self.norm_sq
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coords.iter().map(|(&k, v)| (k, v * c)))
    }

    /// The Wiener integral `[θ] = Σ_i θ_i·ξ_i` as a first-chaos element.
    pub fn wiener_integral(&self) -> ChaosElement {
        ChaosElement::from_terms(
            self.coords
                .iter()
                .map(|(&k, v)| (MultiIndex::unit(k), v.clone())),
        )
    }
}

impl Serialize for Direction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(self.coords.len()))?;
        for (k, v) in &self.coords {
            map.serialize_entry(&k.to_string(), &rational::to_text(v))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw: BTreeMap<String, String> = BTreeMap::deserialize(d)?;
        let mut coords = Vec::with_capacity(raw.len());
        for (k, v) in raw {
            let c = parse_coord(&k).map_err(serde::de::Error::custom)?;
            let r = rational::parse_text(&v).map_err(serde::de::Error::custom)?;
            coords.push((c, r));
        }
        Ok(Direction::new(coords))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn norm_is_exact() {
        let d = Direction::new([(1, rat(1, 2)), (3, int(2)), (2, int(0))]);
        assert_eq!(d.norm_sq(), &rat(17, 4));
        assert_eq!(d.coords().len(), 2);
        assert!(Direction::zero().norm_sq().is_zero());
    }

    #[test]
    fn json_round_trip() {
        let d = Direction::new([(10, rat(-1, 3)), (2, int(1))]);
        let s = serde_json::to_string(&d).unwrap();
        assert_eq!(s, r#"{"2":"1","10":"-1/3"}"#);
        assert_eq!(serde_json::from_str::<Direction>(&s).unwrap(), d);
    }
}
