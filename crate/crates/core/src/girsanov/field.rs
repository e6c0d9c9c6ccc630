use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;

use crate::chaos::ChaosElement;
use crate::error::{Error, Result};
use crate::index::{parse_coord, Coord};

/// A vector field `Z = Σ_k Z_k·e_k` with finitely many nonzero chaos-element
/// components.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChaosField {
    components: BTreeMap<Coord, ChaosElement>,
}

impl ChaosField {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(components: impl IntoIterator<Item = (Coord, ChaosElement)>) -> Self {
        let mut map: BTreeMap<Coord, ChaosElement> = BTreeMap::new();
        for (k, z) in components {
            assert!(k >= 1, "coordinates start at 1");
            *map.entry(k).or_default() += &z;
        }
        map.retain(|_, z| !z.is_zero());
        ChaosField { components: map }
    }

    /// Components listed from coordinate 1 upwards.
    pub fn from_dense(components: impl IntoIterator<Item = ChaosElement>) -> Self {
        Self::new(
            components
                .into_iter()
                .enumerate()
                .map(|(i, z)| (i as Coord + 1, z)),
        )
    }

    pub fn get(&self, k: Coord) -> Option<&ChaosElement> {
        self.components.get(&k)
    }

    pub fn component(&self, k: Coord) -> ChaosElement {
        self.components.get(&k).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (Coord, &ChaosElement)> {
        self.components.iter().map(|(&k, z)| (k, z))
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn negate(&self) -> ChaosField {
        ChaosField {
            components: self.components.iter().map(|(&k, z)| (k, -z)).collect(),
        }
    }

    /// Largest coordinate that is either a component label or appears inside a
    /// component.
    pub fn active_dim(&self) -> Coord {
        self.components
            .iter()
            .map(|(&k, z)| k.max(z.max_coord().unwrap_or(0)))
            .max()
            .unwrap_or(0)
    }

    /// `max_k deg(z_k)`.
    pub fn degree(&self) -> u32 {
        self.components
            .values()
            .map(ChaosElement::degree)
            .max()
            .unwrap_or(0)
    }

    /// `Σ_k z_k·ξ_k` without any predictability check.
    pub(crate) fn coordinate_sum(&self) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for (&k, z) in &self.components {
            out += &z.multiply(&ChaosElement::xi(k));
        }
        out
    }
}

/// Dyadic level `s` of the Haar system. Coordinate `k ∈ 1..=2^s` is the
/// direction `σ^s_k(t) = 2^{s/2}·|(0,t] ∩ ((k−1)/2^s, k/2^s]|`, whose Wiener
/// integral is the normalized increment `ξ_k = 2^{s/2}(w_{k/2^s} − w_{(k−1)/2^s})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HaarFrame {
    pub level: u32,
}

impl HaarFrame {
    pub fn new(level: u32) -> Self {
        assert!(level < 31, "Haar level {level} is too fine");
        HaarFrame { level }
    }

    pub fn dimension(&self) -> u32 {
        1 << self.level
    }

    /// `σ^s_k(t)`.
    pub fn sigma(&self, k: Coord, t: f64) -> f64 {
        let n = self.dimension() as f64;
        let (lo, hi) = ((k - 1) as f64 / n, k as f64 / n);
        n.sqrt() * (t.min(hi) - lo).max(0.0)
    }

    /// Brownian path at the dyadic times `k/2^s`, `k = 0..=2^s`, from the
    /// normalized increments.
    pub fn path_from_coords(&self, xi: &[f64]) -> Vec<f64> {
        let scale = (self.dimension() as f64).sqrt().recip();
        let mut path = Vec::with_capacity(xi.len() + 1);
        path.push(0.0);
        let mut w = 0.0;
        for x in xi {
            w += scale * x;
            path.push(w);
        }
        path
    }

    /// Inverse of [`path_from_coords`](Self::path_from_coords).
    pub fn coords_from_path(&self, path: &[f64]) -> Vec<f64> {
        let scale = (self.dimension() as f64).sqrt();
        path.windows(2).map(|w| scale * (w[1] - w[0])).collect()
    }
}

/// A simple process on one Haar level, `z(t) = Σ_k 2^{s/2}·z_k·1_{((k−1)/2^s, k/2^s]}(t)`,
/// stored through its frame coordinates `z_k`.
///
/// Predictability (`z_k` may only involve `ξ_1, …, ξ_{k−1}`) is not enforced
/// on construction; [`validate_predictable`] reports it and every operation
/// that relies on it checks first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredictableField {
    frame: HaarFrame,
    field: ChaosField,
}

impl PredictableField {
    /// Fails if a component label lies outside `1..=2^level`.
    pub fn new(level: u32, field: ChaosField) -> Result<Self> {
        let frame = HaarFrame::new(level);
        if let Some((k, _)) = field.components().find(|&(k, _)| k > frame.dimension()) {
            return Err(Error::InvalidField(format!(
                "component {k} outside level {level} (dimension {})",
                frame.dimension()
            )));
        }
        Ok(PredictableField { frame, field })
    }

    /// Components `z_1, z_2, …` in order; missing trailing ones are zero.
    pub fn from_dense(
        level: u32,
        components: impl IntoIterator<Item = ChaosElement>,
    ) -> Result<Self> {
        Self::new(level, ChaosField::from_dense(components))
    }

    pub fn zero(level: u32) -> Self {
        PredictableField {
            frame: HaarFrame::new(level),
            field: ChaosField::zero(),
        }
    }

    pub fn frame(&self) -> HaarFrame {
        self.frame
    }

    pub fn level(&self) -> u32 {
        self.frame.level
    }

    pub fn dimension(&self) -> u32 {
        self.frame.dimension()
    }

    pub fn field(&self) -> &ChaosField {
        &self.field
    }

    pub fn component(&self, k: Coord) -> ChaosElement {
        self.field.component(k)
    }

    pub(crate) fn ensure_predictable(&self) -> Result<()> {
        match validate_predictable(self) {
            Ok(()) => Ok(()),
            Err(v) => Err(Error::NotPredictable(v)),
        }
    }
}

/// Component `k` depends on `ξ_coord` although `coord ≥ k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub component: Coord,
    pub coord: Coord,
}

/// Ok iff every `z_k` has `degree_in(z_k, j) = 0` for all `j ≥ k`; otherwise
/// all offending pairs in ascending order.
pub fn validate_predictable(z: &PredictableField) -> std::result::Result<(), Vec<Violation>> {
    let mut out = Vec::new();
    for (k, zk) in z.field.components() {
        for j in zk.coords() {
            if j >= k {
                out.push(Violation {
                    component: k,
                    coord: j,
                });
            }
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// The Itô integral `∫ ż dW = Σ_k z_k·ξ_k` of a predictable step field.
pub fn wiener_integral(z: &PredictableField) -> Result<ChaosElement> {
    z.ensure_predictable()?;
    Ok(z.field.coordinate_sum())
}

/// `‖Z‖²_H = Σ_k z_k²`.
pub fn field_norm_sq(z: &ChaosField) -> ChaosElement {
    let mut out = ChaosElement::zero();
    for (_, zk) in z.components() {
        out += &zk.multiply(zk);
    }
    out
}

/// `M[j][k] = D_{e_j} Z_k`, rows and columns indexed from coordinate 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobianMatrix {
    pub dim: usize,
    pub entries: Vec<Vec<ChaosElement>>,
}

impl JacobianMatrix {
    /// Entry for 1-based `(j, k)`.
    pub fn entry(&self, j: Coord, k: Coord) -> &ChaosElement {
        &self.entries[j as usize - 1][k as usize - 1]
    }

    pub fn multiply(&self, other: &JacobianMatrix) -> JacobianMatrix {
        let n = self.dim;
        let mut entries = vec![vec![ChaosElement::zero(); n]; n];
        for (i, row) in entries.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                for j in 0..n {
                    let (a, b) = (&self.entries[i][j], &other.entries[j][k]);
                    if !a.is_zero() && !b.is_zero() {
                        *cell += &a.multiply(b);
                    }
                }
            }
        }
        JacobianMatrix { dim: n, entries }
    }

    pub fn trace(&self) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for i in 0..self.dim {
            out += &self.entries[i][i];
        }
        out
    }

    /// True when every entry on or below the diagonal is zero.
    pub fn is_strictly_upper(&self) -> bool {
        (0..self.dim).all(|j| (0..=j).all(|k| self.entries[j][k].is_zero()))
    }
}

/// Panics if `dim` is smaller than [`ChaosField::active_dim`].
pub fn jacobian(z: &ChaosField, dim: usize) -> JacobianMatrix {
    assert!(
        dim >= z.active_dim() as usize,
        "dimension {dim} does not cover the field's coordinates (need {})",
        z.active_dim()
    );
    let entries = (1..=dim as Coord)
        .map(|j| {
            (1..=dim as Coord)
                .map(|k| z.get(k).map(|zk| zk.partial(j)).unwrap_or_default())
                .collect()
        })
        .collect();
    JacobianMatrix { dim, entries }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NilpotencyReport {
    /// `Tr((DZ)^n)` for `n = 1..=dim`.
    pub traces: Vec<ChaosElement>,
    pub nilpotent: bool,
}

pub fn nilpotency_check(z: &ChaosField, dim: usize) -> NilpotencyReport {
    let m = jacobian(z, dim);
    let mut traces = Vec::with_capacity(dim);
    let mut power = m.clone();
    for n in 1..=dim {
        if n > 1 {
            power = power.multiply(&m);
        }
        traces.push(power.trace());
    }
    let nilpotent = traces.iter().all(ChaosElement::is_zero);
    NilpotencyReport { traces, nilpotent }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    components: BTreeMap<String, ChaosElement>,
}

fn components_from_repr(
    raw: BTreeMap<String, ChaosElement>,
) -> std::result::Result<ChaosField, String> {
    let mut comps = Vec::new();
    for (k, z) in raw {
        comps.push((parse_coord(&k)?, z));
    }
    Ok(ChaosField::new(comps))
}

/// Keys in numeric order; `serde_json` sorts map keys as strings.
fn ordered_components<S: Serializer>(
    field: &ChaosField,
    level: Option<u32>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::{SerializeMap, SerializeStruct};
    struct Comps<'a>(&'a ChaosField);
    impl Serialize for Comps<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            let mut m = s.serialize_map(None)?;
            for (k, z) in self.0.components() {
                m.serialize_entry(&k.to_string(), z)?;
            }
            m.end()
        }
    }
    let mut st = s.serialize_struct("Field", 2)?;
    if let Some(level) = level {
        st.serialize_field("level", &level)?;
    }
    st.serialize_field("components", &Comps(field))?;
    st.end()
}

impl Serialize for ChaosField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ordered_components(self, None, s)
    }
}

impl<'de> Deserialize<'de> for ChaosField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(d)?;
        components_from_repr(repr.components).map_err(serde::de::Error::custom)
    }
}

impl Serialize for PredictableField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ordered_components(&self.field, Some(self.frame.level), s)
    }
}

/// A missing `level` is taken as the smallest level whose dimension covers
/// every component label.
impl<'de> Deserialize<'de> for PredictableField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = FieldRepr::deserialize(d)?;
        let field = components_from_repr(repr.components).map_err(serde::de::Error::custom)?;
        let level = match repr.level {
            Some(l) => l,
            None => {
                let top = field.components().map(|(k, _)| k).max().unwrap_or(1);
                (0..31).find(|s| (1u32 << s) >= top).unwrap_or(30)
            }
        };
        if level >= 31 {
            return Err(serde::de::Error::custom(format!(
                "level {level} is too fine"
            )));
        }
        PredictableField::new(level, field).map_err(serde::de::Error::custom)
    }
}
