//! The algebra of polynomial Wiener functionals in the Hermite basis.
//!
//! A [`ChaosElement`] is a finite sum `Σ_a c_a·H_a` with exact rational
//! coefficients, where `H_a = Π_i H_{a_i}(ξ_i)` and the `ξ_i` are independent
//! standard Gaussians. The family `{H_a / √a!}` is orthonormal, which makes
//! expectation and the `L²` inner product read straight off the
//! coefficients:
//!
//! * `E[F] = c_∅`
//! * `⟨F, G⟩ = Σ_a f_a·g_a·a!`
//!
//! Products are formed coordinate-wise with the Hermite linearization
//! formula and then distributed over the sparse term maps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::hermite::{self, HermiteTable, Linearization};
use crate::index::{Coord, MultiIndex};
use crate::monomial::MonomialForm;
use crate::rational::{self, Rational};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct ChaosElement {
    terms: BTreeMap<MultiIndex, Rational>,
}

impl ChaosElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(MultiIndex::empty(), c)
    }

    /// `c·H_a`.
    pub fn term(index: MultiIndex, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(index, c);
        }
        ChaosElement { terms }
    }

    /// The basis element `H_a`.
    pub fn hermite(index: MultiIndex) -> Self {
        Self::term(index, Rational::one())
    }

    /// `H_n(ξ_coord)`.
    pub fn hermite_1d(n: u32, coord: Coord) -> Self {
        Self::hermite(MultiIndex::single(coord, n))
    }

    /// The coordinate functional `ξ_coord = H_1(ξ_coord)`.
    pub fn xi(coord: Coord) -> Self {
        Self::hermite_1d(1, coord)
    }

    /// Sums the given terms; repeated indices accumulate.
    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Self {
        let mut out = ChaosElement::zero();
        for (a, c) in terms {
            out.add_term(a, c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, index: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Rational {
        self.terms
            .get(index)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Total degree, `max_a |a|`; zero for constants and for the zero element.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    /// Largest exponent of `ξ_coord` in any stored term.
    pub fn degree_in(&self, coord: Coord) -> u32 {
        self.terms.keys().map(|a| a.get(coord)).max().unwrap_or(0)
    }

    /// Coordinates that appear in some stored term.
    pub fn coords(&self) -> BTreeSet<Coord> {
        self.terms
            .keys()
            .flat_map(|a| a.iter().map(|(c, _)| c))
            .collect()
    }

    pub fn max_coord(&self) -> Option<Coord> {
        self.terms.keys().filter_map(MultiIndex::max_coord).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(MultiIndex::is_empty)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        ChaosElement {
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    /// `E[F]`, the coefficient of the empty index.
    pub fn expectation(&self) -> Rational {
        self.coeff(&MultiIndex::empty())
    }

    /// `⟨F, G⟩ = E[F·G] = Σ_a f_a·g_a·a!`.
    pub fn inner_product(&self, other: &ChaosElement) -> Rational {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc = Rational::zero();
        for (a, f) in &small.terms {
            if let Some(g) = large.terms.get(a) {
                acc += f * g * Rational::from_integer(a.factorial());
            }
        }
        acc
    }

    pub fn multiply(&self, other: &ChaosElement) -> ChaosElement {
        self.multiply_with(other, HermiteTable::global())
    }

    /// Product using an explicit linearization table.
    pub fn multiply_with(&self, other: &ChaosElement, table: &HermiteTable) -> ChaosElement {
        if self.is_zero() || other.is_zero() {
            return ChaosElement::zero();
        }
        if self.is_constant() {
            return other.scale(&self.expectation());
        }
        if other.is_constant() {
            return self.scale(&other.expectation());
        }
        // Work over a common denominator so the inner loop is integer-only.
        let (fs, fden) = self.integer_form();
        let (gs, gden) = other.integer_form();
        let mut acc: HashMap<MultiIndex, BigInt> = HashMap::new();
        for (a, fa) in &fs {
            for (b, gb) in &gs {
                let c = fa * gb;
                for_each_product(a, b, table, |idx, w| {
                    let slot = acc.entry(idx).or_default();
                    match w {
                        None => *slot += &c,
                        Some(w) => *slot += &c * w,
                    }
                });
            }
        }
        let den = fden * gden;
        ChaosElement {
            terms: acc
                .into_iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(a, v)| (a, Rational::new(v, den.clone())))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> ChaosElement {
        let mut out = ChaosElement::one();
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }

    /// Coefficients rescaled to integers over their least common denominator.
    fn integer_form(&self) -> (Vec<(&MultiIndex, BigInt)>, BigInt) {
        let den = self
            .terms
            .values()
            .fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| (a, c.numer() * (&den / c.denom())))
            .collect();
        (terms, den)
    }

    /// `∂/∂ξ_coord` on the Hermite basis: `H_a ↦ a_i·H_{a−δ_i}`.
    pub fn partial(&self, coord: Coord) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for (a, c) in &self.terms {
            let e = a.get(coord);
            if e > 0 {
                out.add_term(a.with(coord, e - 1), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Groups terms by their order in `coord`: entry `n` is the element `G_n`
    /// free of `ξ_coord` with `self = Σ_n G_n·H_n(ξ_coord)`, so that
    /// `G_n = E[self·H_n(ξ_coord) | other coordinates]/n!`.
    pub fn split_by(&self, coord: Coord) -> BTreeMap<u32, ChaosElement> {
        let mut out: BTreeMap<u32, ChaosElement> = BTreeMap::new();
        for (a, c) in &self.terms {
            out.entry(a.get(coord))
                .or_default()
                .add_term(a.without(coord), c.clone());
        }
        out
    }

    /// `n`-th partial derivative in one coordinate.
    pub fn partial_n(&self, coord: Coord, n: u32) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for (a, c) in &self.terms {
            let e = a.get(coord);
            if e >= n {
                // e·(e−1)···(e−n+1)
                let falling = ((e - n + 1)..=e).fold(BigInt::one(), |acc, k| acc * k);
                out.add_term(a.with(coord, e - n), c * Rational::from_integer(falling));
            }
        }
        out
    }

    /// Multiplication by `H_{δ_coord} = ξ_coord`, using `ξ·H_n = H_{n+1} + n·H_{n−1}`.
    pub fn times_xi(&self, coord: Coord) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for (a, c) in &self.terms {
            let e = a.get(coord);
            out.add_term(a.with(coord, e + 1), c.clone());
            if e > 0 {
                out.add_term(a.with(coord, e - 1), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Floating-point value at `point`, where `point[i − 1]` is `ξ_i`.
    ///
    /// Panics if some coordinate of `F` lies outside `point`.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        let mut total = 0.0;
        for (a, c) in &self.terms {
            let mut v = rational_to_f64(c);
            for (coord, n) in a.iter() {
                let x = *point
                    .get(coord as usize - 1)
                    .unwrap_or_else(|| panic!("point has no value for coordinate {coord}"));
                v *= hermite::eval(n, x);
            }
            total += v;
        }
        total
    }

    /// Same as [`evaluate`](Self::evaluate) with a sparse point.
    pub fn evaluate_at(&self, point: &BTreeMap<Coord, f64>) -> f64 {
        let dim = self.max_coord().unwrap_or(0) as usize;
        let dense: Vec<f64> = (1..=dim as Coord)
            .map(|c| {
                *point
                    .get(&c)
                    .unwrap_or_else(|| panic!("point has no value for coordinate {c}"))
            })
            .collect();
        self.evaluate(&dense)
    }

    pub fn to_monomial(&self) -> MonomialForm {
        let mut out = MonomialForm::zero();
        for (a, c) in &self.terms {
            for_each_tensor(a, hermite::hermite_to_monomial, |idx, w| {
                out.add_term(idx, c * Rational::from_integer(w));
            });
        }
        out
    }

    pub fn from_monomial(m: &MonomialForm) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for (a, c) in m.terms() {
            for_each_tensor(a, hermite::monomial_to_hermite, |idx, w| {
                out.add_term(idx, c * Rational::from_integer(w));
            });
        }
        out
    }

    /// Replaces `ξ_i` by `map[i]` for every mapped coordinate (unmapped
    /// coordinates stay put) and re-expands in the Hermite basis.
    ///
    /// The replacement is simultaneous: every `map[i]` is read in the original
    /// coordinates.
    pub fn substitute(&self, map: &BTreeMap<Coord, ChaosElement>) -> ChaosElement {
        let mono = self.to_monomial();
        let mut powers: HashMap<Coord, Vec<ChaosElement>> = HashMap::new();
        let mut out = ChaosElement::zero();
        for (a, c) in mono.terms() {
            let mut prod = ChaosElement::constant(c.clone());
            for (coord, e) in a.iter() {
                let image = map
                    .get(&coord)
                    .cloned()
                    .unwrap_or_else(|| ChaosElement::xi(coord));
                let ladder = powers
                    .entry(coord)
                    .or_insert_with(|| vec![ChaosElement::one()]);
                while ladder.len() <= e as usize {
                    let next = ladder.last().unwrap().multiply(&image);
                    ladder.push(next);
                }
                prod = prod.multiply(&ladder[e as usize]);
            }
            out += &prod;
        }
        out
    }

    /// Translation `ξ_i ↦ ξ_i + shift_i` by constants.
    pub fn shift(&self, shift: &BTreeMap<Coord, Rational>) -> ChaosElement {
        let map = shift
            .iter()
            .map(|(&c, v)| (c, ChaosElement::xi(c) + ChaosElement::constant(v.clone())))
            .collect();
        self.substitute(&map)
    }
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

/// Enumerates the Hermite expansion of `H_a·H_b`. The weight is `None` when
/// it equals one.
fn for_each_product(
    a: &MultiIndex,
    b: &MultiIndex,
    table: &HermiteTable,
    mut f: impl FnMut(MultiIndex, Option<&BigInt>),
) {
    let mut fixed: SmallVec<[(Coord, u32); 8]> = SmallVec::new();
    let mut shared: SmallVec<[(Coord, Linearization); 4]> = SmallVec::new();
    let (mut i, mut j) = (a.iter().peekable(), b.iter().peekable());
    loop {
        match (i.peek().copied(), j.peek().copied()) {
            (None, None) => break,
            (Some(x), None) => {
                fixed.push(x);
                i.next();
            }
            (None, Some(y)) => {
                fixed.push(y);
                j.next();
            }
            (Some(x), Some(y)) if x.0 < y.0 => {
                fixed.push(x);
                i.next();
            }
            (Some(x), Some(y)) if y.0 < x.0 => {
                fixed.push(y);
                j.next();
            }
            (Some(x), Some(y)) => {
                shared.push((x.0, table.product(x.1, y.1)));
                i.next();
                j.next();
            }
        }
    }
    if shared.is_empty() {
        fixed.sort_unstable_by_key(|&(c, _)| c);
        f(
            MultiIndex::from_sorted_unchecked(fixed.into_iter().collect()),
            None,
        );
        return;
    }
    let mut pos: SmallVec<[usize; 4]> = smallvec::smallvec![0; shared.len()];
    loop {
        let mut entries: SmallVec<[(Coord, u32); 4]> = fixed.iter().copied().collect();
        let mut weight: Option<BigInt> = None;
        for (slot, (coord, lin)) in pos.iter().zip(shared.iter()) {
            let (order, w) = &lin[*slot];
            if *order > 0 {
                entries.push((*coord, *order));
            }
            if !w.is_one() {
                weight = Some(match weight {
                    None => w.clone(),
                    Some(acc) => acc * w,
                });
            }
        }
        entries.sort_unstable_by_key(|&(c, _)| c);
        f(MultiIndex::from_sorted_unchecked(entries), weight.as_ref());

        let mut k = 0;
        loop {
            if k == pos.len() {
                return;
            }
            pos[k] += 1;
            if pos[k] < shared[k].1.len() {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

/// Tensor-product expansion of a multi-index through a per-coordinate
/// single-variable expansion.
pub(crate) fn for_each_tensor(
    a: &MultiIndex,
    expand: fn(u32) -> Vec<(u32, BigInt)>,
    mut f: impl FnMut(MultiIndex, BigInt),
) {
    let parts: Vec<(Coord, Vec<(u32, BigInt)>)> = a.iter().map(|(c, n)| (c, expand(n))).collect();
    let mut pos = vec![0usize; parts.len()];
    loop {
        let mut w = BigInt::one();
        let mut entries: SmallVec<[(Coord, u32); 4]> = SmallVec::new();
        for (slot, (coord, opts)) in pos.iter().zip(parts.iter()) {
            let (order, c) = &opts[*slot];
            if *order > 0 {
                entries.push((*coord, *order));
            }
            w *= c;
        }
        f(MultiIndex::from_sorted_unchecked(entries), w);
        let mut k = 0;
        loop {
            if k == pos.len() {
                return;
            }
            pos[k] += 1;
            if pos[k] < parts[k].1.len() {
                break;
            }
            pos[k] = 0;
            k += 1;
        }
    }
}

impl fmt::Debug for ChaosElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChaosElement({self})")
    }
}

/// Renders in the expression syntax accepted by [`crate::expr::parse_expression`],
/// e.g. `3/2*H(2,1)*H(1,3) - 5`.
impl fmt::Display for ChaosElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        // Highest order first reads more naturally.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|x, y| y.0.order().cmp(&x.0.order()).then_with(|| x.0.cmp(y.0)));
        for (i, (a, c)) in terms.into_iter().enumerate() {
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            let mut first = true;
            if a.is_empty() || !mag.is_one() {
                write!(f, "{mag}")?;
                first = false;
            }
            for (coord, n) in a.iter() {
                if !first {
                    f.write_str("*")?;
                }
                write!(f, "H({n},{coord})")?;
                first = false;
            }
        }
        Ok(())
    }
}

impl Add<&ChaosElement> for &ChaosElement {
    type Output = ChaosElement;
    fn add(self, rhs: &ChaosElement) -> ChaosElement {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for ChaosElement {
    type Output = ChaosElement;
    fn add(mut self, rhs: ChaosElement) -> ChaosElement {
        self += &rhs;
        self
    }
}

impl AddAssign<&ChaosElement> for ChaosElement {
    fn add_assign(&mut self, rhs: &ChaosElement) {
        for (a, c) in &rhs.terms {
            self.add_term(a.clone(), c.clone());
        }
    }
}

impl SubAssign<&ChaosElement> for ChaosElement {
    fn sub_assign(&mut self, rhs: &ChaosElement) {
        for (a, c) in &rhs.terms {
            self.add_term(a.clone(), -c.clone());
        }
    }
}

impl Sub<&ChaosElement> for &ChaosElement {
    type Output = ChaosElement;
    fn sub(self, rhs: &ChaosElement) -> ChaosElement {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for ChaosElement {
    type Output = ChaosElement;
    fn sub(mut self, rhs: ChaosElement) -> ChaosElement {
        self -= &rhs;
        self
    }
}

impl Neg for &ChaosElement {
    type Output = ChaosElement;
    fn neg(self) -> ChaosElement {
        ChaosElement {
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Neg for ChaosElement {
    type Output = ChaosElement;
    fn neg(self) -> ChaosElement {
        -&self
    }
}

impl Mul<&ChaosElement> for &ChaosElement {
    type Output = ChaosElement;
    fn mul(self, rhs: &ChaosElement) -> ChaosElement {
        self.multiply(rhs)
    }
}

impl Mul for ChaosElement {
    type Output = ChaosElement;
    fn mul(self, rhs: ChaosElement) -> ChaosElement {
        self.multiply(&rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    index: MultiIndex,
    #[serde(with = "rational::serde_text")]
    coeff: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElementRepr {
    terms: Vec<TermRepr>,
}

impl Serialize for ChaosElement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        struct Terms<'a>(&'a BTreeMap<MultiIndex, Rational>);
        impl Serialize for Terms<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                use serde::ser::SerializeSeq;
                #[derive(Serialize)]
                struct TermRef<'a> {
                    index: &'a MultiIndex,
                    coeff: String,
                }
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for (a, c) in self.0 {
                    seq.serialize_element(&TermRef {
                        index: a,
                        coeff: rational::to_text(c),
                    })?;
                }
                seq.end()
            }
        }
        let mut st = s.serialize_struct("ChaosElement", 1)?;
        st.serialize_field("terms", &Terms(&self.terms))?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for ChaosElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = ElementRepr::deserialize(d)?;
        Ok(ChaosElement::from_terms(
            repr.terms.into_iter().map(|t| (t.index, t.coeff)),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn h(entries: &[u32]) -> ChaosElement {
        ChaosElement::hermite(MultiIndex::from_dense(entries))
    }

    #[test]
    fn multiply_examples() {
        // ξ² = (ξ² − 1) + 1
        assert_eq!(h(&[1]).multiply(&h(&[1])), h(&[2]) + ChaosElement::one());
        // (ξ²−1)² = ξ⁴ − 2ξ² + 1 = H_4 + 4H_2 + 2
        assert_eq!(
            h(&[2]).multiply(&h(&[2])),
            h(&[4]) + h(&[2]).scale(&int(4)) + ChaosElement::constant(int(2))
        );
        assert_eq!(h(&[1]).multiply(&h(&[0, 1])), h(&[1, 1]));
    }

    #[test]
    fn expectation_examples() {
        assert_eq!(ChaosElement::one().expectation(), int(1));
        assert_eq!(h(&[2, 1]).expectation(), int(0));
        let f = h(&[2]).scale(&int(3)) + ChaosElement::constant(int(5));
        assert_eq!(f.expectation(), int(5));
    }

    #[test]
    fn inner_product_examples() {
        assert_eq!(h(&[2]).inner_product(&h(&[2])), int(2));
        assert_eq!(h(&[1, 2]).inner_product(&h(&[1, 2])), int(2));
        assert_eq!(h(&[1]).inner_product(&h(&[2])), int(0));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(h(&[3]).evaluate(&[2.0]), 2.0);
        assert_eq!(h(&[2]).evaluate(&[1.0]), 0.0);
        let f = h(&[2]).scale(&rat(1, 2)) + ChaosElement::constant(rat(7, 4));
        assert_eq!(f.evaluate(&[0.0]), 1.75 - 0.5);
    }

    #[test]
    fn substitute_examples() {
        // H_2(ξ₁ + 1) = H_2 + 2H_1 + 1
        let f = h(&[2]);
        let map = BTreeMap::from([(1, ChaosElement::xi(1) + ChaosElement::one())]);
        assert_eq!(
            f.substitute(&map),
            h(&[2]) + h(&[1]).scale(&int(2)) + ChaosElement::one()
        );
        assert_eq!(f.substitute(&BTreeMap::new()), f);
        // (ξ₁ + ξ₂)²
        let sq = h(&[2]) + ChaosElement::one();
        let map = BTreeMap::from([(1, ChaosElement::xi(1) + ChaosElement::xi(2))]);
        let expect =
            h(&[2, 0]) + h(&[1, 1]).scale(&int(2)) + h(&[0, 2]) + ChaosElement::constant(int(2));
        assert_eq!(sq.substitute(&map), expect);
    }

    #[test]
    fn basis_convert_examples() {
        // H_3 = ξ³ − 3ξ
        let m = h(&[3]).to_monomial();
        assert_eq!(m.coeff(&MultiIndex::single(1, 3)), int(1));
        assert_eq!(m.coeff(&MultiIndex::single(1, 1)), int(-3));
        assert_eq!(m.len(), 2);
        assert_eq!(ChaosElement::one().to_monomial(), MonomialForm::one());
        let m = (h(&[2]) + ChaosElement::one()).to_monomial();
        assert_eq!(m, MonomialForm::var(1).pow(2));
    }

    #[test]
    fn orthogonality_table() {
        // E[H_a·H_b] = a!·δ_ab for |a|, |b| ≤ 4 over two coordinates.
        let mut indices = Vec::new();
        for p in 0..=4u32 {
            for q in 0..=(4 - p) {
                indices.push(MultiIndex::from_dense(&[p, q]));
            }
        }
        for a in &indices {
            for b in &indices {
                let prod =
                    ChaosElement::hermite(a.clone()).multiply(&ChaosElement::hermite(b.clone()));
                let expect = if a == b {
                    Rational::from_integer(a.factorial())
                } else {
                    Rational::zero()
                };
                assert_eq!(prod.expectation(), expect, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn partials_and_xi() {
        let f = h(&[3, 1]);
        assert_eq!(f.partial(1), h(&[2, 1]).scale(&int(3)));
        assert_eq!(f.partial_n(1, 2), h(&[1, 1]).scale(&int(6)));
        assert_eq!(f.partial_n(1, 4), ChaosElement::zero());
        assert_eq!(f.times_xi(1), f.multiply(&ChaosElement::xi(1)));
        assert_eq!(f.times_xi(3), f.multiply(&ChaosElement::xi(3)));
    }

    #[test]
    fn json_shape_is_exact() {
        let f = ChaosElement::term(MultiIndex::new([(1, 2), (3, 1)]), rat(3, 2));
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"terms":[{"index":{"1":2,"3":1},"coeff":"3/2"}]}"#);
        let back: ChaosElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        // non-canonical input is normalized
        let messy = r#"{"terms":[{"index":{"1":0},"coeff":"2/4"},{"index":{},"coeff":"1/2"},{"index":{"2":1},"coeff":"0"}]}"#;
        let m: ChaosElement = serde_json::from_str(messy).unwrap();
        assert_eq!(m, ChaosElement::one());
        assert_eq!(
            serde_json::to_string(&ChaosElement::zero()).unwrap(),
            r#"{"terms":[]}"#
        );
    }

    #[test]
    fn display_form() {
        let f = h(&[2, 1]).scale(&rat(-3, 2)) + ChaosElement::constant(int(5)) + h(&[0, 0, 1]);
        assert_eq!(f.to_string(), "-3/2*H(2,1)*H(1,2) + H(1,3) + 5");
        assert_eq!(ChaosElement::zero().to_string(), "0");
    }
}
