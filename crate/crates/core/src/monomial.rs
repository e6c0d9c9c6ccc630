//! Polynomials in the monomial basis `ξ^a = Π_i ξ_i^{a_i}`.
//!
//! Used as the independent route for basis conversion, substitution and the
//! expression front-end. Multiplication here is plain exponent addition, so it
//! shares nothing with the Hermite linearization in [`crate::chaos`].

use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::chaos::rational_to_f64;
use crate::index::{Coord, MultiIndex};
use crate::rational::Rational;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonomialForm {
    terms: BTreeMap<MultiIndex, Rational>,
}

impl MonomialForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut out = Self::zero();
        out.add_term(MultiIndex::empty(), c);
        out
    }

    /// The coordinate `ξ_coord`.
    pub fn var(coord: Coord) -> Self {
        let mut out = Self::zero();
        out.add_term(MultiIndex::unit(coord), Rational::one());
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (MultiIndex, Rational)>) -> Self {
        let mut out = Self::zero();
        for (a, c) in terms {
            out.add_term(a, c);
        }
        out
    }

    pub(crate) fn add_term(&mut self, index: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self
            .terms
            .entry(index.clone())
            .or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&index);
        }
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

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::order).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.terms.iter().map(|(a, v)| (a.clone(), v * c)))
    }

    pub fn multiply(&self, other: &MonomialForm) -> MonomialForm {
        let mut out = Self::zero();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                out.add_term(a.add(b), x * y);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> MonomialForm {
        let mut out = Self::one();
        for _ in 0..n {
            out = out.multiply(self);
        }
        out
    }

    pub fn evaluate(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(a, c)| {
                a.iter().fold(rational_to_f64(c), |acc, (coord, e)| {
                    acc * point[coord as usize - 1].powi(e as i32)
                })
            })
            .sum()
    }

    /// Exact formal derivative in one coordinate.
    pub fn partial(&self, coord: Coord) -> MonomialForm {
        Self::from_terms(self.terms.iter().filter_map(|(a, c)| {
            let e = a.get(coord);
            (e > 0).then(|| (a.with(coord, e - 1), c * Rational::from_integer(e.into())))
        }))
    }

    /// Gaussian expectation via the moments `E[ξ^{2m}] = (2m − 1)!!`.
    pub fn gaussian_expectation(&self) -> Rational {
        let mut acc = Rational::zero();
        'terms: for (a, c) in &self.terms {
            let mut m = Rational::one();
            for (_, e) in a.iter() {
                if e % 2 == 1 {
                    continue 'terms;
                }
                let mut k = e as i64 - 1;
                while k > 1 {
                    m *= Rational::from_integer(k.into());
                    k -= 2;
                }
            }
            acc += c * m;
        }
        acc
    }
}

impl Add for &MonomialForm {
    type Output = MonomialForm;
    fn add(self, rhs: &MonomialForm) -> MonomialForm {
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MonomialForm {
    type Output = MonomialForm;
    fn sub(self, rhs: &MonomialForm) -> MonomialForm {
        self + &(-rhs)
    }
}

impl Neg for &MonomialForm {
    type Output = MonomialForm;
    fn neg(self) -> MonomialForm {
        self.scale(&-Rational::one())
    }
}

impl Mul for &MonomialForm {
    type Output = MonomialForm;
    fn mul(self, rhs: &MonomialForm) -> MonomialForm {
        self.multiply(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn gaussian_moments() {
        let x = MonomialForm::var(1);
        assert_eq!(x.pow(2).gaussian_expectation(), int(1));
        assert_eq!(x.pow(4).gaussian_expectation(), int(3));
        assert_eq!(x.pow(6).gaussian_expectation(), int(15));
        assert_eq!(x.pow(3).gaussian_expectation(), int(0));
        let y = MonomialForm::var(2);
        assert_eq!((&x.pow(2) * &y.pow(4)).gaussian_expectation(), int(3));
    }

    #[test]
    fn arithmetic() {
        let x = MonomialForm::var(1);
        let one = MonomialForm::one();
        let sq = (&x + &one).pow(2);
        assert_eq!(sq.coeff(&MultiIndex::unit(1)), int(2));
        assert_eq!((&sq - &sq), MonomialForm::zero());
        assert_eq!(sq.partial(1), (&x + &one).scale(&int(2)));
        assert_eq!(sq.evaluate(&[2.0]), 9.0);
    }
}
