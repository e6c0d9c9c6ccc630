//! Directional derivative `D_θ`, its formal adjoint `D*_θ`, their exponentials
//! and the exact checks built on them.
//!
//! On the Hermite basis `D_{e_i}` is annihilation, `H_a ↦ a_i·H_{a−δ_i}`, and
//! `D*_{e_i}` is creation, `H_a ↦ H_{a+δ_i}`. Both operators are implemented
//! from their defining formulas (`D*_θ F = −D_θF + [θ]·F`), not from these
//! basis rules; the rules are what the tests check.
//!
//! `e^{D*_θ}1` is the exponential `exp([θ] − |θ|²/2)`, which is not a
//! polynomial. It only ever enters through pairings `E[F·e^{D*_θ}1]` with
//! polynomial `F`, and `E[F·(D*_θ)^n 1] = E[D_θ^n F] = 0` once `n > deg F`,
//! so the partial sum of order `deg F` gives the exact pairing.

use num_traits::One;
use serde::Serialize;

use crate::chaos::ChaosElement;
use crate::direction::Direction;
use crate::rational::{factorial, Rational};
use crate::report::{Identity, VerificationReport};

/// Total degree above which verifiers log a warning.
pub const DEGREE_WARNING: u32 = 16;

pub(crate) fn warn_degree(what: &str, f: &ChaosElement) {
    let d = f.degree();
    if d > DEGREE_WARNING {
        log::warn!(
            "{what}: total degree {d} exceeds {DEGREE_WARNING}; expect slow exact arithmetic"
        );
    }
}

/// `D_θF = Σ_i θ_i·∂_i F`.
pub fn derive(f: &ChaosElement, theta: &Direction) -> ChaosElement {
    let mut out = ChaosElement::zero();
    for (&coord, t) in theta.coords() {
        out += &f.partial(coord).scale(t);
    }
    out
}

/// `D*_θ F = −D_θF + [θ]·F`.
pub fn skorokhod(f: &ChaosElement, theta: &Direction) -> ChaosElement {
    theta.wiener_integral().multiply(f) - derive(f, theta)
}

/// `e^{D_θ}F = Σ_{n ≤ deg F} D_θ^n F / n!`; the series terminates on polynomials.
pub fn exp_derive(f: &ChaosElement, theta: &Direction) -> ChaosElement {
    let mut out = f.clone();
    let mut term = f.clone();
    for n in 1..=f.degree() {
        term = derive(&term, theta);
        if term.is_zero() {
            break;
        }
        out += &term.scale(&inv_factorial(n));
    }
    out
}

/// `(D*_θ)^n 1` by iterating [`skorokhod`].
pub fn skorokhod_power_one(theta: &Direction, n: u32) -> ChaosElement {
    (0..n).fold(ChaosElement::one(), |acc, _| skorokhod(&acc, theta))
}

pub(crate) fn inv_factorial(n: u32) -> Rational {
    Rational::new(num_bigint::BigInt::one(), factorial(n))
}

/// Partial sum `Σ_{n ≤ N} (D*_θ)^n 1 / n!` of the exponential martingale.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncatedExponential {
    pub element: ChaosElement,
    pub order: u32,
    pub direction: crate::direction::Direction,
}

impl TruncatedExponential {
    /// Raises the truncation order, appending the missing higher terms.
    pub fn extend(&self, order: u32) -> TruncatedExponential {
        let mut element = self.element.clone();
        if order > self.order {
            let mut power = skorokhod_power_one(&self.direction, self.order);
            for n in self.order + 1..=order {
                power = skorokhod(&power, &self.direction);
                element += &power.scale(&inv_factorial(n));
            }
        }
        TruncatedExponential {
            element,
            order: order.max(self.order),
            direction: self.direction.clone(),
        }
    }
}

pub fn exp_skorokhod_one(theta: &Direction, order: u32) -> TruncatedExponential {
    let mut element = ChaosElement::one();
    let mut power = ChaosElement::one();
    for n in 1..=order {
        power = skorokhod(&power, theta);
        element += &power.scale(&inv_factorial(n));
    }
    TruncatedExponential {
        element,
        order,
        direction: theta.clone(),
    }
}

/// Checks `E[D_θF·G] = E[F·D*_θG]` exactly.
pub fn verify_adjoint(f: &ChaosElement, g: &ChaosElement, theta: &Direction) -> VerificationReport {
    warn_degree("verify_adjoint", f);
    let lhs = derive(f, theta).inner_product(g);
    let rhs = f.inner_product(&skorokhod(g, theta));
    VerificationReport::exact(Identity::Adjoint, &lhs, &rhs)
        .with_param("f", f)
        .with_param("g", g)
        .with_param("theta", theta)
}

/// Checks the Cameron–Martin formula `E[e^{D_θ}F] = E[F·e^{D*_θ}1]` exactly,
/// truncating the exponential at `deg F`.
pub fn verify_cm(f: &ChaosElement, theta: &Direction) -> VerificationReport {
    warn_degree("verify_cm", f);
    let order = f.degree();
    let lhs = exp_derive(f, theta).expectation();
    let rhs = f.inner_product(&exp_skorokhod_one(theta, order).element);
    VerificationReport::exact(Identity::Cm, &lhs, &rhs)
        .with_param("f", f)
        .with_param("theta", theta)
        .with_param("order", order)
}

/// Ladder identity `(D*_θ)^n 1 = |θ|^n·H_n([θ]/|θ|)`, written without square
/// roots as the homogeneous form `Ĥ_n([θ], |θ|²)`.
pub fn creation_ladder_target(theta: &Direction, n: u32) -> ChaosElement {
    let x = theta.wiener_integral();
    let t = ChaosElement::constant(theta.norm_sq().clone());
    let (mut prev, mut cur) = (ChaosElement::one(), x.clone());
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x.multiply(&cur) - t.multiply(&prev).scale(&Rational::from_integer(k.into()));
        prev = cur;
        cur = next;
    }
    cur
}
