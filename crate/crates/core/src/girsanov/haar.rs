//! Ordered one-step translations on a Haar level.
//!
//! For a predictable step field the operator `e^{D_{z_k}} = Σ_n z_k^n·D_{σ_k}^n/n!`
//! shifts `ξ_k` by `z_k` while leaving the earlier coordinates that `z_k`
//! reads untouched. Applying the stages in ascending `k` gives
//! `F(ξ + z(ξ))`; any other order reads some `z_k` at already-shifted
//! coordinates.
//!
//! The Girsanov density factorizes into one-step factors
//! `e^{D*_{z_k}}1 = Σ_n z_k^n·H_n(ξ_k)/n! = exp(z_k·ξ_k − z_k²/2)`. Write
//! `A_k = e^{−D_{z_k}}···e^{−D_{z_1}}F` and `P_k` for the product of the first
//! `k` factors. Since `P_{k−1}` and `z_k` do not involve `ξ_k`, conditioning
//! on `ξ_1, …, ξ_{k−1}` gives
//!
//! `E[A_{k−1}·P_{k−1}] = E[e^{D_{z_k}}A_k·P_{k−1}] = E[A_k·P_{k−1}·e^{D*_{z_k}}1]`,
//!
//! and in the last pairing only the factor terms with `n ≤ deg_{ξ_k}(A_k)`
//! survive the Gaussian integral in `ξ_k`. Truncating factor `k` at that
//! order ([`required_orders`]) therefore keeps every stage of the telescope
//! `E[F] = E[A_1·P_1] = … = E[A_K·P_K]` exact.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::chaos::ChaosElement;
use crate::direction::Direction;
use crate::error::Result;
use crate::index::Coord;
use crate::malliavin::{inv_factorial, skorokhod, warn_degree};
use crate::rational::{to_text, Rational};
use crate::report::{Identity, StageCheck, VerificationReport};

use super::field::PredictableField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn apply(self, z: &ChaosElement) -> ChaosElement {
        match self {
            Sign::Plus => z.clone(),
            Sign::Minus => -z,
        }
    }
}

/// `e^{±D_{z_k}} A = Σ_{n ≤ deg_k A} (±z_k)^n·∂_k^n A / n!`.
pub(crate) fn translate_stage(
    a: &ChaosElement,
    zk: &ChaosElement,
    k: Coord,
    sign: Sign,
) -> ChaosElement {
    if zk.is_zero() {
        return a.clone();
    }
    let step = sign.apply(zk);
    let mut out = a.clone();
    let mut power = ChaosElement::one();
    for n in 1..=a.degree_in(k) {
        power = power.multiply(&step);
        out += &power.multiply(&a.partial_n(k, n)).scale(&inv_factorial(n));
    }
    out
}

/// `e^{±D_{z_K}}···e^{±D_{z_1}} F`, stage 1 applied first.
pub fn ordered_translate(
    f: &ChaosElement,
    z: &PredictableField,
    sign: Sign,
) -> Result<ChaosElement> {
    z.ensure_predictable()?;
    Ok((1..=z.dimension()).fold(f.clone(), |a, k| {
        translate_stage(&a, &z.component(k), k, sign)
    }))
}

/// `orders[k − 1] = deg_{ξ_k}(A_k)` for the running backward translate `A_k`.
pub fn required_orders(f: &ChaosElement, z: &PredictableField) -> Result<Vec<u32>> {
    z.ensure_predictable()?;
    let mut a = f.clone();
    let mut orders = Vec::with_capacity(z.dimension() as usize);
    for k in 1..=z.dimension() {
        a = translate_stage(&a, &z.component(k), k, Sign::Minus);
        orders.push(a.degree_in(k));
    }
    Ok(orders)
}

/// `(D*_{z_k})^n 1` with `D*_{z_k} G = z_k·D*_{σ_k} G`, iterated literally.
pub fn creation_power_one(zk: &ChaosElement, k: Coord, n: u32) -> ChaosElement {
    let axis = Direction::axis(k, Rational::one());
    (0..n).fold(ChaosElement::one(), |g, _| {
        zk.multiply(&skorokhod(&g, &axis))
    })
}

/// One truncated factor `Σ_{n ≤ order} z_k^n·H_n(ξ_k)/n!`.
fn density_factor(zk: &ChaosElement, k: Coord, order: u32) -> ChaosElement {
    let mut out = ChaosElement::one();
    let mut power = ChaosElement::one();
    for n in 1..=order {
        power = power.multiply(zk);
        if power.is_zero() {
            break;
        }
        out += &power
            .multiply(&ChaosElement::hermite_1d(n, k))
            .scale(&inv_factorial(n));
    }
    out
}

/// `Π_k Σ_{n ≤ orders[k−1]} z_k^n·H_n(ξ_k)/n!`, multiplied in ascending `k`.
/// Missing orders count as zero.
pub fn density_truncated(z: &PredictableField, orders: &[u32]) -> Result<ChaosElement> {
    z.ensure_predictable()?;
    let mut out = ChaosElement::one();
    for k in 1..=z.dimension() {
        let order = orders.get(k as usize - 1).copied().unwrap_or(0);
        out = out.multiply(&density_factor(&z.component(k), k, order));
    }
    Ok(out)
}

/// Exact Maruyama–Girsanov check for a Haar-simple predictable field:
///
/// `E[F(ξ − z(ξ))·Π_k exp(z_k·ξ_k − z_k²/2)] = E[F]`.
///
/// The report carries every intermediate stage `E[A_k·P_k]`, `k = 0..=K`; the
/// check passes only if all of them equal `E[F]`.
pub fn verify_mg(f: &ChaosElement, z: &PredictableField) -> Result<VerificationReport> {
    z.ensure_predictable()?;
    warn_degree("verify_mg", f);
    let target = f.expectation();
    let mut stages = vec![StageCheck {
        stage: 0,
        value: to_text(&target),
        pass: true,
    }];
    let mut a = f.clone();
    let mut p = ChaosElement::one();
    let mut orders = Vec::with_capacity(z.dimension() as usize);
    for k in 1..=z.dimension() {
        let zk = z.component(k);
        a = translate_stage(&a, &zk, k, Sign::Minus);
        let order = a.degree_in(k);
        orders.push(order);
        p = p.multiply(&density_factor(&zk, k, order));
        let value: Rational = a.inner_product(&p);
        stages.push(StageCheck {
            stage: k,
            pass: value == target,
            value: to_text(&value),
        });
    }
    let lhs = a.inner_product(&p);
    let mut report = VerificationReport::exact(Identity::Mg, &lhs, &target)
        .with_param("f", f)
        .with_param("z", z)
        .with_param("orders", &orders);
    report.pass = report.pass && stages.iter().all(|s| s.pass);
    report.stages = stages;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::MonomialForm;
    use crate::rational::{int, rat};
    use std::collections::BTreeMap;

    fn xi(i: u32) -> ChaosElement {
        ChaosElement::xi(i)
    }

    fn c(r: Rational) -> ChaosElement {
        ChaosElement::constant(r)
    }

    fn mono(m: MonomialForm) -> ChaosElement {
        ChaosElement::from_monomial(&m)
    }

    #[test]
    fn ordered_translate_example() {
        let cst = rat(2, 3);
        let z = PredictableField::from_dense(1, [c(cst.clone()), xi(1)]).unwrap();
        let f = xi(1).multiply(&xi(2));
        let got = ordered_translate(&f, &z, Sign::Plus).unwrap();
        let expect = (xi(1) + c(cst)).multiply(&(xi(2) + xi(1)));
        assert_eq!(got, expect);
        assert_eq!(
            ordered_translate(&f, &PredictableField::zero(1), Sign::Plus).unwrap(),
            f
        );
    }

    #[test]
    fn order_matters() {
        let z = PredictableField::from_dense(1, [c(int(1)), xi(1)]).unwrap();
        let f = xi(1).multiply(&xi(2));
        let ascending = ordered_translate(&f, &z, Sign::Plus).unwrap();
        let descending = (1..=2).rev().fold(f.clone(), |a, k| {
            translate_stage(&a, &z.component(k), k, Sign::Plus)
        });
        assert_ne!(ascending, descending);
    }

    #[test]
    fn required_orders_examples() {
        let z = PredictableField::from_dense(1, [ChaosElement::zero(), xi(1)]).unwrap();
        let f = mono(MonomialForm::var(2).pow(2));
        assert_eq!(required_orders(&f, &z).unwrap(), vec![0, 2]);
        assert_eq!(required_orders(&c(int(4)), &z).unwrap(), vec![0, 0]);
        let z = PredictableField::from_dense(1, [c(int(3)), xi(1)]).unwrap();
        assert_eq!(
            required_orders(&xi(1).multiply(&xi(2)), &z).unwrap(),
            vec![1, 1]
        );
    }

    #[test]
    fn density_examples() {
        let cst = rat(-5, 2);
        let z = PredictableField::from_dense(1, [c(cst.clone())]).unwrap();
        let got = density_truncated(&z, &[2, 0]).unwrap();
        let expect = ChaosElement::one()
            + xi(1).scale(&cst)
            + ChaosElement::hermite_1d(2, 1).scale(&(&cst * &cst * rat(1, 2)));
        assert_eq!(got, expect);
        assert_eq!(
            density_truncated(&PredictableField::zero(2), &[3, 3, 3, 3]).unwrap(),
            ChaosElement::one()
        );
    }

    #[test]
    fn creation_powers_factor_through_coefficients() {
        // (D*_{z_k})^n 1 = z_k^n·H_n(ξ_k)
        let z = PredictableField::from_dense(1, [c(rat(1, 3)), xi(1) + c(int(2))]).unwrap();
        for k in 1..=2 {
            let zk = z.component(k);
            for n in 0..=4 {
                let iterated = creation_power_one(&zk, k, n);
                let closed = zk.pow(n).multiply(&ChaosElement::hermite_1d(n, k));
                assert_eq!(iterated, closed, "k = {k}, n = {n}");
            }
        }
    }

    #[test]
    fn mg_examples() {
        let z = PredictableField::from_dense(1, [ChaosElement::zero(), xi(1)]).unwrap();
        let r = verify_mg(&mono(MonomialForm::var(2).pow(2)), &z).unwrap();
        assert_eq!((r.lhs.as_str(), r.rhs.as_str(), r.pass), ("1", "1", true));
        assert_eq!(r.stages.len(), 3);
        let r = verify_mg(&ChaosElement::one(), &z).unwrap();
        assert_eq!((r.lhs.as_str(), r.pass), ("1", true));
        let z = PredictableField::from_dense(1, [c(rat(1, 2))]).unwrap();
        let r = verify_mg(&xi(1), &z).unwrap();
        assert_eq!((r.lhs.as_str(), r.rhs.as_str(), r.pass), ("0", "0", true));
    }

    #[test]
    fn translate_equals_joint_substitution() {
        let z = PredictableField::from_dense(
            2,
            [c(int(1)), xi(1), xi(1).multiply(&xi(2)), c(rat(1, 2))],
        )
        .unwrap();
        let f =
            mono(&(&MonomialForm::var(3) * &MonomialForm::var(2)) + &MonomialForm::var(4).pow(2))
                + xi(1);
        let map: BTreeMap<_, _> = z
            .field()
            .components()
            .map(|(k, zk)| (k, xi(k) - zk.clone()))
            .collect();
        assert_eq!(
            ordered_translate(&f, &z, Sign::Minus).unwrap(),
            f.substitute(&map)
        );
    }
}
