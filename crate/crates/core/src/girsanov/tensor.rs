//! Tensor derivatives along a random field and the operators `L_n^Z`.
//!
//! `D_Z^{⊗n} = Σ_{i_1…i_n} Z_{i_1}···Z_{i_n}·D_{e_{i_1}}···D_{e_{i_n}}` keeps
//! every coefficient outside the derivatives. Because the `D_{e_i}` commute on
//! polynomials the sum is taken over sorted index multisets with multinomial
//! weights.
//!
//! `Ĥ_n(x, t)` are the homogeneous Hermite polynomials of the generating
//! function `exp(λx − λ²t/2)`, so `Ĥ_n(x, 1) = H_n(x)`. With
//! `I(Z) = Σ_k z_k·ξ_k` and `Q(Z) = ‖Z‖²`,
//!
//! `L_0^Z = id`, `L_n^Z = −Σ_{k=1}^n C(n,k)·Ĥ_{n−k}(I, Q)·D_{−Z}^{⊗k}`.
//!
//! For predictable `Z` these satisfy `E[L_n^Z F] = E[Ĥ_n(I, Q)·F]`.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::chaos::ChaosElement;
use crate::error::Result;
use crate::index::Coord;
use crate::malliavin::{inv_factorial, warn_degree};
use crate::rational::{binomial, factorial, Rational};
use crate::report::{Identity, VerificationReport};

use super::field::{field_norm_sq, ChaosField, PredictableField};

/// `D_Z^{⊗n} F`. Zero when `n > deg F`.
pub fn d_tensor(f: &ChaosElement, z: &ChaosField, n: u32) -> ChaosElement {
    if n == 0 {
        return f.clone();
    }
    if n > f.degree() {
        return ChaosElement::zero();
    }
    let active: Vec<(Coord, u32, &ChaosElement)> = z
        .components()
        .filter_map(|(k, zk)| {
            let d = f.degree_in(k);
            (d > 0).then_some((k, d, zk))
        })
        .collect();
    let mut out = ChaosElement::zero();
    let mut walk = TensorWalk {
        active: &active,
        n_factorial: factorial(n),
        out: &mut out,
    };
    walk.visit(0, n, f.clone(), ChaosElement::one(), BigInt::one());
    out
}

struct TensorWalk<'a> {
    active: &'a [(Coord, u32, &'a ChaosElement)],
    n_factorial: BigInt,
    out: &'a mut ChaosElement,
}

impl TensorWalk<'_> {
    /// Chooses how many of the remaining derivatives fall on `active[pos]`.
    fn visit(
        &mut self,
        pos: usize,
        remaining: u32,
        deriv: ChaosElement,
        coeff: ChaosElement,
        mult: BigInt,
    ) {
        if remaining == 0 {
            let w = Rational::new(self.n_factorial.clone(), mult);
            *self.out += &coeff.multiply(&deriv).scale(&w);
            return;
        }
        if pos == self.active.len() || deriv.is_zero() {
            return;
        }
        let (k, max_k, zk) = self.active[pos];
        let mut d = deriv;
        let mut c = coeff;
        let mut m = mult.clone();
        for count in 0..=remaining.min(max_k) {
            if count > 0 {
                d = d.partial(k);
                if d.is_zero() {
                    break;
                }
                c = c.multiply(zk);
                m *= count;
            }
            self.visit(pos + 1, remaining - count, d.clone(), c.clone(), m.clone());
        }
    }
}

/// `ẽ^{D_Z} F = Σ_{n ≤ deg F} D_Z^{⊗n} F / n!`, which equals `F(ξ + Z(ξ))`.
pub fn tilde_exp(f: &ChaosElement, z: &ChaosField) -> ChaosElement {
    let mut out = ChaosElement::zero();
    for n in 0..=f.degree() {
        out += &d_tensor(f, z, n).scale(&inv_factorial(n));
    }
    out
}

/// `Ĥ_n(x, t)` composed in the chaos algebra:
/// `Ĥ_0 = 1`, `Ĥ_1 = x`, `Ĥ_{n+1} = x·Ĥ_n − n·t·Ĥ_{n−1}`.
pub fn hermite_hat(n: u32, x: &ChaosElement, t: &ChaosElement) -> ChaosElement {
    HatLadder::new(x.clone(), t.clone()).get(n).clone()
}

/// Memoized `Ĥ_0(x, t), Ĥ_1(x, t), …` for fixed arguments.
#[derive(Clone, Debug)]
pub struct HatLadder {
    x: ChaosElement,
    t: ChaosElement,
    rungs: Vec<ChaosElement>,
}

impl HatLadder {
    pub fn new(x: ChaosElement, t: ChaosElement) -> Self {
        let rungs = vec![ChaosElement::one(), x.clone()];
        HatLadder { x, t, rungs }
    }

    /// `Ĥ_n(I(Z), ‖Z‖²)` for a predictable field.
    pub fn for_field(z: &PredictableField) -> Result<Self> {
        Ok(Self::new(
            super::wiener_integral(z)?,
            field_norm_sq(z.field()),
        ))
    }

    fn unchecked(z: &ChaosField) -> Self {
        Self::new(z.coordinate_sum(), field_norm_sq(z))
    }

    pub fn get(&mut self, n: u32) -> &ChaosElement {
        while self.rungs.len() <= n as usize {
            let m = self.rungs.len() - 1;
            let next = self.x.multiply(&self.rungs[m])
                - self
                    .t
                    .multiply(&self.rungs[m - 1])
                    .scale(&Rational::from_integer(m.into()));
            self.rungs.push(next);
        }
        &self.rungs[n as usize]
    }
}

/// Whether an operation may run on fields that fail the predictability check.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Hypotheses {
    #[default]
    Enforce,
    /// Compute anyway; reports are always marked failed.
    AllowAnticipating,
}

pub const OUTSIDE_HYPOTHESES: &str = "outside theorem hypotheses: anticipating field";

/// `L_n^Z F`.
pub fn l_operator(f: &ChaosElement, z: &PredictableField, n: u32) -> Result<ChaosElement> {
    let mut ladder = HatLadder::for_field(z)?;
    Ok(l_operator_with(f, z.field(), n, &mut ladder))
}

fn l_operator_with(
    f: &ChaosElement,
    z: &ChaosField,
    n: u32,
    ladder: &mut HatLadder,
) -> ChaosElement {
    if n == 0 {
        return f.clone();
    }
    let mut out = ChaosElement::zero();
    for k in 1..=n.min(f.degree()) {
        let dk = d_tensor(f, z, k);
        if dk.is_zero() {
            continue;
        }
        // −C(n,k)·(−1)^k = (−1)^{k+1}·C(n,k)
        let mut w = Rational::from_integer(binomial(n, k));
        if k % 2 == 0 {
            w = -w;
        }
        out += &ladder.get(n - k).multiply(&dk).scale(&w);
    }
    out
}

/// `E[L_n^Z F]`, evaluated as `Σ_k (−1)^{k+1}·C(n,k)·⟨Ĥ_{n−k}, D_Z^{⊗k}F⟩`
/// without forming the products.
pub fn l_operator_expectation(f: &ChaosElement, z: &PredictableField, n: u32) -> Result<Rational> {
    let mut ladder = HatLadder::for_field(z)?;
    Ok(l_expectation_with(f, z.field(), n, &mut ladder))
}

fn l_expectation_with(
    f: &ChaosElement,
    z: &ChaosField,
    n: u32,
    ladder: &mut HatLadder,
) -> Rational {
    if n == 0 {
        return f.expectation();
    }
    let mut acc = Rational::zero();
    for k in 1..=n.min(f.degree()) {
        let dk = d_tensor(f, z, k);
        if dk.is_zero() {
            continue;
        }
        let mut w = Rational::from_integer(binomial(n, k));
        if k % 2 == 0 {
            w = -w;
        }
        acc += w * ladder.get(n - k).inner_product(&dk);
    }
    acc
}

/// Checks `E[L_n^Z F] = E[Ĥ_n(I(Z), ‖Z‖²)·F]` exactly.
///
/// With [`Hypotheses::AllowAnticipating`] a non-predictable field is evaluated
/// with `I(Z) = Σ_k z_k·ξ_k` regardless and the report always fails.
pub fn verify_ln_duality(
    f: &ChaosElement,
    z: &PredictableField,
    n: u32,
    hypotheses: Hypotheses,
) -> Result<VerificationReport> {
    warn_degree("verify_ln_duality", f);
    let anticipating = match z.ensure_predictable() {
        Ok(()) => false,
        Err(e) if hypotheses == Hypotheses::Enforce => return Err(e),
        Err(_) => true,
    };
    let mut ladder = HatLadder::unchecked(z.field());
    let lhs = l_expectation_with(f, z.field(), n, &mut ladder);
    let rhs = ladder.get(n).inner_product(f);
    let mut report = VerificationReport::exact(Identity::Ln, &lhs, &rhs)
        .with_param("f", f)
        .with_param("z", z)
        .with_param("n", n);
    if anticipating {
        report.pass = false;
        report.context = Some(OUTSIDE_HYPOTHESES.to_string());
    }
    Ok(report)
}

/// Bookkeeping for pairings with the exponential density.
///
/// `ℰ = exp(I − Q/2) = Σ_m Ĥ_m(I, Q)/m!` and, for a step field,
/// `Ĥ_m(I, Q)/m! = Σ_{|ν| = m} Π_k z_k^{ν_k}·H_{ν_k}(ξ_k)/ν_k!`.
/// Integrating out the highest coordinate first (nothing else depends on it)
/// shows a term `ν` can only pair nontrivially with `G` when
/// `ν_j ≤ deg_j(G) + Σ_{k>j} ν_k·deg_j(z_k)`, and never above the running total
/// degree. The returned `M` bounds `|ν|`, so `E[Ĥ_m(I, Q)·G] = 0` for `m > M`.
pub fn pairing_saturation(g: &ChaosElement, z: &PredictableField) -> u32 {
    let top = z.dimension().max(g.max_coord().unwrap_or(0));
    let mut bounds: BTreeMap<Coord, u32> = BTreeMap::new();
    let mut total = g.degree();
    for j in (1..=top).rev() {
        let Some(zj) = z.field().get(j) else {
            continue;
        };
        let mut b = g.degree_in(j);
        for (&k, &bk) in bounds.range(j + 1..) {
            b += bk * z.field().get(k).map_or(0, |zk| zk.degree_in(j));
        }
        let b = b.min(total);
        total += b * zj.degree().saturating_sub(1);
        bounds.insert(j, b);
    }
    bounds.values().sum()
}

/// Pairings of `g` with the exponential density, degree by degree: entry `m`
/// is `E[g·Ĥ_m(I, Q)]/m!`. The vector stops at the last nonzero entry.
///
/// Uses `Ĥ_m(I, Q)/m! = Σ_{|ν| = m} Π_k z_k^{ν_k}·H_{ν_k}(ξ_k)/ν_k!` and
/// integrates coordinates out from the top: `ξ_j` appears in no `z_k` with
/// `k ≤ j`, so pairing against `H_ν(ξ_j)/ν!` just selects the `ξ_j`-order-`ν`
/// slice of the running element, which is then multiplied by `z_j^ν`.
pub fn density_profile(g: &ChaosElement, z: &PredictableField) -> Result<Vec<Rational>> {
    z.ensure_predictable()?;
    let top = z.dimension().max(g.max_coord().unwrap_or(0));
    let mut walk = ProfileWalk {
        z: z.field(),
        powers: BTreeMap::new(),
        profile: Vec::new(),
    };
    walk.visit(top, g.clone(), 0);
    while walk.profile.last().is_some_and(Zero::is_zero) {
        walk.profile.pop();
    }
    Ok(walk.profile)
}

struct ProfileWalk<'a> {
    z: &'a ChaosField,
    powers: BTreeMap<Coord, Vec<ChaosElement>>,
    profile: Vec<Rational>,
}

impl ProfileWalk<'_> {
    fn power(&mut self, j: Coord, n: u32) -> &ChaosElement {
        let zj = self.z.component(j);
        let ladder = self
            .powers
            .entry(j)
            .or_insert_with(|| vec![ChaosElement::one()]);
        while ladder.len() <= n as usize {
            let next = ladder.last().unwrap().multiply(&zj);
            ladder.push(next);
        }
        &ladder[n as usize]
    }

    fn visit(&mut self, j: Coord, g: ChaosElement, m: usize) {
        if g.is_zero() {
            return;
        }
        if j == 0 {
            if self.profile.len() <= m {
                self.profile.resize(m + 1, Rational::zero());
            }
            self.profile[m] += g.expectation();
            return;
        }
        let slices = g.split_by(j);
        if self.z.get(j).is_none() {
            if let Some(g0) = slices.into_iter().find_map(|(n, s)| (n == 0).then_some(s)) {
                self.visit(j - 1, g0, m);
            }
            return;
        }
        for (nu, slice) in slices {
            let next = if nu == 0 {
                slice
            } else {
                self.power(j, nu).multiply(&slice)
            };
            self.visit(j - 1, next, m + nu as usize);
        }
    }
}

#[derive(Serialize)]
struct DensityBookkeeping {
    series_order: u32,
    density_order: u32,
}

/// Checks the expectation form of `Σ_n L_n^Z/n! = 1 + ℰ·(1 − ẽ^{D_{−Z}})`:
///
/// `E[Σ_{n≤N} L_n^Z F/n!] = E[F] + ⟨ℰ_M, F − ẽ^{D_{−Z}}F⟩`
///
/// where `ℰ_M = Σ_{m≤M} Ĥ_m(I, Q)/m!`. `M` is the largest
/// [`pairing_saturation`] over the `D_{−Z}^{⊗k}F`, and `N = deg F + M`, which
/// makes both truncations exact.
///
/// Both sides are evaluated through [`density_profile`]; with
/// `D_{−Z}^{⊗k} = (−1)^k·D_Z^{⊗k}` the left side becomes
/// `E[F] − Σ_{k≥1} Σ_{j ≤ N−k} E[Ĥ_j·D_{−Z}^{⊗k}F]/(k!·j!)`.
pub fn verify_density_expansion(
    f: &ChaosElement,
    z: &PredictableField,
) -> Result<VerificationReport> {
    warn_degree("verify_density_expansion", f);
    z.ensure_predictable()?;
    let neg = z.field().negate();
    let d = f.degree();
    let tensors: Vec<ChaosElement> = (1..=d).map(|k| d_tensor(f, &neg, k)).collect();
    let density_order = tensors
        .iter()
        .map(|t| pairing_saturation(t, z))
        .max()
        .unwrap_or(0);
    let series_order = d + density_order;

    let mut lhs = f.expectation();
    for (k, t) in (1..=d).zip(&tensors) {
        let profile = density_profile(t, z)?;
        assert!(
            profile.len() <= density_order as usize + 1,
            "pairing saturation bound exceeded"
        );
        let w = inv_factorial(k);
        for (j, p) in profile.iter().enumerate() {
            if k + j as u32 <= series_order {
                lhs -= p * &w;
            }
        }
    }

    let correction = f - &tilde_exp(f, &neg);
    let profile = density_profile(&correction, z)?;
    assert!(
        profile.len() <= density_order as usize + 1,
        "pairing saturation bound exceeded"
    );
    let rhs = f.expectation() + profile.iter().sum::<Rational>();

    Ok(VerificationReport::exact(Identity::Density, &lhs, &rhs)
        .with_param("f", f)
        .with_param("z", z)
        .with_param(
            "truncation",
            DensityBookkeeping {
                series_order,
                density_order,
            },
        ))
}
