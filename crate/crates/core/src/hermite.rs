//! Single-coordinate Hermite tables.
//!
//! Probabilists' Hermite polynomials, `H_0 = 1`, `H_1 = x`,
//! `H_{n+1} = x·H_n − n·H_{n−1}`. Everything multivariate is assembled
//! coordinate-wise from the tables in this module.

use num_bigint::BigInt;
use std::sync::{Arc, OnceLock};

use crate::rational::{binomial, factorial};

/// Default order cap for memoized single-coordinate products.
pub const DEFAULT_ORDER_CAP: u32 = 64;

/// Expansion of a single-coordinate product as `(order, integer weight)` pairs.
pub type Linearization = Arc<[(u32, BigInt)]>;

/// Memoized linearization coefficients
/// `H_m·H_n = Σ_k C(m,k)·C(n,k)·k!·H_{m+n−2k}` for `m, n ≤ cap`.
///
/// Products above the cap are computed on demand and not stored.
pub struct HermiteTable {
    cap: u32,
    cells: Vec<OnceLock<Linearization>>,
}

impl HermiteTable {
    pub fn new(cap: u32) -> Self {
        let side = cap as usize + 1;
        HermiteTable {
            cap,
            cells: (0..side * side).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Shared table with [`DEFAULT_ORDER_CAP`].
    pub fn global() -> &'static HermiteTable {
        static TABLE: OnceLock<HermiteTable> = OnceLock::new();
        TABLE.get_or_init(|| HermiteTable::new(DEFAULT_ORDER_CAP))
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn product(&self, m: u32, n: u32) -> Linearization {
        let (m, n) = if m <= n { (m, n) } else { (n, m) };
        if n > self.cap {
            return linearize(m, n);
        }
        let side = self.cap as usize + 1;
        self.cells[m as usize * side + n as usize]
            .get_or_init(|| linearize(m, n))
            .clone()
    }
}

fn linearize(m: u32, n: u32) -> Linearization {
    (0..=m.min(n))
        .map(|k| {
            let w = binomial(m, k) * binomial(n, k) * factorial(k);
            (m + n - 2 * k, w)
        })
        .collect()
}

/// Monomial coefficients of `H_n`: pairs `(power, coefficient)` with
/// `H_n(x) = Σ_k (−1)^k·n!/(k!·(n−2k)!·2^k)·x^{n−2k}`.
///
/// The coefficients are integers.
pub fn hermite_to_monomial(n: u32) -> Vec<(u32, BigInt)> {
    (0..=n / 2)
        .map(|k| {
            let mag = pairing_count(n, k);
            let c = if k % 2 == 0 { mag } else { -mag };
            (n - 2 * k, c)
        })
        .collect()
}

/// Hermite coefficients of `x^n`: `x^n = Σ_k n!/(k!·(n−2k)!·2^k)·H_{n−2k}`.
pub fn monomial_to_hermite(n: u32) -> Vec<(u32, BigInt)> {
    (0..=n / 2)
        .map(|k| (n - 2 * k, pairing_count(n, k)))
        .collect()
}

/// Number of ways to choose `k` disjoint pairs from `n` items.
fn pairing_count(n: u32, k: u32) -> BigInt {
    let mut den = factorial(k) * factorial(n - 2 * k);
    den <<= k as usize;
    factorial(n) / den
}

/// `H_0(x), …, H_n(x)` by the three-term recurrence.
pub fn eval_ladder(n: u32, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(x);
    for k in 1..n as usize {
        let next = x * out[k] - k as f64 * out[k - 1];
        out.push(next);
    }
}

pub fn eval(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Integer weight `C(n,k)` used by the binomial shift
/// `H_n(x + y) = Σ_k C(n,k)·H_{n−k}(x)·y^k`.
pub fn shift_weights(n: u32) -> Vec<BigInt> {
    (0..=n).map(|k| binomial(n, k)).collect()
}
