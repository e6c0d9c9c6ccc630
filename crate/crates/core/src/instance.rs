//! Seeded random instances for the exact verifiers.
//!
//! Generation is sparse on purpose: the cost of the Girsanov-side checks grows
//! quickly with the number of terms in each `z_k`, so components carry at most
//! two terms and about half of them vanish.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::ChaosElement;
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::girsanov::{
    field_norm_sq, nilpotency_check, validate_predictable, verify_density_expansion,
    verify_ln_duality, verify_mg, ChaosField, HatLadder, Hypotheses, PredictableField,
};
use crate::index::{Coord, MultiIndex};
use crate::malliavin::{verify_adjoint, verify_cm};
use crate::rational::{int, rat, Rational};
use crate::report::{Identity, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cm,
    Adjoint,
    Mg,
    Ln,
    Density,
    Nilpotency,
}

impl std::str::FromStr for Kind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "cm" => Kind::Cm,
            "adjoint" => Kind::Adjoint,
            "mg" => Kind::Mg,
            "ln" => Kind::Ln,
            "density" => Kind::Density,
            "nilpotency" | "nilpotent" => Kind::Nilpotency,
            other => return Err(format!("unknown instance kind `{other}`")),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: Kind,
    /// Upper bound on the total order of `F` and `G`.
    pub degree: u32,
    /// Coordinates `1..=coords` available to `F`, `G` and `θ` when no field is involved.
    pub coords: u32,
    /// Haar level of the field; the field has `2^level` components.
    pub level: u32,
    /// Upper bound on the total order of each `z_k`.
    pub field_degree: u32,
    /// Integer coefficients are drawn from `[-coeff, coeff]`.
    pub coeff: i64,
    /// Upper bound on `n` for `L_n` instances.
    pub max_n: u32,
    /// Require at least one nonconstant component.
    pub nonconstant_field: bool,
    /// Produce a field that depends on its own or later increments.
    pub anticipating: bool,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(kind: Kind, seed: u64) -> Self {
        InstanceSpec {
            kind,
            degree: 4,
            coords: 4,
            level: 1,
            field_degree: 2,
            coeff: 9,
            max_n: 5,
            nonconstant_field: false,
            anticipating: false,
            seed,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InfeasibleSpec(m.to_string()));
        if self.degree == 0 || self.coords == 0 || self.coeff <= 0 {
            return bad("degree, coords and coeff must be positive");
        }
        if self.level > 6 {
            return bad("level above 6 is not supported by the generator");
        }
        let fielded = matches!(
            self.kind,
            Kind::Mg | Kind::Ln | Kind::Density | Kind::Nilpotency
        );
        if fielded
            && self.nonconstant_field
            && !self.anticipating
            && (self.level == 0 || self.field_degree == 0)
        {
            return bad("a predictable field with a nonconstant component needs level ≥ 1 and field_degree ≥ 1");
        }
        if self.anticipating {
            if !matches!(
                self.kind,
                Kind::Ln | Kind::Nilpotency | Kind::Mg | Kind::Density
            ) {
                return bad("anticipating probes exist only for field kinds");
            }
            if self.field_degree == 0 {
                return bad("an anticipating field needs field_degree ≥ 1");
            }
            if self.kind == Kind::Nilpotency && self.level == 0 {
                return bad("a one-component field has a nilpotent Jacobian unless z_1 depends on ξ_1 alone; use level ≥ 1");
            }
        }
        if self.kind == Kind::Ln && self.max_n == 0 {
            return bad("max_n must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub kind: Kind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<ChaosElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ChaosElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<PredictableField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub anticipating: bool,
}

struct Gen {
    rng: ChaCha8Rng,
    coeff: i64,
}

impl Gen {
    fn nonzero_int(&mut self) -> Rational {
        loop {
            let c = self.rng.random_range(-self.coeff..=self.coeff);
            if c != 0 {
                return int(c);
            }
        }
    }

    fn small_rational(&mut self) -> Rational {
        let p = self.rng.random_range(-2i64..=2);
        let q = self.rng.random_range(1i64..=2);
        if p == 0 {
            rat(1, q)
        } else {
            rat(p, q)
        }
    }

    /// Random multi-index of total order `≤ max_order` over `coords`.
    fn index(&mut self, coords: &[Coord], max_order: u32) -> MultiIndex {
        let order = self.rng.random_range(0..=max_order);
        let mut pairs = Vec::new();
        for _ in 0..order {
            pairs.push((coords[self.rng.random_range(0..coords.len())], 1));
        }
        MultiIndex::new(pairs)
    }

    /// `F` with up to `max_terms` terms, one of them of order exactly `degree`.
    fn element(&mut self, coords: &[Coord], degree: u32, max_terms: usize) -> ChaosElement {
        let terms = self.rng.random_range(1..=max_terms);
        let mut out = ChaosElement::zero();
        for t in 0..terms {
            let mut a = self.index(coords, degree);
            if t == 0 {
                while a.order() < degree {
                    a = a.add(&MultiIndex::unit(
                        coords[self.rng.random_range(0..coords.len())],
                    ));
                }
            }
            out += &ChaosElement::term(a, self.nonzero_int());
        }
        out
    }

    fn direction(&mut self, coords: u32) -> Direction {
        let count = self.rng.random_range(1..=coords);
        let mut v = Vec::new();
        for _ in 0..count {
            let k = self.rng.random_range(1..=coords);
            let p = self.rng.random_range(-self.coeff..=self.coeff);
            let q = self.rng.random_range(1..=3);
            v.push((k, rat(p, q)));
        }
        Direction::new(v)
    }

    /// Component `z_k` over `coords` with at most two terms.
    fn component(&mut self, coords: &[Coord], max_order: u32) -> ChaosElement {
        let mut out = ChaosElement::zero();
        for _ in 0..self.rng.random_range(1..=2) {
            let a = if coords.is_empty() {
                MultiIndex::empty()
            } else {
                self.index(coords, max_order)
            };
            out += &ChaosElement::term(a, self.small_rational());
        }
        out
    }

    fn predictable(&mut self, spec: &InstanceSpec) -> ChaosField {
        let dim = 1u32 << spec.level;
        loop {
            let mut comps = Vec::new();
            for k in 1..=dim {
                if !self.rng.random_bool(0.5) {
                    continue;
                }
                let lower: Vec<Coord> = (1..k).collect();
                comps.push((k, self.component(&lower, spec.field_degree)));
            }
            let field = ChaosField::new(comps);
            if !spec.nonconstant_field || field.degree() > 0 {
                return field;
            }
        }
    }

    /// A field with at least one component reading its own or a later increment.
    fn anticipating(&mut self, spec: &InstanceSpec) -> ChaosField {
        let dim = 1u32 << spec.level;
        let all: Vec<Coord> = (1..=dim).collect();
        loop {
            let mut comps = Vec::new();
            for k in 1..=dim {
                if self.rng.random_bool(0.5) {
                    comps.push((k, self.component(&all, spec.field_degree)));
                }
            }
            let field = ChaosField::new(comps);
            let z = PredictableField::new(spec.level, field.clone()).expect("labels fit the level");
            if validate_predictable(&z).is_err() {
                return field;
            }
        }
    }
}

/// Deterministic instance from a spec.
pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    spec.check()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        coeff: spec.coeff,
    };
    let mut inst = Instance {
        kind: spec.kind,
        seed: spec.seed,
        f: None,
        g: None,
        theta: None,
        z: None,
        n: None,
        anticipating: spec.anticipating,
    };
    let plain: Vec<Coord> = (1..=spec.coords).collect();
    let on_frame: Vec<Coord> = (1..=(1u32 << spec.level)).collect();
    let degree = spec.degree;
    match spec.kind {
        Kind::Cm => {
            inst.f = Some({
                let d = g.rng.random_range(1..=degree);
                g.element(&plain, d, 4)
            });
            inst.theta = Some(g.direction(spec.coords));
        }
        Kind::Adjoint => {
            inst.f = Some({
                let d = g.rng.random_range(1..=degree);
                g.element(&plain, d, 4)
            });
            inst.g = Some({
                let d = g.rng.random_range(1..=degree);
                g.element(&plain, d, 4)
            });
            inst.theta = Some(g.direction(spec.coords));
        }
        Kind::Mg | Kind::Ln | Kind::Density | Kind::Nilpotency => {
            let field = if spec.anticipating {
                g.anticipating(spec)
            } else {
                g.predictable(spec)
            };
            let field = if spec.kind == Kind::Nilpotency && spec.anticipating {
                let dim = on_frame.len();
                let mut field = field;
                while nilpotency_check(&field, dim).nilpotent {
                    field = g.anticipating(spec);
                }
                field
            } else {
                field
            };
            // Draw F over the coordinates the field moves or reads, so that the
            // checks see the field at all.
            let mut pool: Vec<Coord> = field.components().map(|(k, _)| k).collect();
            for (_, zk) in field.components() {
                pool.extend(zk.coords());
            }
            pool.sort_unstable();
            pool.dedup();
            if pool.is_empty() {
                pool = on_frame.clone();
            }
            if spec.kind != Kind::Nilpotency {
                let d = g.rng.random_range(1..=degree);
                let mut f = g.element(&pool, d, 3);
                if spec.kind == Kind::Ln {
                    let n = g.rng.random_range(1..=spec.max_n);
                    inst.n = Some(n);
                    // Overlap with Ĥ_n(I, Q) so the pairing is not trivially zero.
                    let hat = HatLadder::new(field.coordinate_sum(), field_norm_sq(&field))
                        .get(n)
                        .clone();
                    let support: Vec<&MultiIndex> = hat
                        .terms()
                        .map(|(a, _)| a)
                        .filter(|a| a.order() <= degree)
                        .collect();
                    if !support.is_empty() {
                        for _ in 0..2 {
                            let a = support[g.rng.random_range(0..support.len())].clone();
                            f += &ChaosElement::term(a, g.nonzero_int());
                        }
                    }
                }
                inst.f = Some(f);
            }
            inst.z = Some(PredictableField::new(spec.level, field)?);
        }
    }
    Ok(inst)
}

fn need<'a, T>(x: &'a Option<T>, what: &str) -> Result<&'a T> {
    x.as_ref()
        .ok_or_else(|| Error::InvalidField(format!("instance is missing `{what}`")))
}

/// Exact report for a nilpotency check: `lhs` is the first nonvanishing trace
/// (or `0`), `rhs` is `0`.
pub fn verify_nilpotency(z: &PredictableField) -> VerificationReport {
    let dim = z.dimension() as usize;
    let check = nilpotency_check(z.field(), dim);
    let first = check
        .traces
        .iter()
        .find(|t| !t.is_zero())
        .cloned()
        .unwrap_or_default();
    let mut r = VerificationReport::exact(
        Identity::Nilpotency,
        &Rational::default(),
        &Rational::default(),
    );
    r.lhs = first.to_string();
    r.pass = check.nilpotent;
    r.with_param("z", z).with_param(
        "traces",
        check
            .traces
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>(),
    )
}

/// Runs the verifier matching the instance kind.
pub fn verify_instance(inst: &Instance, hypotheses: Hypotheses) -> Result<VerificationReport> {
    let report = match inst.kind {
        Kind::Cm => verify_cm(need(&inst.f, "f")?, need(&inst.theta, "theta")?),
        Kind::Adjoint => verify_adjoint(
            need(&inst.f, "f")?,
            need(&inst.g, "g")?,
            need(&inst.theta, "theta")?,
        ),
        Kind::Mg => verify_mg(need(&inst.f, "f")?, need(&inst.z, "z")?)?,
        Kind::Ln => verify_ln_duality(
            need(&inst.f, "f")?,
            need(&inst.z, "z")?,
            *need(&inst.n, "n")?,
            hypotheses,
        )?,
        Kind::Density => verify_density_expansion(need(&inst.f, "f")?, need(&inst.z, "z")?)?,
        Kind::Nilpotency => verify_nilpotency(need(&inst.z, "z")?),
    };
    Ok(report.with_param("seed", inst.seed))
}
