use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::rational::{to_text, Rational};

/// Which identity a report checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// Cameron–Martin, `E[e^{D_θ}F] = E[F·e^{D*_θ}1]`.
    Cm,
    /// `E[D_θF·G] = E[F·D*_θG]`.
    Adjoint,
    /// `E[L_n^Z F] = E[Ĥ_n(I(Z), ‖Z‖²)·F]`.
    Ln,
    /// Expectation form of `Σ_n L_n^Z/n! = 1 + ℰ·(1 − ẽ^{D_{−Z}})`.
    Density,
    /// Maruyama–Girsanov for Haar-simple predictable fields.
    Mg,
    /// `Tr((DZ)^n) = 0` for every `n` up to the dimension.
    Nilpotency,
    McCm,
    McMg,
}

/// One intermediate equality of a telescoping check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: u32,
    pub value: String,
    pub pass: bool,
}

/// Monte Carlo summary of one side of an identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// `|mean − exact| / stderr` against the exact rational value; zero when
    /// both the deviation and the stderr vanish.
    pub sigma_distance: f64,
}

/// Outcome of one identity check, exact or statistical.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub identity: Identity,
    pub instance_id: u64,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<StageCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs_estimate: Option<SideEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs_estimate: Option<SideEstimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<Box<VerificationReport>>,
}

impl VerificationReport {
    /// Exact comparison; passes iff the two rationals are equal.
    pub fn exact(identity: Identity, lhs: &Rational, rhs: &Rational) -> Self {
        VerificationReport {
            identity,
            instance_id: 0,
            lhs: to_text(lhs),
            rhs: to_text(rhs),
            pass: lhs == rhs,
            params: Map::new(),
            context: None,
            stages: Vec::new(),
            lhs_estimate: None,
            rhs_estimate: None,
            exact: None,
        }
    }

    pub fn with_id(mut self, id: u64) -> Self {
        self.instance_id = id;
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("report parameters serialize");
        self.params.insert(key.to_string(), v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

/// Runs `check` over `items` on the current rayon pool and returns the reports
/// ordered by position, stamping each with its index as `instance_id`.
pub fn verify_batch<T, F>(items: &[T], check: F) -> Vec<VerificationReport>
where
    T: Sync,
    F: Fn(&T) -> VerificationReport + Sync,
{
    use rayon::prelude::*;
    items
        .par_iter()
        .enumerate()
        .map(|(i, item)| check(item).with_id(i as u64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn exact_report_json() {
        let r = VerificationReport::exact(Identity::Cm, &int(2), &int(2))
            .with_id(7)
            .with_param("order", 2);
        assert!(r.pass);
        assert_eq!(
            r.to_json(),
            r#"{"identity":"cm","instance_id":7,"lhs":"2","rhs":"2","pass":true,"params":{"order":2}}"#
        );
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        let fail = VerificationReport::exact(Identity::Ln, &int(2), &rat(3, 1));
        assert!(!fail.pass);
    }

    #[test]
    fn batch_is_ordered() {
        let items: Vec<i64> = (0..50).collect();
        let reports = verify_batch(&items, |&n| {
            VerificationReport::exact(Identity::Adjoint, &int(n), &int(n))
        });
        for (i, r) in reports.iter().enumerate() {
            assert_eq!(r.instance_id, i as u64);
            assert_eq!(r.lhs, i.to_string());
        }
    }
}
