//! Exact Wiener chaos algebra and the Girsanov identities built on it.
//!
//! Random variables are finite sums `Σ_a c_a·H_a(ξ)` of products of
//! probabilists' Hermite polynomials in independent standard Gaussians
//! `ξ_1, ξ_2, …`, with exact rational coefficients. On top of that sit the
//! Malliavin derivative and its adjoint, the Cameron–Martin and
//! Maruyama–Girsanov identities for Haar-simple predictable fields, and a
//! Monte Carlo engine that checks the same identities statistically.
//!
//! ```
//! use wiener_chaos::{parse_expression, parse_direction, malliavin::verify_cm};
//!
//! let f = parse_expression("xi1^2").unwrap();
//! let theta = parse_direction("1*e1").unwrap();
//! let report = verify_cm(&f, &theta);
//! assert!(report.pass);
//! assert_eq!(report.lhs, "2");
//! ```

pub mod chaos;
pub mod direction;
pub mod error;
pub mod expr;
pub mod girsanov;
pub mod hermite;
pub mod index;
pub mod instance;
pub mod malliavin;
pub mod monomial;
pub mod montecarlo;
pub mod rational;
pub mod report;

pub use chaos::ChaosElement;
pub use direction::Direction;
pub use error::{Error, Result};
pub use expr::{parse_direction, parse_expression, ParseError};
pub use girsanov::{ChaosField, Hypotheses, PredictableField};
pub use index::{Coord, MultiIndex};
pub use monomial::MonomialForm;
pub use rational::Rational;
pub use report::{Identity, VerificationReport};
