//! Random translations `W ↦ W + Z(W)` and the change-of-measure identities
//! attached to them.
//!
//! * [`field`]: chaos-valued fields `Z`, the Haar frame, predictability, the
//!   Jacobian `DZ` and its nilpotency.
//! * [`tensor`]: `D_Z^{⊗n}`, the nonlinear translation `ẽ^{D_Z}`, the
//!   two-variable Hermite polynomials `Ĥ_n` and the operators `L_n^Z`.
//! * [`haar`]: ordered products of one-step exponentials along a Haar level
//!   and the exact Maruyama–Girsanov check.

pub mod field;
pub mod haar;
pub mod tensor;

pub use field::{
    field_norm_sq, jacobian, nilpotency_check, validate_predictable, wiener_integral, ChaosField,
    HaarFrame, JacobianMatrix, NilpotencyReport, PredictableField, Violation,
};
pub use haar::{
    creation_power_one, density_truncated, ordered_translate, required_orders, verify_mg, Sign,
};
pub use tensor::{
    d_tensor, density_profile, hermite_hat, l_operator, l_operator_expectation, pairing_saturation,
    tilde_exp, verify_density_expansion, verify_ln_duality, HatLadder, Hypotheses,
};
