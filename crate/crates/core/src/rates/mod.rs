//! Rate families, running products and symmetry validators.

pub mod cumulative;
pub mod families;
pub mod validate;

pub use cumulative::{cumulative, Cumulative, CumulativeProducts};
pub use families::{
    ArrayName, Gauge, GaugeFn, Intensity, IntensityFn, JumpArray, JumpFn, LeapArray, LeapFn,
    Matrix, RateFamilies,
};
pub use validate::{
    validate_all, validate_beta, validate_environment_independence, validate_epsilon,
    validate_tau, validate_theta, Condition, ValidationReport, Violation,
};
