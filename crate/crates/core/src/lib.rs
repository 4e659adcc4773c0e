//! Random walks of distinguished customers (DCs) through a Jackson-type
//! queueing network.
//!
//! A model is a [`ModelSpec`]: sites, a variant tag fixing how DCs interact
//! (single walker, exclusion or zero-range) and which species are conserved,
//! the rate families, and truncation caps. From a spec the crate produces
//!
//! - the generator ([`generator::transitions`]),
//! - symmetry-condition reports ([`rates::validate_all`]),
//! - product-form weights and partition functions ([`stationary`]),
//! - detailed-balance residuals and a linear-solve oracle ([`verify`]),
//! - exact-clock trajectories ([`simulate`]).
//!
//! The core is generic over the floating point type; [`Spec`] and the other
//! aliases fix it to `f64`.

pub mod config;
pub mod enumerate;
pub mod error;
pub mod generator;
pub mod model;
pub mod rates;
pub mod scalar;
pub mod simulate;
pub mod stationary;
pub mod verify;

pub use error::{Error, Result};
pub use generator::{
    rate_of, reachable_states, total_rate, transitions, truncated_transitions, Reachable,
    Transition, TransitionKind, TransitionSet,
};
pub use model::{
    apply_edit, state_dimension, Boundary, Dimension, Edit, Limits, ModelSpec, NetworkState,
    ParticleKind, SiteGraph, Tolerances, Truncation, Variant, VariantTag,
};
pub use rates::{ArrayName, Gauge, Intensity, JumpArray, LeapArray, RateFamilies};
pub use scalar::Scalar;

pub type Spec = ModelSpec<f64>;
pub type Rates = RateFamilies<f64>;
pub type SpecF32 = ModelSpec<f32>;
pub type RatesF32 = RateFamilies<f32>;
