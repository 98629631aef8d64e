//! The vectorial Ribaucour machinery: the linear systems R and R*, the Omega
//! field, the transform itself and its inverse.

pub mod comb;
pub mod omega;
pub mod systems;
pub mod transform;

pub use comb::{residual_comb, CombSystem, CombescureData};
pub use omega::{integrate_omega, omega_invariants, OmegaField};
pub use systems::{integrate_system_r, integrate_system_rstar, CombInit};
pub use transform::{
    apply_vectorial_ribaucour, inverse_transform_data, omega_base_value,
    transformed_principal_data, TransformBox, TransformOutput,
};
