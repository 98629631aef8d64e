//! P-, P*- and horizontal-P-transform pipelines for flat Lagrangian
//! submanifolds of C^n and horizontal constant-curvature submanifolds of the
//! sphere.

pub mod spec;
pub mod systems;
pub mod transform;

pub use spec::{PTransformSpec, PVariant};
pub use systems::{integrate_system_p, pstar_conservation_defect};
pub use transform::{
    apply_p_transform, apply_pstar_transform, check_horizontal, check_lagrangian,
    omega_from_lyapunov, t_omega_defect,
};
