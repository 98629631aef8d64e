//! Principal-coordinate data on uniform grids: residual checks of the
//! nonlinear systems, moving-frame integration, numeric curvature and
//! sphere-containment measures.

pub mod curvature;
pub mod field;
pub mod frame;
pub mod grid;
pub mod principal;
pub mod sphere;
pub mod stencil;
pub mod sweep;

pub use curvature::{numeric_sectional_curvature, CurvatureReport};
pub use field::{MatField, ScalarField, VecField};
pub use frame::{apply_j, integrate_frame, FrameInit, ImmersionField};
pub use grid::Grid;
pub use principal::{
    h_slot, h_symmetry_defect, residual_system, PrincipalData, PrincipalKind, ResidualReport,
};
pub use sphere::{sphere_deviation_data, sphere_deviation_field};
pub use sweep::{eval_field, sweep_integrate, CoefficientProvider};
