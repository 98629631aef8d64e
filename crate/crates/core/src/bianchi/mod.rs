//! Bianchi cubes and the two-step decomposition of vectorial transforms.

pub mod cube;
pub mod decompose;

pub use cube::{
    build_cube_l, build_cube_p, omega_diagonal_defect, path_independence_defect, subset_comb,
    subset_omega, BianchiCube, CubeVertex,
};
pub use decompose::{decompose_transform, BarData};
