//! Matrix-equation layer: operator eigenstructure, the Lyapunov equation
//! `P^t X + X P = C`, the Sylvester-type admissibility system, the `Z(c, c~)`
//! spectral classification and admissible-triple generation.

mod admissible;
mod lyapunov;
mod operator;
mod sylvester;
mod zset;

pub use admissible::generate_admissible_triple;
pub use lyapunov::{solve_lyapunov, solve_lyapunov_with, LyapunovSolution, LyapunovSolver};
pub use operator::{analyze_operator, Operator};
pub use sylvester::{
    solve_sylvester_system, solve_sylvester_system_with, AdmissibilityStatus,
    AdmissibilityVerdict, SylvesterSpec,
};
pub use zset::{in_d, z_interval, IntervalSet};
