//! Construction and verification of constant-curvature submanifolds via
//! vectorial Ribaucour transformations.
//!
//! The crate is organized around the transform pipeline:
//!
//! * [`matrixeq`] — the Sylvester-type admissibility system and the Lyapunov
//!   equation that pin down the base value of Ω, plus admissible-triple
//!   generation.
//! * [`geomgrid`] — principal-coordinate data on uniform grids, residual
//!   checks of the nonlinear PDE systems, moving-frame integration and
//!   numeric curvature.
//! * [`ribaucour`] — the linear systems R / R*, integration of Ω, and the
//!   vectorial L-transform with its inverse.
//! * [`lagrangian`] — P-, P*- and horizontal-P-transforms for flat Lagrangian
//!   and horizontal submanifolds.
//! * [`bianchi`] — decomposition into scalar steps and Bianchi cubes.
//! * [`vacuum`] — closed forms used as ground truth for the pipelines.
//! * [`fixtures`] — additional closed-form seeds for the curved and
//!   horizontal classes, used by tests and the verification suite.

pub mod bianchi;
pub mod dense;
pub mod error;
pub mod export;
pub mod fixtures;
pub mod geomgrid;
pub mod lagrangian;
pub mod matrixeq;
pub mod ribaucour;
pub mod tol;
pub mod vacuum;

pub use error::Error;
pub use tol::Tolerances;

pub type Result<T> = std::result::Result<T, Error>;
