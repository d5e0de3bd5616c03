//! Signature-aware linear algebra, finite differences, ODE integration and quadrature.

pub mod jet;
pub mod linalg;
pub mod ode;
pub mod quad;

pub use jet::{derivative, jet2, jet2_within, Jet2, JetValue, DEFAULT_JET_STEP};
pub use linalg::{
    complement_covector, determinant, inner, AmbientVector, Mat2, Signature, Vector, MAX_DIM,
};
pub use ode::{integrate_ode, DenseOutcome, DensePath, OdePath};
pub use quad::{quad, quad_tol, QUAD_TOLERANCE};
