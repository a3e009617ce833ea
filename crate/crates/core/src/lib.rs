//! Eigenvalue asymptotics of the Robin Laplacian −Δ, ∂_ν u + γu = 0, in the
//! strong-coupling limit γ → −∞ on smooth planar domains.
//!
//! Three independent computation paths are provided and cross-validated:
//! closed-form asymptotic expansions, the formal correction/WKB recursions
//! that generate the expansion coefficients, and direct numerical
//! eigensolvers (effective boundary operator, 2D collar discretization).

pub mod corrections;
pub mod expansion;
pub mod fitting;
pub mod geometry;
pub mod model1d;
pub mod scalar;
pub mod series;
pub mod solvers;
pub mod spectral_basis;
pub mod wkb;

pub use geometry::{
    arc_length_reparam, check_assumption_a, localize_max, AssumptionReport, CurvatureProfile,
    GeometryError, ParametricCurve,
};
