//! Free boundary fields, Dirichlet-to-Neumann maps, zeta-regularized determinants,
//! Gaussian free-field amplitudes and their gluing, boundary GMC potentials and the
//! Feynman-Kac semigroups of flat annuli and half-annuli.
//!
//! The deterministic numerics (fields, DN blocks, determinants, closed-form
//! amplitudes, Hermite basis) are generic over [`Scalar`]; the Gaussian-kernel
//! algebra and every Monte Carlo driver work in `f64`.

pub mod boundary_fields;
pub mod determinants;
pub mod error;
pub mod free_amplitudes;
pub mod gmc;
pub mod harmonic_dn;
pub mod quadrature;
pub mod rng;
pub mod scalar;
pub mod semigroup;
pub mod stats;

pub use error::{Error, Result};
pub use rng::RngStream;
pub use scalar::Scalar;
pub use stats::McEstimate;

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Circle field with `f64` coordinates.
pub type CircleField = boundary_fields::CircleField<f64>;
/// Half-circle (even) field with `f64` coordinates.
pub type HalfCircleField = boundary_fields::HalfCircleField<f64>;
/// Boundary field with `f64` coordinates.
pub type BoundaryField = boundary_fields::BoundaryField<f64>;
/// Cylinder geometry with `f64` modulus.
pub type CylinderGeometry = harmonic_dn::CylinderGeometry<f64>;
/// Dirichlet-to-Neumann operator with `f64` blocks.
pub type DnOperator = harmonic_dn::DnOperator<f64>;
/// Green kernel on an `f64` cylinder.
pub type GreenKernel = harmonic_dn::GreenKernel<f64>;
/// Determinant in `f64`.
pub type SpectralDeterminant = determinants::SpectralDeterminant<f64>;
/// Fredholm DN ratio in `f64`.
pub type FredholmRatio = determinants::FredholmRatio<f64>;
