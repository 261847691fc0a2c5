//! Multiparameter SU(2) and SU(4) estimation: optimal probe states built from
//! trivial irreps of finite symmetry groups, quantum and classical Fisher
//! information, and measurement schemes that saturate the Cramér-Rao bound.
//!
//! The dense linear algebra in [`numerics`] is generic over the scalar type;
//! the physics layers work in double precision through the aliases below.

pub mod acceptance;
pub mod error;
pub mod groups;
pub mod measurement;
pub mod metrology;
pub mod numerics;
pub mod probes;
pub mod scalar;
pub mod spinrep;
pub mod state;
pub mod su4;
pub mod wigner;

pub use error::{Error, Result};
pub use numerics::Tolerances;
pub use scalar::Scalar;
pub use spinrep::{Axis, SpinRep};
pub use state::ProbeState;

/// Double-precision complex number.
pub type C64 = num_complex::Complex<f64>;
/// Double-precision complex matrix.
pub type CMatrix = numerics::CMat<f64>;
/// Double-precision real matrix.
pub type RMatrix = numerics::RMat<f64>;
/// Double-precision Hermitian eigendecomposition.
pub type HermEig = numerics::HermitianEig<f64>;
