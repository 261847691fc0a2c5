//! Dense complex linear algebra, generic over the floating-point scalar.
//!
//! All exponentials in this crate are of Hermitian operators, so they go
//! through [`herm_eig`] rather than a scaling-and-squaring scheme.

mod cmat;
mod eig;
mod ops;
pub mod optimize;
pub mod random;
mod rmat;
pub mod vector;

pub use cmat::CMat;
pub use eig::{herm_eig, hermitian_tolerance, unitary_exp, HermitianEig};
pub use ops::{kron, kron_vec, partial_trace};
pub use rmat::RMat;

/// Tolerances used across the library. Physics assertions default to 1e-10,
/// linear-algebra self-consistency to 1e-12.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub physics: f64,
    pub linalg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            physics: 1e-10,
            linalg: 1e-12,
        }
    }
}

impl Tolerances {
    /// Environment variable that overrides the physics tolerance.
    pub const ENV_VAR: &'static str = "SU2M_TOL";

    /// Defaults, with `SU2M_TOL` overriding the physics tolerance when it parses
    /// as a positive finite number.
    pub fn from_env() -> Self {
        let mut tol = Self::default();
        if let Ok(raw) = std::env::var(Self::ENV_VAR) {
            if let Ok(v) = raw.trim().parse::<f64>() {
                if v.is_finite() && v > 0.0 {
                    tol.physics = v;
                }
            }
        }
        tol
    }
}
