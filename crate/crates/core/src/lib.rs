//! Finite orthogonal polynomials on the unit circle (OPUC).
//!
//! The crate builds paraorthogonal systems from truncated Verblunsky data,
//! assembles their CMV matrices, and implements the mirror-dual map together
//! with the persymmetric systems it fixes. Persymmetric systems are uniquely
//! determined by their spectrum; [`inverse::reconstruct_persymmetric`]
//! recovers them. Closed-form example families live in [`families`] and
//! double as analytic oracles for the generic machinery.
//!
//! ```
//! use opuc::{OpucSystem, VerblunskySequence, Complex};
//!
//! let v = VerblunskySequence::new(vec![Complex::new(0.3, 0.1)], Complex::new(1.0, 0.0)).unwrap();
//! let sys = OpucSystem::build(&v);
//! let nodes = sys.spectrum().unwrap();
//! let sd = sys.weights(&nodes).unwrap();
//! assert!(sys.orthogonality_residual(&sd) < 1e-12);
//! ```

pub mod cmv;
pub mod error;
pub mod families;
pub mod inverse;
pub mod mirror;
pub mod poly;
pub mod system;
pub mod tolerance;

pub use error::{OpucError, Result};
pub use poly::{lagrange_interpolate, Complex, Polynomial, UnitCirclePoint};
pub use system::{verblunsky_from_polys, OpucSystem, SpectralData, VerblunskySequence};
pub use tolerance::{Tolerances, TOL};

/// A global sign ±1, used for the ε ambiguity of square-root branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    /// `(-1)^k`.
    pub fn alternating(k: usize) -> Sign {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}
