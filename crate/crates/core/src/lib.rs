//! Spectral toolkit for quasiperiodic Jacobi operators.
//!
//! The crate covers the critical almost Mathieu operator and its chiral
//! (off-diagonal) representation:
//!
//! * [`contfrac`]: exact continued fractions and canonical approximants.
//! * [`model`]: coefficient families `(v, b)` and their sampling.
//! * [`spectral`]: Floquet band structure, direct-sum spectra, IDS, butterflies
//!   and half-line gap diagnostics.
//! * [`dynamics`]: transfer-matrix cocycles, Lyapunov exponents, Thouless formula.
//! * [`gauge`]: exact phase-monomial calculus for the chiral gauge transform.
//! * [`fractal`]: band covers, Hausdorff sums, dimension and scaling estimates.

pub mod contfrac;
pub mod dynamics;
pub mod error;
pub mod fractal;
pub mod gauge;
pub mod model;
pub mod spectral;

mod quad;

pub use contfrac::{CfExpansion, Convergent, DecimalReal, Fraction};
pub use error::{Error, Result};
pub use model::{CoefficientFamily, FamilyKind, SampledOperator, TrigPoly};
pub use spectral::{BandSet, SweepOptions};

/// Catalan's constant.
pub const CATALAN: f64 = 0.915_965_594_177_219_015_054_603_514_932_384_110_774;

/// Last's constant in `q |σ(M_{p/q})| < 8e`.
pub const LAST_BOUND: f64 = 8.0 * std::f64::consts::E;

/// Thouless' conjectured limit `32 C / π` of `q |σ(M_{p/q})|`.
pub fn thouless_constant() -> f64 {
    32.0 * CATALAN / std::f64::consts::PI
}
