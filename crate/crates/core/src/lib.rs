//! Numerical laboratory for Riemann theta functions on principally polarized
//! abelian varieties, centered on the question of how many points of order
//! two can sit on a translated theta divisor.
//!
//! The crate evaluates theta functions with half-integer characteristics to a
//! controlled truncation error, handles the exact combinatorics of the
//! two-torsion group, and classifies torsion points against translated
//! divisors so that the `2^{2g} - 2^g` count bound (and the stronger
//! `2^{2g} - (g+1)2^g` bound for irreducible non-symmetric translates) can be
//! checked experimentally, together with the extremal product-of-elliptic-
//! curves count `2^{2g} - 3^g`.
//!
//! The numerical kernel is generic over the floating scalar; `f64` is the
//! working precision and the aliases below fix it for downstream users.

// index loops here mirror the matrix formulas they implement
#![allow(clippy::needless_range_loop)]

pub mod divisor;
pub mod error;
pub mod families;
pub mod jacobian;
pub mod linalg;
pub mod scalar;
pub mod theta;
pub mod torsion;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar at working precision.
pub type C64 = num_complex::Complex<f64>;

/// Period matrix at working precision.
pub type RiemannMatrix64 = theta::RiemannMatrix<f64>;

/// Theta value with error bound at working precision.
pub type ThetaValue64 = theta::ThetaValue<f64>;

/// Divisor-side classification context at working precision.
pub type ThetaDivisor64<'a> = divisor::ThetaDivisor<'a, f64>;

/// Count report at working precision.
pub type CountReport64 = divisor::CountReport<f64>;
