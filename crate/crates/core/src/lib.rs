//! Capacity-region bounds for two-user state-dependent multiple-access
//! channels where one encoder knows the interfering state noncausally and the
//! other only strictly causally.
//!
//! The crate provides:
//!
//! - exact finite-alphabet information quantities over dense joint tables
//!   ([`info`]),
//! - a validated channel/auxiliary-distribution data model with a text file
//!   format ([`channel`]),
//! - evaluation of every single-letter inner/outer rate bound for the
//!   discrete memoryless model ([`region`]),
//! - deterministic search over auxiliary distributions with support-function
//!   region tracing ([`search`]),
//! - closed forms and a brute-force oracle for the binary modulo-additive
//!   example ([`binary`]),
//! - the closed-form Gaussian capacity region over correlation coefficients
//!   ([`gauss`]),
//! - symbolic Fourier-Motzkin elimination over rate-inequality systems with
//!   entropy-atom constants ([`fme`]),
//! - small exact-enough 2D convex geometry for rate polygons ([`geom`]).
//!
//! The numeric core is generic over the scalar type via [`scalar::Real`]
//! (f32 or f64); the symbolic [`fme`] module uses exact rational arithmetic.
//! Concrete f64 aliases for the main types live at the crate root.

pub mod binary;
pub mod channel;
pub mod error;
pub mod fme;
pub mod gauss;
pub mod geom;
pub mod info;
pub mod region;
pub mod scalar;
pub mod search;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 pmf.
pub type Pmf = info::Pmf<f64>;
/// f64 dense joint distribution.
pub type Joint = info::JointPmf<f64>;
/// f64 state-dependent MAC.
pub type Channel = channel::DmMacChannel<f64>;
/// f64 auxiliary distribution.
pub type Aux = channel::AuxJoint<f64>;
/// f64 per-distribution rate-bound pair.
pub type Bounds = region::RateBounds<f64>;
/// f64 convex rate polygon.
pub type Polygon = geom::RatePolygon<f64>;
/// f64 Gaussian channel parameters.
pub type GaussParams = gauss::GaussianParams<f64>;
