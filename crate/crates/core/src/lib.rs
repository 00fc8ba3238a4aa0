//! Pulsed continuous-variable quantum memory: squeezed light is written
//! into the collective ground-state spin of an atomic ensemble in a cavity,
//! stored, and read out into a temporal mode that differs from the read
//! pulse.
//!
//! - [`profiles`]: control-pulse envelopes, pulse areas, `erf`, Lambert W
//!   and adaptive quadrature.
//! - [`model`]: parameter derivation and closed-form write/read quantities.
//! - [`kernels`]: two-time output correlation kernels.
//! - [`homodyne`]: temporal modes, homodyne variances and efficiencies.
//! - [`oracle`]: covariance propagation of the full and reduced linear
//!   stochastic systems, used to check every closed form independently.
//! - [`toycavity`]: the equivalent empty cavity with variable transmission.

pub mod error;
pub mod homodyne;
pub mod kernels;
pub mod model;
pub mod oracle;
pub mod profiles;
pub mod toycavity;

pub use error::{Error, Result};
