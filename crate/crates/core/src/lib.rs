//! American vanilla options under the Black-Scholes model with interest
//! rates and dividend yields of either sign.
//!
//! A put with `q < r < 0` can have two exercise boundaries. This crate
//! computes them with the QD+ approximation, with fixed-point and
//! Gauss-Newton solvers of the two-boundary Kim integral equation on a
//! Chebyshev collocation, and with a TR-BDF2 finite-difference reference.
//! Calls go through the put-call symmetry.

pub mod bench;
pub mod blackscholes;
pub mod bounds;
pub mod dual;
pub mod error;
pub mod fdm;
pub mod kim;
pub mod qdplus;
pub mod region;
pub mod types;

pub use blackscholes::{european_price, european_theta, symmetric_put_params, MarketParams, OptionKind};
pub use error::{Error, Result};
pub use types::{BoundarySamples, PriceResult};
