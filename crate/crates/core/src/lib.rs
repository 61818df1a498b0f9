//! Monte Carlo construction and verification of classical and buffered
//! environmental contours.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] defines the joint long-term metocean distribution (three-parameter
//!   Weibull wave height with a conditional lognormal wave period) and a
//!   bivariate normal test model, both sampled through seeded, chunked streams.
//! * [`risk`] holds empirical risk measures on scalar samples: quantiles,
//!   superquantiles, failure and buffered failure probabilities and
//!   return-period arithmetic.
//! * [`contour`] projects a sample onto a direction grid, estimates the
//!   quantile and tail-mean support values and intersects the supporting
//!   halfplanes into contour polygons.
//! * [`verify`] re-simulates fresh samples to check that a contour attains its
//!   target (buffered) exceedence probability, and carries the analytic normal
//!   oracle used to cross-check the risk module.

// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contour;
pub mod error;
pub mod model;
pub mod risk;
pub mod stream;
pub mod verify;

pub use error::{Error, Result};
