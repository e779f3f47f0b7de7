//! Channel-selection stack for vehicular dynamic spectrum access (VDSA).
//!
//! A platoon of vehicles has a fixed budget of `N` sensing slots per
//! iteration to spread over `L` candidate frequency channels, each
//! characterized by its Channel Busy Ratio (CBR). The crate provides the
//! pieces needed to study and run best-channel selection under that budget:
//!
//! - [`model`]: channel/sensing data model, maximum-likelihood CBR
//!   estimation and lowest-estimate channel selection.
//! - [`bounds`]: exact discrete distributions of CBR estimates and
//!   lower/upper bounds on the probability of picking a best channel,
//!   plus a brute-force enumeration oracle.
//! - [`alloc`]: sensing-sample allocation strategies (equal, globally
//!   optimal, iteratively optimal, exponential heuristic).
//! - [`memory`]: windowed CBR estimation and SWA/EWMA smoothing.
//! - [`bumblebee`]: the switching decision with hysteresis cost and the
//!   full per-iteration sensing/decision loop.
//! - [`scenario`]: time-varying CBR traces and a desk-scale platoon
//!   evaluation with a packet-reception proxy.
//! - [`experiments`]: reproducible experiment drivers emitting CSV/JSON
//!   artifacts.
//!
//! All randomness is seeded; see [`seed`] for the sub-seed derivation
//! scheme used to keep multi-run experiments worker-count independent.

pub mod alloc;
pub mod bounds;
pub mod bumblebee;
mod error;
pub mod experiments;
pub mod memory;
pub mod model;
pub mod numeric;
pub mod rational;
pub mod scenario;
pub mod seed;

pub use error::{Error, Result};
