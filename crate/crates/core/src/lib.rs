//! Contiguous (type-1) frequency-domain resource allocation for a single
//! downlink cell.
//!
//! The crate is organised bottom-up:
//!
//! - [`resource`]: bandwidth parts, contiguous allocations, RIV coding and
//!   structural validation of per-slot decisions.
//! - [`link`]: CQI tables, effective MCS reduction and transport block sizes.
//! - [`metrics`]: M-LWDF, proportional-fair and sum-rate weights plus the
//!   historical average rate filter.
//! - [`schedulers`]: JADE, DASE, DATE, LEAP, the RBG-level type-0 greedy and
//!   an exhaustive type-1 oracle.
//! - [`traffic`]: packet queues, arrival processes and delay-based drops.
//! - [`sim`]: the synthetic channel process and the per-slot simulation loop.
//! - [`experiment`]: run configuration, sweeps and result files.

// `!(x < y)` comparisons are deliberate: they treat NaN as failing.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiment;
pub mod link;
pub mod metrics;
pub mod resource;
pub mod schedulers;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
