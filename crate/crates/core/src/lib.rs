//! Coded distributed convolution over a simulated mobile worker network.
//!
//! The [`coding`] module holds the numerical core (convolution, partitioning,
//! Vandermonde MDS encode/decode). [`models`] and [`engine`] simulate a master
//! offloading work to mobile workers, [`strategies`] implements the uncoded,
//! traditional coded and dynamic coded schedulers, and [`experiments`] runs
//! the comparison studies behind the `codeconv` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coding;
pub mod engine;
pub mod error;
pub mod experiments;
pub mod fmt;
pub mod models;
pub mod scenario;
pub mod strategies;

pub use error::{Error, Result};
