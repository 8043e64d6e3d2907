//! Simulation and analysis of conditional state preparation in linear optics.
//!
//! The crate is layered bottom-up: [`fock`] holds the truncated Fock-space
//! algebra, [`gaussian`] builds squeezed sources and mode transforms,
//! [`mdhp`] evaluates multi-dimensional Hermite polynomials, [`detectors`]
//! models POVMs and cascades, and [`metrology`] and [`entanglement`] supply
//! figures of merit. [`experiments`], [`lithography`] and [`optimizer`] sit on
//! top, and [`cli`] drives everything from the command line.

// Guards such as `!(x > 0.0)` are written that way on purpose: they also
// reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod detectors;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod lithography;
pub mod mdhp;
pub mod metrology;
pub mod optimizer;

pub use error::{Error, Result};
