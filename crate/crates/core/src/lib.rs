//! Classical and quantum analysis of the kicked p-spin family.
//!
//! The kicked p-spin is a collective spin of `N_s` spin-1/2 particles that
//! precesses about the y axis by an angle `alpha` and then receives a
//! nonlinear kick `exp(-i k/(p J^(p-1)) Jz^p)`. For `p = 2` it is the
//! quantum kicked top.
//!
//! The crate is split along the two halves of the problem:
//!
//! - [`classical`], [`stability`] and [`chaos`] work with the stroboscopic
//!   map on the unit sphere obtained in the `N_s -> infinity` limit.
//! - [`floquet`] and [`quantum`] build the Floquet unitary in the
//!   `(N_s + 1)`-dimensional symmetric subspace and measure spectral
//!   statistics, eigenvector localization and OTOC growth.
//!
//! [`scan`] evaluates any scalar diagnostic over a `(k, alpha)` grid with
//! deterministic seeding and resumable checkpoints, and [`dump`] is a small
//! binary container for operators and spectra.

// `!(x <= tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chaos;
pub mod classical;
pub mod dump;
mod error;
pub mod floquet;
mod params;
pub mod quantum;
pub mod scan;
pub mod seed;
pub mod stability;

pub use classical::{PhasePoint, TangentMatrix, Trajectory};
pub use error::{Error, Result};
pub use params::ModelParams;

pub use num_complex::Complex64;

/// Crate version, echoed into CLI provenance records.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
