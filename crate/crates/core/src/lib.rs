//! Finite-dimensional analysis of unitary premeasurement schemes.
//!
//! A scheme couples an object system `A` to an instrument `B` through a
//! unitary interaction, starting from a ready state of `B`. The crate
//! checks the calibration and nondemolition criteria, extracts state
//! transformers, classifies schemes, and handles measurements on one half
//! of an entangled pair.

pub mod distant;
pub mod error;
pub mod fixtures;
pub mod kinds;
pub mod observables;
pub mod qlin;
pub mod random;
pub mod scheme;
pub mod tol;
pub mod verify;

pub use error::{Error, Result};
pub use kinds::{classify, MClass};
pub use observables::{IndexFunction, SpectralForm};
pub use qlin::{BipartiteDims, Ket, Op, C64};
pub use scheme::MeasurementScheme;
pub use tol::Tolerances;
pub use verify::{CheckConfig, FamilyReport, Outcome, VerdictReport};
