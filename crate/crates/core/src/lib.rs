//! Folded (modulo) sampling of bandlimited signals.
//!
//! The crate covers the forward model (folding samples into `[-lambda, lambda)`),
//! the Paley-Wiener sampling operators, prolate matrices, integer certificates
//! showing that folded sampling has no stable inverse without an energy bound,
//! and an unfolding algorithm that is stable once such a bound is imposed.

pub mod certificates;
pub mod error;
pub mod experiments;
pub mod frame;
pub mod linalg;
pub mod precise;
pub mod prolate;
pub mod quadrature;
pub mod signal;
pub mod unfolding;

pub use error::{Error, Result};
pub use signal::{fold, toral_dist, toral_seq_dist, BandlimitedSignal, FoldedSamples, Scalar, SeparatedSet};
