//! Coherence of quantum channels: Choi-matrix channel model, superchannels
//! and their incoherent subclass, channel coherence measures, and a harness
//! that tests whether the measures are monotone under incoherent
//! superchannels.

pub mod channel;
pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod matrix;
pub mod measures;
pub mod superchannel;

pub use channel::{ChoiMatrix, QuantumChannel};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use measures::{Measure, MeasureResult, SolverOptions};
pub use superchannel::Superchannel;
