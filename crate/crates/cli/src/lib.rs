//! Command-line tool and JSON service for Andrews plots.

pub mod cli;
pub mod compute;
pub mod server;
pub mod verify;

pub use compute::{compute, AppError, ComputeRequest, ComputeResponse, Mode, SpectrumMemo};
