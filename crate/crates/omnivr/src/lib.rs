//! IO, parallel execution, dataset generation, CLI and HTTP service on top
//! of [`omnivr_core`].

pub mod cli;
pub mod dataset;
pub mod error;
pub mod io;
pub mod parallel;
pub mod server;
pub mod view;

pub use error::{Error, Result};
pub use omnivr_core as core;
