//! File formats, JSON reports, multi-threaded drivers and the `nagatree`
//! command-line tool on top of [`nagatree_core`].

pub mod cli;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;

pub use error::{Error, Result};
pub use nagatree_core;
