//! File formats, experiment orchestration and the command-line front end
//! for [`lafter_core`].

pub mod cli;
pub mod communities;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model_file;

pub use error::{Error, Result};
pub use model_file::ModelFile;
