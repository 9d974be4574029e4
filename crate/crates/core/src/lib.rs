pub mod cli;
pub mod error;
pub mod json;
pub mod levels;
pub mod model;
pub mod oracle;
pub mod parallel;
pub mod serial;
pub mod significance;
pub mod similarity;
pub mod simulator;
pub mod synfire;

pub use error::{Error, Result};
pub use levels::MinedLevels;
pub use model::*;
