pub mod alignment;
pub mod audio;
pub mod dsp;
pub mod error;
pub mod frontend;
pub mod harness;
pub mod metric;
pub mod modulation;
pub mod profiles;
pub mod simulator;
pub mod stimulus;

pub use error::{Error, Result};
