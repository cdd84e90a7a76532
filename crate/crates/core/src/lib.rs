pub mod cube;
pub mod error;
pub mod forms;
pub mod induction;
pub mod report;
pub mod spectral;
pub mod sum;
pub mod walk;

pub use error::{Error, Result};
