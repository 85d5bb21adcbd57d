pub mod algebra;
pub mod cli;
pub mod error;
pub mod io;
pub mod metrics;
pub mod optim;
pub mod random;
pub mod report;
pub mod seminorms;
pub mod states;
pub mod suite;
pub mod towers;

pub use error::{Error, Result};
