pub mod cli;
pub mod copy_dynamics;
pub mod error;
pub mod hilbert;
pub mod linalg;
pub mod optimizer;
pub mod povm;
pub mod theorems;

pub use error::{Error, Result};
