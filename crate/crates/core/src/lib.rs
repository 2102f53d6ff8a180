pub mod error;
pub mod forms;
pub mod modgroup;
pub mod multiplier;
pub mod operators;
pub mod subgroup;
pub mod vvforms;
pub mod whittaker;

pub use error::{Error, Result};
