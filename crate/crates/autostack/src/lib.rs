pub mod automata;
pub mod constructions;
pub mod error;
pub mod interchange;
pub mod oracles;
pub mod stacking;
pub mod verify;
pub mod words;
pub mod zoo;

pub use error::{Error, Result};
