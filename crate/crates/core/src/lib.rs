//! Contraction certificates, entrained periodic orbits, and error bounds
//! between the orbit of a periodically forced contractive system and the
//! orbit of a simpler approximating system.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod models;
pub mod norms;
pub mod output;
pub mod registry;
pub mod sim;

pub use error::{Error, Result};
