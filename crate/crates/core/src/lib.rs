pub mod cli_io;
pub mod corpus;
pub mod error;
pub mod lagrangian;
pub mod littlewood_paley;
pub mod measures;
pub mod numfmt;
pub mod spectral;
pub mod velocity;
pub mod solver;
pub use error::{BmlError, Result};
