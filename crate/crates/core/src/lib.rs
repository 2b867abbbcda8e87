pub mod error;
pub mod field;
pub mod gf;
pub mod lambda;
pub mod report;
pub mod transform;
pub mod first_stage;
pub mod cascade;
pub mod bridge;
pub mod io;
pub use error::{Error, Result};
