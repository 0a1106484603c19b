pub mod coords;
pub mod error;
pub mod exterior;
pub mod lagrangian;
pub mod legendre;
pub mod models;
pub mod motion;
pub mod poly;
pub mod solver;

pub use error::{Error, Result};
