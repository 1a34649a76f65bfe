//! Directional maximal functions along Lipschitz vector fields, with the
//! covering machinery used to probe their weak-type bounds.

pub mod covering;
pub mod error;
pub mod geometry;
pub mod sampling;
pub mod maximal;
pub mod vectorfield;

pub use error::{Error, Result};
