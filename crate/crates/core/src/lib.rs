pub mod calculus;
pub mod checks;
pub mod dolbeault;
pub mod error;
pub mod exact;
pub mod grid;
pub mod liealg;
pub mod nashmoser;
pub mod numerics;
pub mod par;
pub mod smoothing;
pub mod symplectic;
pub mod williamson;

pub use error::{Error, Result};
