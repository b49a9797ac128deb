//! Numerical building blocks shared by the grid, calculus and operator modules.

pub mod bump;
pub mod fd;
pub mod fit;
pub mod interp;
pub mod quad;
