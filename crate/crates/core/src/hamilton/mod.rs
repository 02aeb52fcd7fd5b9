//! Expander certification, Hamilton cycle search and trace hitting times.

pub mod cycle;
pub mod expander;
pub mod tau;

pub use cycle::*;
pub use expander::*;
pub use tau::*;
