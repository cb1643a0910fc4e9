pub mod birman_schwinger;
pub mod error;
pub mod field;
pub mod numerics;
pub mod planar;
pub mod radial;
pub mod spin;
pub mod zero_modes;

pub use error::{Error, Result};
pub use spin::Spin;
