pub mod cases;
pub mod data;
pub mod embed;
pub mod energy;
pub mod error;
pub mod extrinsic;
pub mod io;
pub mod jang;
pub mod optimal;
pub mod sphere;
pub mod verify;

pub use error::{QlmError, Result};
