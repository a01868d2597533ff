//! Exact desk-scale Haar analysis of the discrepancy function.

pub mod dyadic;
pub mod error;
pub mod sum;

pub use error::{Error, Result};
pub mod discrepancy;
pub mod dualcert;
pub mod hardy;
pub mod norms;
pub mod pointset;
