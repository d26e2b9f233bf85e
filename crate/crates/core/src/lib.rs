#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod io;
pub mod npmle;

pub use error::{Result, SiseError};
pub mod smoothing;
pub mod bandwidth;
pub mod par;
pub mod pipeline;
pub mod inference;
pub mod simbench;
pub mod cli;
