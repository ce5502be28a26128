//! Laboratory for the NK fitness-landscape model with adjacent neighbourhoods
//! on a ring.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod enumeration;
pub mod error;
pub mod landscape;
pub mod paths;
pub mod rng;
pub mod sampler;
pub mod theory;

pub use error::{NkError, Result};
