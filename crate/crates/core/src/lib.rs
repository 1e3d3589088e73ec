//! Constructions, certification and sparse-form bounds for the dyadic
//! counterexamples to sparse domination of the Zygmund, flag and strong
//! maximal functions.

pub mod certify;
mod clock;
pub mod dyadic;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod measure;
pub mod net;
pub mod sparse;

pub use error::{DslError, Result};
