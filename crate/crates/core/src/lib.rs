//! Representations of sl(n,R) built from contracted-group data.

pub mod algebra;
pub mod clebsch;
pub mod contracted;
pub mod decontract;
pub mod error;
pub mod io;
pub mod irreps;
pub mod labels;
pub mod linalg;
pub mod verify;

pub use error::{Error, Result};
