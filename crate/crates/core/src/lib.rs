//! Exact-arithmetic engine for stratified algebras: bilinear and affine
//! operations on `K^n` over `ℚ` or `F_p`, symbolic identity checks, axiom
//! verification, stratum discovery, orbit dynamics and a toy key exchange.

pub mod algebra;
pub mod axioms;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod kex;
pub mod poly;
pub mod strata;
pub mod witness;

pub use error::{Error, Result};
