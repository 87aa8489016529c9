//! Communication-complexity laboratory.
//!
//! - [`qmath`]: exact density-matrix linear algebra and information measures;
//! - [`protocol`]: classical two-party public-coin protocol engine;
//! - [`pointer_jumping`]: the symmetric k-ary pointer-jumping task;
//! - [`greater_than`]: the Greater-Than round/communication trade-off protocol;
//! - [`lemma_verify`]: numerical verification of the entropy-inequality lemmas
//!   on explicitly constructed small instances.

pub mod error;
pub mod greater_than;
pub mod lemma_verify;
pub mod pointer_jumping;
pub mod protocol;
pub mod qmath;
pub mod seeds;

pub use error::{Error, Result};
