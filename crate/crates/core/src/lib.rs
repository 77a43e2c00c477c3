//! Cantor minimal systems presented by ordered Bratteli diagrams: dimension
//! groups, divisor sets and trace images, topological full group conjugators,
//! and certificate-producing deciders for approximate conjugacy.

mod bigint_serde;

pub mod bratteli;
pub mod certificate;
pub mod classify;
pub mod dimgroup;
pub mod error;
pub mod fullgroup;
pub mod invariants;
pub mod linalg;
pub mod numfield;
pub mod poly;

pub use error::{Error, Result};
