//! Slow, obviously-correct reference computations.
//!
//! Nothing here calls into the algorithms it is used to check; it only
//! borrows their data types.

pub mod agreement;
pub mod hmm;
pub mod matcher;
pub mod random;
pub mod timeline;
