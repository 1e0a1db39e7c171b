//! Encrypted single-attribute tables on packed BFV ciphertexts.
//!
//! Each group of tuples lives in one ciphertext whose last slot carries the running sum of
//! the payload, so table and group sums need ciphertext additions only. Slot-level inserts
//! and deletes are done homomorphically with plaintext masks and a single rotation.

pub mod bfv;
pub mod bench;
pub mod catalog;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod pack;
pub mod ring;

pub use error::{Error, Result};
