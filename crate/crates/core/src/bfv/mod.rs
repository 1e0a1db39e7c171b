//! Textbook BFV over an RNS modulus with slot batching, plaintext arithmetic and Galois
//! rotations.
//!
//! Slots: the plaintext ring `R_t` splits into `N` evaluation points `ψ^e` (odd `e`). Slot `j`
//! is the evaluation at `ψ^(3^j mod 2N)`, giving one rotation row of `n = N/2` slots; the
//! other row (exponents `-3^j`) is always zero.

mod ciphertext;
mod context;
mod keys;
pub mod noise;
mod params;

pub use ciphertext::{Ciphertext, PlaintextVec};
pub use context::BfvContext;
pub use keys::{
    default_rotation_steps, power_of_two_steps, GaloisKeySet, KeySwitchKey, PublicKey, SecretKey,
};
pub use params::{ParamsId, SchemeParams, DEFAULT_DECOMPOSITION_BITS, SUPPORTED_PLAINTEXT_MODULI};
