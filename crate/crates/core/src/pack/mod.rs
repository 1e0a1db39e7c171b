//! Packed vectors: `n-1` payload slots plus a local-sum slot at index `n-1`, with homomorphic
//! slot insertion/deletion and rotation-free aggregation.
//!
//! All sums are taken mod `t`. Values at or above `t` are rejected, never wrapped.

mod engine;
mod mask;
mod trace;

pub use engine::{InsertMode, KeyBundle, PackEngine, RefreshPolicy, DEFAULT_REFRESH_FLOOR};
pub use mask::SlotMask;
pub use trace::{OpKind, OpTrace};

use crate::bfv::Ciphertext;

/// One group's packed ciphertext.
///
/// Invariants (on the decrypted slots): slot `n-1` is the mod-`t` sum of slots `0..len`, and
/// slots `len..n-1` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PackedVector {
    pub(crate) ct: Ciphertext,
    pub(crate) group_id: u64,
    pub(crate) len: usize,
    pub(crate) capacity: usize,
}

impl PackedVector {
    /// Reassembles a pack from stored parts. The caller vouches for the invariants.
    pub fn from_parts(ct: Ciphertext, group_id: u64, len: usize, capacity: usize) -> Self {
        PackedVector { ct, group_id, len, capacity }
    }

    pub fn ciphertext(&self) -> &Ciphertext {
        &self.ct
    }

    pub fn into_ciphertext(self) -> Ciphertext {
        self.ct
    }

    pub fn group_id(&self) -> u64 {
        self.group_id
    }

    /// Logical length `L`.
    pub fn len(&self) -> usize {
        self.len
    }

    /// `L = 0`: the pack contributes nothing and ignores deletes.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_full(&self) -> bool {
        self.len == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}
