use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ring::{ntt_primes, NOISE_ETA};

/// Key-switching digit width in bits.
pub const DEFAULT_DECOMPOSITION_BITS: u32 = 20;

/// Plaintext moduli offered by the tooling; all are prime and `≡ 1 (mod 2N)` for `N ≤ 2^14`.
pub const SUPPORTED_PLAINTEXT_MODULI: [u64; 3] = [65537, 786433, 5767169];

/// Fully resolved scheme parameters. Two parameter sets are interchangeable iff their
/// [`ParamsId`]s agree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub degree: usize,
    pub plaintext_modulus: u64,
    pub ciphertext_primes: Vec<u64>,
    pub decomposition_bits: u32,
    pub noise_eta: u32,
}

impl SchemeParams {
    /// Generates `prime_bits.len()` distinct NTT primes of the requested widths.
    pub fn new(degree: usize, plaintext_modulus: u64, prime_bits: &[u32]) -> Result<Self> {
        let mut primes: Vec<u64> = Vec::with_capacity(prime_bits.len());
        for &bits in prime_bits {
            let p = ntt_primes(bits, degree, 1, &primes)?[0];
            primes.push(p);
        }
        Ok(SchemeParams {
            degree,
            plaintext_modulus,
            ciphertext_primes: primes,
            decomposition_bits: DEFAULT_DECOMPOSITION_BITS,
            noise_eta: NOISE_ETA,
        })
    }

    /// `N = 2^14`, `t = 65537`, three 60-bit primes: 8192 slots.
    pub fn full() -> Self {
        Self::new(1 << 14, 65537, &[60, 60, 60]).expect("static profile")
    }

    /// `N = 2^13`, `t = 65537`, three 60-bit primes: 4096 slots.
    pub fn mid() -> Self {
        Self::new(1 << 13, 65537, &[60, 60, 60]).expect("static profile")
    }

    /// Small ring for tests and interactive use. Not secure.
    pub fn desk(degree: usize) -> Result<Self> {
        Self::new(degree, 65537, &[60, 60, 60])
    }

    /// Short human label such as `N=16384,t=65537,q=3x60`.
    pub fn label(&self) -> String {
        let widths: Vec<u32> = self.ciphertext_primes.iter().map(|p| 64 - p.leading_zeros()).collect();
        let q = if widths.windows(2).all(|w| w[0] == w[1]) {
            format!("{}x{}", widths.len(), widths.first().copied().unwrap_or(0))
        } else {
            widths.iter().map(u32::to_string).collect::<Vec<_>>().join("+")
        };
        format!("N={},t={},q={q}", self.degree, self.plaintext_modulus)
    }

    pub fn slot_count(&self) -> usize {
        self.degree / 2
    }

    pub fn params_id(&self) -> ParamsId {
        let mut h = Sha256::new();
        h.update(b"hermes-bfv-v1");
        h.update((self.degree as u64).to_le_bytes());
        h.update(self.plaintext_modulus.to_le_bytes());
        h.update((self.ciphertext_primes.len() as u64).to_le_bytes());
        for p in &self.ciphertext_primes {
            h.update(p.to_le_bytes());
        }
        h.update((self.decomposition_bits as u64).to_le_bytes());
        h.update((self.noise_eta as u64).to_le_bytes());
        let digest = h.finalize();
        let mut id = [0u8; 32];
        id.copy_from_slice(&digest);
        ParamsId(id)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.degree < 8 || !self.degree.is_power_of_two() {
            return Err(Error::Parameter(format!(
                "ring degree {} must be a power of two >= 8",
                self.degree
            )));
        }
        let t = self.plaintext_modulus;
        if !t.wrapping_sub(1).is_multiple_of(2 * self.degree as u64) {
            return Err(Error::Parameter(format!(
                "plaintext modulus {t} is not congruent to 1 mod 2N = {}",
                2 * self.degree
            )));
        }
        if let Some(&p) = self.ciphertext_primes.iter().find(|&&p| p <= t) {
            return Err(Error::Parameter(format!(
                "ciphertext prime {p} must exceed the plaintext modulus {t}"
            )));
        }
        if !(4..=30).contains(&self.decomposition_bits) {
            return Err(Error::Parameter(format!(
                "decomposition width {} not in [4, 30]",
                self.decomposition_bits
            )));
        }
        if self.noise_eta == 0 || self.noise_eta > 32 {
            return Err(Error::Parameter(format!("noise parameter {} not in [1, 32]", self.noise_eta)));
        }
        Ok(())
    }
}

/// SHA-256 content hash of a [`SchemeParams`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamsId(pub [u8; 32]);

impl ParamsId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let bytes = hex::decode(s.trim()).map_err(|e| Error::Format(format!("params id: {e}")))?;
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| Error::Format("params id must be 32 bytes".into()))?;
        Ok(ParamsId(arr))
    }

    pub fn short(&self) -> String {
        hex::encode(&self.0[..6])
    }
}

impl fmt::Display for ParamsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for ParamsId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ParamsId({})", self.short())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_valid() {
        for p in [SchemeParams::full(), SchemeParams::mid(), SchemeParams::desk(16).unwrap()] {
            p.validate().unwrap();
            let bits: f64 = p.ciphertext_primes.iter().map(|&q| (q as f64).log2()).sum();
            assert!((100.0..=200.0).contains(&bits), "log2 q = {bits}");
        }
        assert_eq!(SchemeParams::full().slot_count(), 8192);
        assert_eq!(SchemeParams::desk(16).unwrap().slot_count(), 8);
    }

    #[test]
    fn supported_plaintext_moduli_fit_full_degree() {
        for t in SUPPORTED_PLAINTEXT_MODULI {
            let p = SchemeParams::new(1 << 14, t, &[60, 60, 60]).unwrap();
            p.validate().unwrap();
        }
    }

    #[test]
    fn params_id_depends_on_every_field() {
        let base = SchemeParams::desk(16).unwrap();
        let mut other = base.clone();
        other.plaintext_modulus = 786433;
        assert_ne!(base.params_id(), other.params_id());
        let mut other = base.clone();
        other.decomposition_bits = 16;
        assert_ne!(base.params_id(), other.params_id());
        assert_eq!(base.params_id(), SchemeParams::desk(16).unwrap().params_id());
        let id = base.params_id();
        assert_eq!(ParamsId::from_hex(&id.to_hex()).unwrap(), id);
    }

    #[test]
    fn rejects_unfriendly_plaintext_modulus() {
        let mut p = SchemeParams::desk(16).unwrap();
        p.plaintext_modulus = 65539;
        assert!(matches!(p.validate(), Err(Error::Parameter(_))));
        let mut p = SchemeParams::desk(16).unwrap();
        p.degree = 4;
        assert!(p.validate().is_err());
    }
}
