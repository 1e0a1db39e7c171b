use super::params::ParamsId;
use crate::error::{Error, Result};
use crate::ring::{Domain, PolyRns};

/// A slot vector over `Z_t` together with its encoding `m(X) ∈ R_t` (coefficients in `[0, t)`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaintextVec {
    pub(crate) slots: Vec<u64>,
    pub(crate) coeffs: Vec<u64>,
}

impl PlaintextVec {
    pub fn slots(&self) -> &[u64] {
        &self.slots
    }

    pub fn into_slots(self) -> Vec<u64> {
        self.slots
    }

    /// Coefficients of the encoded polynomial.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }
}

/// A BFV ciphertext `(c0, c1)`, always kept in the NTT domain.
///
/// `noise_log2` is the worst-case tracker's bound on `log2 ‖[t·(c0 + c1·s)]_q‖∞`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ciphertext {
    pub(crate) c0: PolyRns,
    pub(crate) c1: PolyRns,
    pub(crate) params_id: ParamsId,
    pub(crate) noise_log2: f64,
}

impl Ciphertext {
    pub fn from_parts(c0: PolyRns, c1: PolyRns, params_id: ParamsId, noise_log2: f64) -> Result<Self> {
        for c in [&c0, &c1] {
            if c.domain() != Domain::Ntt {
                return Err(Error::Domain { expected: Domain::Ntt, found: c.domain() });
            }
        }
        if *c0.basis() != *c1.basis() {
            return Err(Error::Parameter("ciphertext components use different bases".into()));
        }
        Ok(Ciphertext { c0, c1, params_id, noise_log2 })
    }

    pub fn c0(&self) -> &PolyRns {
        &self.c0
    }

    pub fn c1(&self) -> &PolyRns {
        &self.c1
    }

    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn noise_log2(&self) -> f64 {
        self.noise_log2
    }

    /// Overrides the tracked bound, e.g. after loading from storage.
    pub fn set_noise_log2(&mut self, noise_log2: f64) {
        self.noise_log2 = noise_log2;
    }
}
