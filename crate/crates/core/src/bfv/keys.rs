use std::collections::BTreeMap;

use super::params::ParamsId;
use crate::error::{Error, Result};
use crate::ring::PolyRns;

/// Ternary secret `s`, stored in the NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecretKey {
    pub(crate) s: PolyRns,
    pub(crate) params_id: ParamsId,
}

/// `(b, a)` with `b = -(a*s + e)`, both in the NTT domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub(crate) b: PolyRns,
    pub(crate) a: PolyRns,
    pub(crate) params_id: ParamsId,
}

/// Key-switching key from `s(X^k)` back to `s`: one `(b, a)` pair per gadget digit, ordered
/// prime-major then low digit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeySwitchKey {
    pub(crate) exponent: usize,
    pub(crate) parts: Vec<(PolyRns, PolyRns)>,
}

impl KeySwitchKey {
    pub fn exponent(&self) -> usize {
        self.exponent
    }

    pub fn digit_count(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[(PolyRns, PolyRns)] {
        &self.parts
    }

    pub fn from_parts(exponent: usize, parts: Vec<(PolyRns, PolyRns)>) -> Self {
        KeySwitchKey { exponent, parts }
    }
}

/// Rotation keys indexed by slot step `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisKeySet {
    pub(crate) keys: BTreeMap<i64, KeySwitchKey>,
    pub(crate) params_id: ParamsId,
}

impl GaloisKeySet {
    pub fn empty(params_id: ParamsId) -> Self {
        GaloisKeySet { keys: BTreeMap::new(), params_id }
    }

    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn steps(&self) -> impl Iterator<Item = i64> + '_ {
        self.keys.keys().copied()
    }

    pub fn contains(&self, step: i64) -> bool {
        self.keys.contains_key(&step)
    }

    pub fn get(&self, step: i64) -> Result<&KeySwitchKey> {
        self.keys.get(&step).ok_or(Error::MissingKey(step))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn insert(&mut self, step: i64, key: KeySwitchKey) {
        self.keys.insert(step, key);
    }

    /// Adds every key of `other`; both sets must share parameters.
    pub fn merge(&mut self, other: GaloisKeySet) -> Result<()> {
        if other.params_id != self.params_id {
            return Err(Error::ParamsMismatch {
                expected: self.params_id.short(),
                found: other.params_id.short(),
            });
        }
        self.keys.extend(other.keys);
        Ok(())
    }
}

impl SecretKey {
    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn poly(&self) -> &PolyRns {
        &self.s
    }

    pub fn from_poly(s: PolyRns, params_id: ParamsId) -> Self {
        SecretKey { s, params_id }
    }
}

impl PublicKey {
    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn polys(&self) -> (&PolyRns, &PolyRns) {
        (&self.b, &self.a)
    }

    pub fn from_polys(b: PolyRns, a: PolyRns, params_id: ParamsId) -> Self {
        PublicKey { b, a, params_id }
    }
}

/// Steps `{+1, -1} ∪ {±2^j : 2^j < n}`.
pub fn default_rotation_steps(slot_count: usize) -> Vec<i64> {
    let mut steps = Vec::new();
    let mut s = 1usize;
    while s < slot_count {
        steps.push(s as i64);
        steps.push(-(s as i64));
        s <<= 1;
    }
    steps
}

/// Positive power-of-two steps `{1, 2, ..., n/2}` used by rotate-and-add slot summation.
pub fn power_of_two_steps(slot_count: usize) -> Vec<i64> {
    let mut steps = Vec::new();
    let mut s = 1usize;
    while s < slot_count {
        steps.push(s as i64);
        s <<= 1;
    }
    steps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_sets() {
        assert_eq!(default_rotation_steps(8), vec![1, -1, 2, -2, 4, -4]);
        assert_eq!(power_of_two_steps(8), vec![1, 2, 4]);
        assert_eq!(power_of_two_steps(4096).len(), 12);
    }
}
