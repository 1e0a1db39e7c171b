use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::mask::SlotMask;
use super::trace::{OpKind, OpTrace};
use super::PackedVector;
use crate::bfv::{noise, BfvContext, Ciphertext, GaloisKeySet, PlaintextVec, PublicKey, SecretKey};
use crate::error::{Error, Result};

/// Minimum tracked budget (bits) an update may leave behind under the default policy.
pub const DEFAULT_REFRESH_FLOOR: f64 = 10.0;

/// What to do when an update would leave less than `floor` bits of tracked budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RefreshPolicy {
    /// Refresh the input first (needs the secret key), then update.
    Auto { floor: f64 },
    /// Fail with [`Error::RefreshRequired`].
    Strict { floor: f64 },
    /// Never check. Results may fail to decrypt.
    Off,
}

impl Default for RefreshPolicy {
    fn default() -> Self {
        RefreshPolicy::Auto { floor: DEFAULT_REFRESH_FLOOR }
    }
}

/// How an inserted value enters the ciphertext.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InsertMode {
    /// Plaintext addition of the value vector.
    #[default]
    Plain,
    /// Addition of a fresh encryption of the value vector.
    Encrypted,
}

/// Key material an engine works with. The secret key is optional: without it the engine can
/// still pack, update and aggregate, but not decrypt or refresh.
#[derive(Clone, Debug)]
pub struct KeyBundle {
    pub public: PublicKey,
    pub secret: Option<SecretKey>,
    pub galois: GaloisKeySet,
}

/// Executes pack operations and records each homomorphic primitive in an [`OpTrace`].
pub struct PackEngine {
    ctx: Arc<BfvContext>,
    keys: KeyBundle,
    rng: ChaCha20Rng,
    policy: RefreshPolicy,
    trace: OpTrace,
}

impl PackEngine {
    /// `seed = None` draws randomness from the operating system.
    pub fn new(ctx: Arc<BfvContext>, keys: KeyBundle, seed: Option<u64>) -> Self {
        let rng = match seed {
            Some(s) => ChaCha20Rng::seed_from_u64(s),
            None => ChaCha20Rng::from_entropy(),
        };
        PackEngine { ctx, keys, rng, policy: RefreshPolicy::default(), trace: OpTrace::new() }
    }

    pub fn with_policy(mut self, policy: RefreshPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn set_policy(&mut self, policy: RefreshPolicy) {
        self.policy = policy;
    }

    pub fn policy(&self) -> RefreshPolicy {
        self.policy
    }

    pub fn context(&self) -> &Arc<BfvContext> {
        &self.ctx
    }

    pub fn keys(&self) -> &KeyBundle {
        &self.keys
    }

    pub fn trace(&self) -> &OpTrace {
        &self.trace
    }

    pub fn take_trace(&mut self) -> OpTrace {
        std::mem::take(&mut self.trace)
    }

    pub fn slot_count(&self) -> usize {
        self.ctx.slot_count()
    }

    /// Payload capacity `n - 1`.
    pub fn capacity(&self) -> usize {
        self.ctx.slot_count() - 1
    }

    fn secret(&self) -> Result<&SecretKey> {
        self.keys
            .secret
            .as_ref()
            .ok_or_else(|| Error::Parameter("operation needs the secret key".into()))
    }

    fn check_value(&self, v: u64) -> Result<()> {
        let t = self.ctx.plaintext_modulus();
        if v >= t {
            return Err(Error::Range { value: v, modulus: t });
        }
        Ok(())
    }

    fn encode(&self, mask: &SlotMask) -> PlaintextVec {
        self.ctx.encode(mask.slots()).expect("mask values are below t")
    }

    // ---- traced primitives ----

    fn encrypt(&mut self, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.trace.record(OpKind::Encrypt);
        self.ctx.encrypt(&self.keys.public, pt, &mut self.rng)
    }

    fn decrypt(&mut self, ct: &Ciphertext) -> Result<Vec<u64>> {
        self.trace.record(OpKind::Decrypt);
        let sk = self.secret()?;
        Ok(self.ctx.decrypt(sk, ct)?.into_slots())
    }

    fn add(&mut self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.trace.record(OpKind::Add);
        self.ctx.add(a, b)
    }

    fn add_plain(&mut self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.trace.record(OpKind::AddPlain);
        self.ctx.add_plain(a, pt)
    }

    fn sub_plain(&mut self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.trace.record(OpKind::SubPlain);
        self.ctx.sub_plain(a, pt)
    }

    fn mult_plain(&mut self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.trace.record(OpKind::MultPlain);
        self.ctx.mult_plain(a, pt)
    }

    fn rotate(&mut self, a: &Ciphertext, step: i64) -> Result<Ciphertext> {
        self.trace.record(OpKind::Rotate);
        self.ctx.rotate(a, step, &self.keys.galois)
    }

    // ---- noise policy ----

    /// Applies the refresh policy given the predicted noise of the update result. Returns the
    /// (possibly refreshed) input to operate on.
    fn guard(
        &mut self,
        pv: &PackedVector,
        predict: impl Fn(&BfvContext, f64) -> f64,
    ) -> Result<PackedVector> {
        let floor = match self.policy {
            RefreshPolicy::Off => return Ok(pv.clone()),
            RefreshPolicy::Auto { floor } | RefreshPolicy::Strict { floor } => floor,
        };
        let budget_after = |ctx: &BfvContext, n: f64| noise::budget(ctx.log2_modulus(), predict(ctx, n));
        let before = budget_after(&self.ctx, pv.ct.noise_log2());
        if before >= floor {
            return Ok(pv.clone());
        }
        if let RefreshPolicy::Auto { .. } = self.policy {
            if self.keys.secret.is_some() {
                let fresh = self.refresh(pv)?;
                let after = budget_after(&self.ctx, fresh.ct.noise_log2());
                if after >= floor {
                    log::debug!("group {}: refreshed before update", pv.group_id);
                    return Ok(fresh);
                }
                return Err(Error::RefreshRequired { budget: after, floor });
            }
        }
        Err(Error::RefreshRequired { budget: before, floor })
    }

    // ---- pack operations ----

    /// Encrypts `values` into slots `0..len` with their sum in slot `n-1`.
    pub fn pack_group(&mut self, values: &[u64], group_id: u64) -> Result<PackedVector> {
        let cap = self.capacity();
        if values.len() > cap {
            return Err(Error::Capacity { len: values.len(), capacity: cap });
        }
        for &v in values {
            self.check_value(v)?;
        }
        let t = self.ctx.plaintext_modulus();
        let sum = values.iter().fold(0u64, |acc, &v| (acc + v) % t);
        let mut slots = values.to_vec();
        slots.resize(self.slot_count(), 0);
        slots[cap] = sum;
        let pt = self.ctx.encode(&slots)?;
        let ct = self.encrypt(&pt)?;
        Ok(PackedVector { ct, group_id, len: values.len(), capacity: cap })
    }

    /// Inserts `v` at slot `i`, shifting slots `i..L` right by one.
    pub fn insert_at(
        &mut self,
        pv: &PackedVector,
        i: usize,
        v: u64,
        mode: InsertMode,
    ) -> Result<PackedVector> {
        let n = self.slot_count();
        if pv.len >= pv.capacity {
            return Err(Error::Capacity { len: pv.len, capacity: pv.capacity });
        }
        if i > pv.len {
            return Err(Error::Index { index: i, len: pv.len });
        }
        self.check_value(v)?;

        let keep = self.encode(&SlotMask::keep_prefix(n, i));
        let suffix = self.encode(&SlotMask::range(n, i, pv.len));
        let delta = self.encode(&SlotMask::value_with_sum(n, i, v));
        let pv = self.guard(pv, |ctx, w| {
            let kept = ctx.mult_plain_noise(w, &keep);
            let moved = ctx.rotate_noise(ctx.mult_plain_noise(w, &suffix));
            let merged = noise::log2_sum(kept, moved);
            match mode {
                InsertMode::Plain => ctx.add_plain_noise(merged, &delta),
                InsertMode::Encrypted => noise::log2_sum(merged, ctx.fresh_noise_log2()),
            }
        })?;

        let c_keep = self.mult_plain(&pv.ct, &keep)?;
        let c_suffix = self.mult_plain(&pv.ct, &suffix)?;
        let c_shifted = self.rotate(&c_suffix, -1)?;
        let merged = self.add(&c_keep, &c_shifted)?;
        let ct = match mode {
            InsertMode::Plain => self.add_plain(&merged, &delta)?,
            InsertMode::Encrypted => {
                let c_delta = self.encrypt(&delta)?;
                self.add(&merged, &c_delta)?
            }
        };
        Ok(PackedVector { ct, len: pv.len + 1, ..pv })
    }

    /// Places `v` at slot `L`: one plaintext addition, no rotation.
    pub fn append(&mut self, pv: &PackedVector, v: u64) -> Result<PackedVector> {
        let n = self.slot_count();
        if pv.len >= pv.capacity {
            return Err(Error::Capacity { len: pv.len, capacity: pv.capacity });
        }
        self.check_value(v)?;
        let delta = self.encode(&SlotMask::value_with_sum(n, pv.len, v));
        let pv = self.guard(pv, |ctx, w| ctx.add_plain_noise(w, &delta))?;
        let ct = self.add_plain(&pv.ct, &delta)?;
        Ok(PackedVector { ct, len: pv.len + 1, ..pv })
    }

    /// Removes slot `i` (whose current value the caller supplies as `v_del`), shifting
    /// slots `i+1..L` left. Deleting from an empty pack is a no-op.
    pub fn delete_at(&mut self, pv: &PackedVector, i: usize, v_del: u64) -> Result<PackedVector> {
        let n = self.slot_count();
        if pv.len == 0 {
            log::debug!("group {}: delete on empty pack ignored", pv.group_id);
            return Ok(pv.clone());
        }
        if i >= pv.len {
            return Err(Error::Index { index: i, len: pv.len });
        }
        self.check_value(v_del)?;

        let keep = self.encode(&SlotMask::keep_prefix(n, i));
        let suffix = self.encode(&SlotMask::range(n, i + 1, pv.len));
        let aux = self.encode(&SlotMask::sum_only(n, v_del));
        let pv = self.guard(pv, |ctx, w| {
            let kept = ctx.mult_plain_noise(w, &keep);
            let moved = ctx.rotate_noise(ctx.mult_plain_noise(w, &suffix));
            ctx.add_plain_noise(noise::log2_sum(kept, moved), &aux)
        })?;

        let c_keep = self.mult_plain(&pv.ct, &keep)?;
        let c_suffix = self.mult_plain(&pv.ct, &suffix)?;
        let c_shifted = self.rotate(&c_suffix, 1)?;
        let merged = self.add(&c_keep, &c_shifted)?;
        let ct = self.sub_plain(&merged, &aux)?;
        Ok(PackedVector { ct, len: pv.len - 1, ..pv })
    }

    /// Adds whole ciphertexts; slot `n-1` of the result is the total. No rotations.
    pub fn global_sum(&mut self, packs: &[PackedVector]) -> Result<Ciphertext> {
        let (first, rest) = packs
            .split_first()
            .ok_or_else(|| Error::Parameter("global sum over an empty pack list".into()))?;
        let mut acc = first.ct.clone();
        for pv in rest {
            acc = self.add(&acc, &pv.ct)?;
        }
        Ok(acc)
    }

    /// [`global_sum`](Self::global_sum) per key, in key order.
    pub fn group_sum<K: Ord + Clone>(
        &mut self,
        groups: &BTreeMap<K, Vec<PackedVector>>,
    ) -> Result<BTreeMap<K, Ciphertext>> {
        let mut out = BTreeMap::new();
        for (k, packs) in groups {
            out.insert(k.clone(), self.global_sum(packs)?);
        }
        Ok(out)
    }

    /// Decrypts and returns only the sum slot.
    pub fn extract_sum(&mut self, ct: &Ciphertext) -> Result<u64> {
        let slots = self.decrypt(ct)?;
        Ok(slots[self.capacity()])
    }

    /// Reads one slot; an index outside `0..n` yields `None` and a warning.
    pub fn decrypt_slot(&mut self, pv: &PackedVector, j: usize) -> Result<Option<u64>> {
        let n = self.slot_count();
        if j >= n {
            log::warn!("slot index {j} outside 0..{n}; returning no value");
            return Ok(None);
        }
        Ok(Some(self.decrypt(&pv.ct)?[j]))
    }

    /// All `n` decrypted slots (payload, zero tail, sum).
    pub fn decrypt_pack(&mut self, pv: &PackedVector) -> Result<Vec<u64>> {
        self.decrypt(&pv.ct)
    }

    pub fn decrypt_ciphertext(&mut self, ct: &Ciphertext) -> Result<Vec<u64>> {
        self.decrypt(ct)
    }

    /// `log2(n)` rotate-and-add steps; afterwards every slot holds the total of all slots.
    pub fn rotate_baseline_sum(&mut self, ct: &Ciphertext) -> Result<Ciphertext> {
        let mut acc = ct.clone();
        let mut step = 1usize;
        while step < self.slot_count() {
            let rotated = self.rotate(&acc, step as i64)?;
            acc = self.add(&acc, &rotated)?;
            step <<= 1;
        }
        Ok(acc)
    }

    /// Baseline total of a stored pack: clears the sum slot with one mask multiplication,
    /// then runs [`rotate_baseline_sum`](Self::rotate_baseline_sum). Every slot of the result
    /// holds the payload total.
    pub fn baseline_pack_sum(&mut self, pv: &PackedVector) -> Result<Ciphertext> {
        let n = self.slot_count();
        let payload = self.encode(&SlotMask::range(n, 0, n - 1));
        let masked = self.mult_plain(&pv.ct, &payload)?;
        self.rotate_baseline_sum(&masked)
    }

    /// Encrypts a raw slot vector (no sum slot bookkeeping). Used by the aggregation baseline.
    pub fn encrypt_slots(&mut self, slots: &[u64]) -> Result<Ciphertext> {
        let pt = self.ctx.encode(slots)?;
        self.encrypt(&pt)
    }

    /// Re-encrypts the decrypted content under fresh randomness.
    pub fn refresh(&mut self, pv: &PackedVector) -> Result<PackedVector> {
        self.trace.record(OpKind::Refresh);
        let slots = self.decrypt(&pv.ct)?;
        let pt = self.ctx.encode(&slots)?;
        let ct = self.encrypt(&pt)?;
        Ok(PackedVector { ct, ..pv.clone() })
    }

    pub fn tracked_budget(&self, pv: &PackedVector) -> f64 {
        self.ctx.tracked_budget(&pv.ct)
    }

    pub fn exact_budget(&self, pv: &PackedVector) -> Result<f64> {
        self.ctx.noise_budget(self.secret()?, &pv.ct)
    }
}
