use std::sync::Arc;

use rand::{CryptoRng, Rng, RngCore};

use super::ciphertext::{Ciphertext, PlaintextVec};
use super::keys::{GaloisKeySet, KeySwitchKey, PublicKey, SecretKey};
use super::noise;
use super::params::{ParamsId, SchemeParams};
use crate::error::{Error, Result};
use crate::ring::{binomial_coeffs, ternary_coeffs, Domain, PolyRns, RnsBasis, WideUint};

/// Precomputed state for one parameter set. Immutable after construction and cheap to share.
#[derive(Debug)]
pub struct BfvContext {
    params: SchemeParams,
    params_id: ParamsId,
    basis: Arc<RnsBasis>,
    // single-prime basis over t, used for slot encoding
    plain: Arc<RnsBasis>,
    // slot j -> index in the plaintext NTT vector
    slot_index: Vec<usize>,
    // floor(q / t) mod q_i
    delta: Vec<u64>,
    t_mod_q: Vec<u64>,
    q_mod_t: u64,
    q_inv_mod_t: u64,
    half_q: WideUint,
    log2_q: f64,
    // gadget digits as (prime index, bit shift), prime-major
    digits: Vec<(usize, u32)>,
    fresh_noise: f64,
    key_switch_noise: f64,
}

impl BfvContext {
    pub fn new(params: SchemeParams) -> Result<Self> {
        params.validate()?;
        let n = params.degree;
        let t = params.plaintext_modulus;
        let basis = Arc::new(RnsBasis::new(n, &params.ciphertext_primes)?);
        let plain = Arc::new(RnsBasis::new(n, &[t])?);

        let two_n = 2 * n;
        let slots = n / 2;
        let mut slot_index = Vec::with_capacity(slots);
        let mut e = 1usize;
        for _ in 0..slots {
            slot_index.push(plain.exponent_index(e));
            e = e * 3 % two_n;
        }

        let q = *basis.modulus();
        let (delta_wide, q_mod_t) = q.div_rem_u64(t);
        let delta = basis.primes().iter().map(|p| delta_wide.rem_u64(p.value())).collect();
        let t_mod_q = basis.primes().iter().map(|p| p.reduce(t)).collect();
        let tmod = &plain.primes()[0];
        let q_inv_mod_t = tmod
            .inv(q_mod_t)
            .ok_or_else(|| Error::Parameter("plaintext modulus divides q".into()))?;

        let w = params.decomposition_bits;
        let mut digits = Vec::new();
        for (i, p) in basis.primes().iter().enumerate() {
            let count = p.bits().div_ceil(w);
            digits.extend((0..count).map(|j| (i, j * w)));
        }

        let fresh_noise = noise::fresh(t, n, params.noise_eta, q_mod_t);
        let key_switch_noise = noise::key_switch(t, n, params.noise_eta, digits.len(), w);
        Ok(BfvContext {
            params_id: params.params_id(),
            params,
            log2_q: basis.log2_modulus(),
            half_q: q.shr1(),
            basis,
            plain,
            slot_index,
            delta,
            t_mod_q,
            q_mod_t,
            q_inv_mod_t,
            digits,
            fresh_noise,
            key_switch_noise,
        })
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn basis(&self) -> &Arc<RnsBasis> {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.params.degree
    }

    pub fn slot_count(&self) -> usize {
        self.params.degree / 2
    }

    pub fn plaintext_modulus(&self) -> u64 {
        self.params.plaintext_modulus
    }

    pub fn log2_modulus(&self) -> f64 {
        self.log2_q
    }

    /// Number of gadget digits per key-switching key.
    pub fn digit_count(&self) -> usize {
        self.digits.len()
    }

    pub fn fresh_noise_log2(&self) -> f64 {
        self.fresh_noise
    }

    /// Budget implied by the tracked worst-case bound (no secret key needed).
    pub fn tracked_budget(&self, ct: &Ciphertext) -> f64 {
        noise::budget(self.log2_q, ct.noise_log2)
    }

    /// Tracked bound for a ciphertext of unknown history: the largest noise that still
    /// decrypts. Anything further applied to it is reported as exhausted.
    pub fn unknown_noise_log2(&self) -> f64 {
        self.log2_q - 1.0
    }

    /// Galois exponent `g(r) = 3^(r mod n) mod 2N` for slot step `r`.
    pub fn rotation_exponent(&self, step: i64) -> usize {
        let n = self.slot_count() as i64;
        let two_n = 2 * self.degree();
        let mut e = 1usize;
        for _ in 0..step.rem_euclid(n) {
            e = e * 3 % two_n;
        }
        e
    }

    fn check(&self, id: ParamsId) -> Result<()> {
        if id != self.params_id {
            return Err(Error::ParamsMismatch {
                expected: self.params_id.short(),
                found: id.short(),
            });
        }
        Ok(())
    }

    fn ntt_poly(&self, coeffs: &[i64]) -> PolyRns {
        PolyRns::from_signed(&self.basis, coeffs)
            .expect("length matches degree")
            .into_domain(Domain::Ntt)
    }

    fn uniform_ntt<R: RngCore + CryptoRng>(&self, rng: &mut R) -> PolyRns {
        // A uniform residue vector is uniform in either domain.
        let n = self.degree();
        let mut data = Vec::with_capacity(self.basis.len() * n);
        for p in self.basis.primes() {
            data.extend((0..n).map(|_| rng.gen_range(0..p.value())));
        }
        PolyRns::from_residues(&self.basis, data, Domain::Ntt).expect("residues are reduced")
    }

    fn noise_ntt<R: RngCore + CryptoRng>(&self, rng: &mut R) -> PolyRns {
        self.ntt_poly(&binomial_coeffs(self.degree(), self.params.noise_eta, rng))
    }

    // ---- keys ----

    pub fn keygen<R: RngCore + CryptoRng>(&self, rng: &mut R) -> (SecretKey, PublicKey) {
        let s = self.ntt_poly(&ternary_coeffs(self.degree(), rng));
        let a = self.uniform_ntt(rng);
        let e = self.noise_ntt(rng);
        let b = a.pointwise_mul(&s).and_then(|x| x.add(&e)).expect("same basis").neg();
        let sk = SecretKey { s, params_id: self.params_id };
        let pk = PublicKey { b, a, params_id: self.params_id };
        (sk, pk)
    }

    /// Key-switching key from `s(X^k)` to `s`.
    pub fn gen_switch_key<R: RngCore + CryptoRng>(
        &self,
        sk: &SecretKey,
        exponent: usize,
        rng: &mut R,
    ) -> Result<KeySwitchKey> {
        self.check(sk.params_id)?;
        let s_k = sk.s.apply_automorphism(exponent)?;
        let n = self.degree();
        let mut parts = Vec::with_capacity(self.digits.len());
        for &(l, shift) in &self.digits {
            let a = self.uniform_ntt(rng);
            let e = self.noise_ntt(rng);
            let mut b = e.sub(&a.pointwise_mul(&sk.s)?)?;
            let p = &self.basis.primes()[l];
            let g = p.pow(2, shift as u64);
            let gs = p.shoup(g);
            let src = s_k.residue(l);
            let dst = b.residue_mut(l);
            for c in 0..n {
                dst[c] = p.add(dst[c], p.mul_shoup(src[c], g, gs));
            }
            parts.push((b, a));
        }
        Ok(KeySwitchKey { exponent, parts })
    }

    /// Rotation keys for the given slot steps; each must satisfy `0 < |r| < n`.
    pub fn gen_rotation_keys<R: RngCore + CryptoRng>(
        &self,
        sk: &SecretKey,
        steps: &[i64],
        rng: &mut R,
    ) -> Result<GaloisKeySet> {
        self.check(sk.params_id)?;
        let n = self.slot_count() as i64;
        let mut set = GaloisKeySet::empty(self.params_id);
        for &r in steps {
            if r == 0 || r.abs() >= n {
                return Err(Error::Parameter(format!(
                    "rotation step {r} must satisfy 0 < |r| < {n}"
                )));
            }
            if set.contains(r) {
                continue;
            }
            let key = self.gen_switch_key(sk, self.rotation_exponent(r), rng)?;
            set.insert(r, key);
        }
        Ok(set)
    }

    // ---- encoding ----

    /// Encodes up to `n` slot values; missing trailing slots are zero.
    pub fn encode(&self, values: &[u64]) -> Result<PlaintextVec> {
        let n = self.slot_count();
        let t = self.plaintext_modulus();
        if values.len() > n {
            return Err(Error::Capacity { len: values.len(), capacity: n });
        }
        if let Some(&v) = values.iter().find(|&&v| v >= t) {
            return Err(Error::Range { value: v, modulus: t });
        }
        let mut slots = values.to_vec();
        slots.resize(n, 0);
        let mut coeffs = vec![0u64; self.degree()];
        for (&idx, &v) in self.slot_index.iter().zip(&slots) {
            coeffs[idx] = v;
        }
        self.plain.tables()[0].inverse(&mut coeffs);
        Ok(PlaintextVec { slots, coeffs })
    }

    pub fn decode(&self, pt: &PlaintextVec) -> Vec<u64> {
        pt.slots.clone()
    }

    /// Interprets `m(X)` coefficients in `[0, t)` as a plaintext. Contributions outside the
    /// slot row are dropped on decode but kept in the encoding.
    pub fn plaintext_from_coeffs(&self, coeffs: Vec<u64>) -> Result<PlaintextVec> {
        let t = self.plaintext_modulus();
        if coeffs.len() != self.degree() {
            return Err(Error::Parameter(format!(
                "expected {} coefficients, got {}",
                self.degree(),
                coeffs.len()
            )));
        }
        if let Some(&v) = coeffs.iter().find(|&&v| v >= t) {
            return Err(Error::Range { value: v, modulus: t });
        }
        let mut evals = coeffs.clone();
        self.plain.tables()[0].forward(&mut evals);
        let slots = self.slot_index.iter().map(|&i| evals[i]).collect();
        Ok(PlaintextVec { slots, coeffs })
    }

    fn scaled_plain(&self, pt: &PlaintextVec) -> PolyRns {
        PolyRns::from_unsigned(&self.basis, &pt.coeffs)
            .expect("length matches degree")
            .mul_scalars(&self.delta)
            .into_domain(Domain::Ntt)
    }

    // ---- encryption ----

    pub fn encrypt<R: RngCore + CryptoRng>(
        &self,
        pk: &PublicKey,
        pt: &PlaintextVec,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        self.check(pk.params_id)?;
        let u = self.ntt_poly(&ternary_coeffs(self.degree(), rng));
        let e1 = self.noise_ntt(rng);
        let e2 = self.noise_ntt(rng);
        let mut c0 = pk.b.pointwise_mul(&u)?;
        c0.add_assign(&e1)?;
        c0.add_assign(&self.scaled_plain(pt))?;
        let mut c1 = pk.a.pointwise_mul(&u)?;
        c1.add_assign(&e2)?;
        Ok(Ciphertext { c0, c1, params_id: self.params_id, noise_log2: self.fresh_noise })
    }

    /// Computes `[t·(c0 + c1·s)]_q` per coefficient, returning the message and
    /// `max |w|` as log2 (`-inf` when `w = 0`).
    fn decrypt_core(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<(Vec<u64>, f64)> {
        self.check(sk.params_id)?;
        self.check(ct.params_id)?;
        let mut x = ct.c1.pointwise_mul(&sk.s)?;
        x.add_assign(&ct.c0)?;
        let x = x.into_domain(Domain::Coefficient).mul_scalars(&self.t_mod_q);
        let t = self.plaintext_modulus();
        let tm = &self.plain.primes()[0];
        let q = self.basis.modulus();
        let k = self.basis.len();
        let mut res = vec![0u64; k];
        let mut coeffs = Vec::with_capacity(self.degree());
        let mut max = WideUint::ZERO;
        for c in 0..self.degree() {
            for (i, r) in res.iter_mut().enumerate() {
                *r = x.residue(i)[c];
            }
            let w = self.basis.crt_compose(&res);
            // m = -w_c * q^-1 mod t, with w_c the centered representative of w.
            let (neg_wc, mag) = if w > self.half_q {
                let m = q.sub(&w);
                (m.rem_u64(t), m)
            } else {
                ((t - w.rem_u64(t)) % t, w)
            };
            coeffs.push(tm.mul(neg_wc, self.q_inv_mod_t));
            if mag > max {
                max = mag;
            }
        }
        Ok((coeffs, max.log2()))
    }

    pub fn decrypt(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<PlaintextVec> {
        let (coeffs, _) = self.decrypt_core(sk, ct)?;
        self.plaintext_from_coeffs(coeffs)
    }

    /// Exact remaining budget `log2(q / (2·‖w‖∞))`, clamped at zero.
    pub fn noise_budget(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<f64> {
        let (_, noise) = self.decrypt_core(sk, ct)?;
        Ok(noise::budget(self.log2_q, noise))
    }

    /// Decrypts and re-encrypts under fresh randomness.
    pub fn refresh<R: RngCore + CryptoRng>(
        &self,
        sk: &SecretKey,
        pk: &PublicKey,
        ct: &Ciphertext,
        rng: &mut R,
    ) -> Result<Ciphertext> {
        let pt = self.decrypt(sk, ct)?;
        self.encrypt(pk, &pt, rng)
    }

    // ---- evaluation ----

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        self.check(b.params_id)?;
        Ok(Ciphertext {
            c0: a.c0.add(&b.c0)?,
            c1: a.c1.add(&b.c1)?,
            params_id: self.params_id,
            noise_log2: noise::log2_sum(a.noise_log2, b.noise_log2),
        })
    }

    pub fn sub(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        self.check(b.params_id)?;
        Ok(Ciphertext {
            c0: a.c0.sub(&b.c0)?,
            c1: a.c1.sub(&b.c1)?,
            params_id: self.params_id,
            noise_log2: noise::log2_sum(a.noise_log2, b.noise_log2),
        })
    }

    pub fn add_plain(&self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        Ok(Ciphertext {
            c0: a.c0.add(&self.scaled_plain(pt))?,
            c1: a.c1.clone(),
            params_id: self.params_id,
            noise_log2: self.add_plain_noise(a.noise_log2, pt),
        })
    }

    pub fn sub_plain(&self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        Ok(Ciphertext {
            c0: a.c0.sub(&self.scaled_plain(pt))?,
            c1: a.c1.clone(),
            params_id: self.params_id,
            noise_log2: self.add_plain_noise(a.noise_log2, pt),
        })
    }

    /// Tracked noise after adding or subtracting `pt`.
    pub fn add_plain_noise(&self, noise_log2: f64, pt: &PlaintextVec) -> f64 {
        if pt.coeffs.iter().all(|&c| c == 0) {
            return noise_log2;
        }
        noise::plain_shift(noise_log2, self.plaintext_modulus(), self.q_mod_t)
    }

    /// Slot-wise product with a plaintext. The plaintext is lifted with centered coefficients,
    /// so the noise grows by exactly its 1-norm in the worst case.
    pub fn mult_plain(&self, a: &Ciphertext, pt: &PlaintextVec) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        let tm = &self.plain.primes()[0];
        let centered: Vec<i64> = pt.coeffs.iter().map(|&c| tm.center(c)).collect();
        let p = self.ntt_poly(&centered);
        Ok(Ciphertext {
            c0: a.c0.pointwise_mul(&p)?,
            c1: a.c1.pointwise_mul(&p)?,
            params_id: self.params_id,
            noise_log2: self.mult_plain_noise(a.noise_log2, pt),
        })
    }

    /// Tracked noise after multiplying by `pt`.
    pub fn mult_plain_noise(&self, noise_log2: f64, pt: &PlaintextVec) -> f64 {
        let tm = &self.plain.primes()[0];
        let l1: f64 = pt.coeffs.iter().map(|&c| tm.center(c).unsigned_abs() as f64).sum();
        noise::plain_mult(noise_log2, l1)
    }

    /// Tracked noise after a rotation.
    pub fn rotate_noise(&self, noise_log2: f64) -> f64 {
        noise::log2_sum(noise_log2, self.key_switch_noise)
    }

    /// Rotation: decrypted slot `i` of the result is slot `(i + r) mod n` of the input.
    pub fn rotate(&self, a: &Ciphertext, step: i64, keys: &GaloisKeySet) -> Result<Ciphertext> {
        self.check(a.params_id)?;
        self.check(keys.params_id)?;
        let key = keys.get(step)?;
        let c0 = a.c0.apply_automorphism(key.exponent)?;
        let c1 = a.c1.apply_automorphism(key.exponent)?;
        let (c0, c1) = self.key_switch(c0, c1, key)?;
        Ok(Ciphertext {
            c0,
            c1,
            params_id: self.params_id,
            noise_log2: self.rotate_noise(a.noise_log2),
        })
    }

    /// Switches `(c0, c1)` from `s(X^k)` to `s` using base-`2^w` digits of `c1`.
    fn key_switch(&self, c0: PolyRns, c1: PolyRns, key: &KeySwitchKey) -> Result<(PolyRns, PolyRns)> {
        if key.parts.len() != self.digits.len() {
            return Err(Error::Parameter(format!(
                "key-switching key has {} digits, expected {}",
                key.parts.len(),
                self.digits.len()
            )));
        }
        let n = self.degree();
        let k = self.basis.len();
        let c1 = c1.into_domain(Domain::Coefficient);
        let mask = (1u64 << self.params.decomposition_bits) - 1;
        let max_prime = self.basis.primes().iter().map(|p| p.value()).max().unwrap_or(2);
        let sq = (max_prime as u128 - 1) * (max_prime as u128 - 1);
        let budget = (u128::MAX / sq) as usize;

        let mut acc0 = vec![0u128; k * n];
        let mut acc1 = vec![0u128; k * n];
        let mut digit = vec![0u64; n];
        let mut pending = 0usize;
        for (&(l, shift), (b, a)) in self.digits.iter().zip(&key.parts) {
            if pending == budget {
                self.fold_accumulators(&mut acc0, &mut acc1);
                pending = 1;
            }
            pending += 1;
            let src = c1.residue(l);
            for (i, p) in self.basis.primes().iter().enumerate() {
                let pv = p.value();
                for (d, &s) in digit.iter_mut().zip(src) {
                    let v = (s >> shift) & mask;
                    *d = if v >= pv { v % pv } else { v };
                }
                self.basis.tables()[i].forward(&mut digit);
                let (br, ar) = (b.residue(i), a.residue(i));
                let (o0, o1) = (&mut acc0[i * n..(i + 1) * n], &mut acc1[i * n..(i + 1) * n]);
                for c in 0..n {
                    let d = digit[c] as u128;
                    o0[c] += d * br[c] as u128;
                    o1[c] += d * ar[c] as u128;
                }
            }
        }

        let mut out0 = c0;
        let mut out1 = PolyRns::zero(&self.basis, Domain::Ntt);
        for (i, p) in self.basis.primes().iter().enumerate() {
            let r0 = out0.residue_mut(i);
            for (x, &acc) in r0.iter_mut().zip(&acc0[i * n..(i + 1) * n]) {
                *x = p.add(*x, p.reduce_u128(acc));
            }
            let r1 = out1.residue_mut(i);
            for (x, &acc) in r1.iter_mut().zip(&acc1[i * n..(i + 1) * n]) {
                *x = p.reduce_u128(acc);
            }
        }
        Ok((out0, out1))
    }

    fn fold_accumulators(&self, acc0: &mut [u128], acc1: &mut [u128]) {
        let n = self.degree();
        for (i, p) in self.basis.primes().iter().enumerate() {
            for x in acc0[i * n..(i + 1) * n].iter_mut().chain(acc1[i * n..(i + 1) * n].iter_mut()) {
                *x = p.reduce_u128(*x) as u128;
            }
        }
    }
}
