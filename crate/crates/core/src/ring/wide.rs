//! Fixed-width little-endian multi-limb unsigned integers, just enough for CRT recombination
//! over at most [`MAX_PRIMES`](super::MAX_PRIMES) word-sized primes.

use std::cmp::Ordering;

pub const LIMBS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct WideUint(pub [u64; LIMBS]);

impl WideUint {
    pub const ZERO: WideUint = WideUint([0; LIMBS]);

    pub fn from_u64(x: u64) -> Self {
        let mut w = [0; LIMBS];
        w[0] = x;
        WideUint(w)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&l| l == 0)
    }

    /// `self * k`; panics in debug builds on overflow of the top limb.
    pub fn mul_u64(&self, k: u64) -> Self {
        let mut out = [0u64; LIMBS];
        let mut carry = 0u128;
        for (o, &l) in out.iter_mut().zip(&self.0) {
            let prod = l as u128 * k as u128 + carry;
            *o = prod as u64;
            carry = prod >> 64;
        }
        debug_assert_eq!(carry, 0, "WideUint overflow");
        WideUint(out)
    }

    /// `self += a * k`.
    #[inline]
    pub fn add_mul_u64(&mut self, a: &WideUint, k: u64) {
        let mut carry = 0u128;
        for (o, &l) in self.0.iter_mut().zip(&a.0) {
            let s = l as u128 * k as u128 + *o as u128 + carry;
            *o = s as u64;
            carry = s >> 64;
        }
        debug_assert_eq!(carry, 0, "WideUint overflow");
    }

    pub fn add(&self, other: &WideUint) -> Self {
        let mut out = [0u64; LIMBS];
        let mut carry = false;
        for i in 0..LIMBS {
            let (s1, c1) = self.0[i].overflowing_add(other.0[i]);
            let (s2, c2) = s1.overflowing_add(carry as u64);
            out[i] = s2;
            carry = c1 || c2;
        }
        debug_assert!(!carry, "WideUint overflow");
        WideUint(out)
    }

    /// `self - other`; requires `self >= other`.
    #[inline]
    pub fn sub(&self, other: &WideUint) -> Self {
        let mut out = [0u64; LIMBS];
        let mut borrow = false;
        for i in 0..LIMBS {
            let (d1, b1) = self.0[i].overflowing_sub(other.0[i]);
            let (d2, b2) = d1.overflowing_sub(borrow as u64);
            out[i] = d2;
            borrow = b1 || b2;
        }
        debug_assert!(!borrow, "WideUint underflow");
        WideUint(out)
    }

    /// Returns `(self / d, self % d)`.
    pub fn div_rem_u64(&self, d: u64) -> (Self, u64) {
        let mut out = [0u64; LIMBS];
        let mut rem = 0u128;
        for i in (0..LIMBS).rev() {
            let cur = (rem << 64) | self.0[i] as u128;
            out[i] = (cur / d as u128) as u64;
            rem = cur % d as u128;
        }
        (WideUint(out), rem as u64)
    }

    pub fn rem_u64(&self, d: u64) -> u64 {
        let mut rem = 0u128;
        for i in (0..LIMBS).rev() {
            rem = ((rem << 64) | self.0[i] as u128) % d as u128;
        }
        rem as u64
    }

    pub fn shr1(&self) -> Self {
        let mut out = [0u64; LIMBS];
        for i in 0..LIMBS {
            let hi = if i + 1 < LIMBS { self.0[i + 1] << 63 } else { 0 };
            out[i] = (self.0[i] >> 1) | hi;
        }
        WideUint(out)
    }

    pub fn bits(&self) -> u32 {
        for i in (0..LIMBS).rev() {
            if self.0[i] != 0 {
                return 64 * i as u32 + (64 - self.0[i].leading_zeros());
            }
        }
        0
    }

    /// `log2(self)`, or `-inf` for zero. Accurate to f64 precision.
    pub fn log2(&self) -> f64 {
        let bits = self.bits();
        if bits == 0 {
            return f64::NEG_INFINITY;
        }
        if bits <= 64 {
            return (self.0[0] as f64).log2();
        }
        // Take the top 64 significant bits.
        let shift = bits - 64;
        let (limb, off) = ((shift / 64) as usize, shift % 64);
        let mut top = self.0[limb] >> off;
        if off > 0 && limb + 1 < LIMBS {
            top |= self.0[limb + 1] << (64 - off);
        }
        (top as f64).log2() + shift as f64
    }

    pub fn to_le_bytes(&self) -> Vec<u8> {
        self.0.iter().flat_map(|l| l.to_le_bytes()).collect()
    }
}

impl PartialOrd for WideUint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WideUint {
    fn cmp(&self, other: &Self) -> Ordering {
        for i in (0..LIMBS).rev() {
            match self.0[i].cmp(&other.0[i]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn big(w: &WideUint) -> BigUint {
        BigUint::from_bytes_le(&w.to_le_bytes())
    }

    fn arb_wide(limbs: usize) -> impl Strategy<Value = WideUint> {
        proptest::collection::vec(any::<u64>(), limbs).prop_map(|v| {
            let mut w = [0u64; LIMBS];
            w[..v.len()].copy_from_slice(&v);
            WideUint(w)
        })
    }

    proptest! {
        #[test]
        fn arithmetic_matches_bigint(a in arb_wide(3), b in arb_wide(3), k in any::<u64>(), d in 1u64..) {
            prop_assert_eq!(big(&a.add(&b)), big(&a) + big(&b));
            prop_assert_eq!(big(&a.mul_u64(k)), big(&a) * k);
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            prop_assert_eq!(big(&hi.sub(&lo)), big(&hi) - big(&lo));
            let (q, r) = a.div_rem_u64(d);
            prop_assert_eq!(big(&q), big(&a) / d);
            prop_assert_eq!(BigUint::from(r), big(&a) % d);
            prop_assert_eq!(a.rem_u64(d), r);
            prop_assert_eq!(big(&a.shr1()), big(&a) >> 1u32);
            prop_assert_eq!(a.cmp(&b), big(&a).cmp(&big(&b)));
            prop_assert_eq!(a.bits() as u64, big(&a).bits());
            let mut acc = a;
            acc.add_mul_u64(&b, k);
            prop_assert_eq!(big(&acc), big(&a) + big(&b) * k);
        }
    }

    #[test]
    fn log2_of_powers() {
        let mut w = WideUint::from_u64(1);
        for e in 0..250 {
            assert!((w.log2() - e as f64).abs() < 1e-9, "2^{e}");
            w = w.mul_u64(2);
        }
        assert_eq!(WideUint::ZERO.log2(), f64::NEG_INFINITY);
    }
}
