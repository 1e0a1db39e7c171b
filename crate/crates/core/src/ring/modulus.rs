//! Word-sized prime moduli with Barrett and Shoup helpers.

use crate::error::{Error, Result};

/// Largest supported prime width. Lazy NTT butterflies keep values below `4p`.
pub const MAX_PRIME_BITS: u32 = 61;

/// An NTT-friendly prime `p ≡ 1 (mod 2N)` together with a primitive `2N`-th root of unity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeModulus {
    value: u64,
    root: u64,
    degree: usize,
    // floor(2^128 / p), split into words.
    ratio_lo: u64,
    ratio_hi: u64,
}

impl PrimeModulus {
    /// Validates `value` for ring degree `degree` and picks the smallest primitive `2N`-th root.
    pub fn new(value: u64, degree: usize) -> Result<Self> {
        if !degree.is_power_of_two() || degree < 2 {
            return Err(Error::Parameter(format!("degree {degree} is not a power of two >= 2")));
        }
        if value < 3 || 64 - value.leading_zeros() > MAX_PRIME_BITS {
            return Err(Error::Parameter(format!(
                "modulus {value} must be in [3, 2^{MAX_PRIME_BITS})"
            )));
        }
        if !is_prime(value) {
            return Err(Error::Parameter(format!("modulus {value} is not prime")));
        }
        let two_n = 2 * degree as u64;
        if !(value - 1).is_multiple_of(two_n) {
            return Err(Error::Parameter(format!(
                "modulus {value} is not congruent to 1 mod {two_n}"
            )));
        }
        let ratio = u128::MAX / value as u128;
        let mut m = PrimeModulus {
            value,
            root: 0,
            degree,
            ratio_lo: ratio as u64,
            ratio_hi: (ratio >> 64) as u64,
        };
        m.root = m.find_primitive_root(two_n)?;
        Ok(m)
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Primitive `2N`-th root of unity.
    #[inline]
    pub fn root(&self) -> u64 {
        self.root
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn bits(&self) -> u32 {
        64 - self.value.leading_zeros()
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.value {
            s - self.value
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.value - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.value - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.reduce_u128(a as u128 * b as u128)
    }

    /// Barrett reduction of a full 128-bit value.
    #[inline]
    pub fn reduce_u128(&self, x: u128) -> u64 {
        let x0 = x as u64;
        let x1 = (x >> 64) as u64;
        let carry = ((x0 as u128 * self.ratio_lo as u128) >> 64) as u64;
        let t = x0 as u128 * self.ratio_hi as u128;
        let (mid, c0) = (t as u64).overflowing_add(carry);
        let hi = ((t >> 64) as u64) + c0 as u64;
        let u = x1 as u128 * self.ratio_lo as u128;
        let (_, c1) = mid.overflowing_add(u as u64);
        let carry2 = ((u >> 64) as u64) + c1 as u64;
        let quot = x1
            .wrapping_mul(self.ratio_hi)
            .wrapping_add(hi)
            .wrapping_add(carry2);
        let mut r = x0.wrapping_sub(quot.wrapping_mul(self.value));
        while r >= self.value {
            r -= self.value;
        }
        r
    }

    #[inline]
    pub fn reduce(&self, a: u64) -> u64 {
        if a < self.value {
            a
        } else {
            a % self.value
        }
    }

    /// Maps a signed integer into `[0, p)`.
    #[inline]
    pub fn from_i64(&self, a: i64) -> u64 {
        let r = self.reduce(a.unsigned_abs());
        if a < 0 {
            self.neg(r)
        } else {
            r
        }
    }

    /// Centered representative in `(-p/2, p/2]`.
    #[inline]
    pub fn center(&self, a: u64) -> i64 {
        if a > self.value / 2 {
            a as i64 - self.value as i64
        } else {
            a as i64
        }
    }

    pub fn pow(&self, base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        let mut b = base % self.value;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, b);
            }
            b = self.mul(b, b);
            exp >>= 1;
        }
        acc
    }

    /// Inverse via Fermat; `None` for zero.
    pub fn inv(&self, a: u64) -> Option<u64> {
        let a = a % self.value;
        (a != 0).then(|| self.pow(a, self.value - 2))
    }

    /// Shoup precomputation `floor(w * 2^64 / p)` for a fixed multiplicand `w < p`.
    #[inline]
    pub fn shoup(&self, w: u64) -> u64 {
        (((w as u128) << 64) / self.value as u128) as u64
    }

    /// `a * w mod p` in `[0, 2p)` given the Shoup constant of `w`.
    #[inline]
    pub fn mul_shoup_lazy(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let q = ((a as u128 * w_shoup as u128) >> 64) as u64;
        a.wrapping_mul(w).wrapping_sub(q.wrapping_mul(self.value))
    }

    #[inline]
    pub fn mul_shoup(&self, a: u64, w: u64, w_shoup: u64) -> u64 {
        let r = self.mul_shoup_lazy(a, w, w_shoup);
        if r >= self.value {
            r - self.value
        } else {
            r
        }
    }

    fn find_primitive_root(&self, order: u64) -> Result<u64> {
        let p = self.value;
        let cofactor = (p - 1) / order;
        // order is a power of two, so x has exact order `order` iff x^(order/2) = -1.
        for g in 2..p {
            let x = self.pow(g, cofactor);
            if self.pow(x, order / 2) == p - 1 {
                return Ok(x);
            }
        }
        Err(Error::Parameter(format!("no primitive {order}-th root modulo {p}")))
    }
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &p in &SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mulmod(acc, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        acc
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Finds `count` distinct primes of exactly `bits` bits with `p ≡ 1 (mod 2N)`, searching
/// downward from `2^bits`, skipping any value in `exclude`.
pub fn ntt_primes(bits: u32, degree: usize, count: usize, exclude: &[u64]) -> Result<Vec<u64>> {
    if !(10..=MAX_PRIME_BITS).contains(&bits) {
        return Err(Error::Parameter(format!("prime width {bits} not in [10, {MAX_PRIME_BITS}]")));
    }
    let two_n = 2 * degree as u64;
    let lower = 1u64 << (bits - 1);
    let mut candidate = ((1u64 << bits) - 1) / two_n * two_n + 1;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if candidate <= lower {
            return Err(Error::Parameter(format!(
                "not enough {bits}-bit NTT primes for degree {degree}"
            )));
        }
        if is_prime(candidate) && !exclude.contains(&candidate) {
            out.push(candidate);
        }
        candidate -= two_n;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0..5000u64 {
            assert_eq!(is_prime(n), trial(n), "n = {n}");
        }
        assert!(is_prime(65537));
        assert!(is_prime(786433));
        assert!(is_prime(5767169));
        assert!(!is_prime(65537 * 786433));
    }

    #[test]
    fn root_has_exact_order() {
        for (p, n) in [(17u64, 8usize), (65537, 16384), (786433, 16384), (5767169, 16384)] {
            let m = PrimeModulus::new(p, n).unwrap();
            let psi = m.root();
            assert_eq!(m.pow(psi, 2 * n as u64), 1);
            assert_eq!(m.pow(psi, n as u64), p - 1);
        }
    }

    #[test]
    fn rejects_unfriendly_moduli() {
        assert!(PrimeModulus::new(65537, 1 << 15).is_ok());
        assert!(PrimeModulus::new(65537, 1 << 16).is_err());
        assert!(PrimeModulus::new(15, 4).is_err());
        assert!(PrimeModulus::new(17, 12).is_err());
    }

    #[test]
    fn generated_primes_are_ntt_friendly() {
        let primes = ntt_primes(60, 1 << 14, 3, &[]).unwrap();
        assert_eq!(primes.len(), 3);
        for &p in &primes {
            assert_eq!(64 - p.leading_zeros(), 60);
            assert_eq!((p - 1) % (1 << 15), 0);
            assert!(is_prime(p));
        }
        assert!(primes[0] > primes[1] && primes[1] > primes[2]);
    }

    proptest! {
        #[test]
        fn barrett_matches_u128_remainder(a in any::<u64>(), b in any::<u64>(), k in 0usize..3) {
            let primes = ntt_primes(60, 8, 3, &[]).unwrap();
            let m = PrimeModulus::new(primes[k], 8).unwrap();
            let p = m.value();
            let (a, b) = (a % p, b % p);
            prop_assert_eq!(m.mul(a, b), ((a as u128 * b as u128) % p as u128) as u64);
            let x = (a as u128 * b as u128) * 16;
            prop_assert_eq!(m.reduce_u128(x), (x % p as u128) as u64);
        }

        #[test]
        fn shoup_matches_mul(a in any::<u64>(), w in any::<u64>()) {
            let m = PrimeModulus::new(65537, 16).unwrap();
            let p = m.value();
            let w = w % p;
            prop_assert_eq!(m.mul_shoup(a % p, w, m.shoup(w)), m.mul(a % p, w));
        }
    }
}
