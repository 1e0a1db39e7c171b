//! Negacyclic number-theoretic transform over a single word-sized prime.
//!
//! Forward is Cooley–Tukey with bit-reversed powers of the `2N`-th root merged in, so the
//! output is in bit-reversed evaluation order; inverse is Gentleman–Sande. Butterflies are
//! lazy (Harvey): intermediate values stay in `[0, 4p)` and are fully reduced at the end.

use super::modulus::PrimeModulus;

#[derive(Clone, Debug)]
pub struct NttTables {
    modulus: PrimeModulus,
    log_n: u32,
    // psi^brv(k) and the matching Shoup constants.
    fwd: Vec<u64>,
    fwd_shoup: Vec<u64>,
    // psi^-brv(k).
    inv: Vec<u64>,
    inv_shoup: Vec<u64>,
    n_inv: u64,
    n_inv_shoup: u64,
}

pub(crate) fn bit_reverse(x: usize, bits: u32) -> usize {
    if bits == 0 {
        0
    } else {
        x.reverse_bits() >> (usize::BITS - bits)
    }
}

impl NttTables {
    pub fn new(modulus: PrimeModulus) -> Self {
        let n = modulus.degree();
        let log_n = n.trailing_zeros();
        let psi = modulus.root();
        let psi_inv = modulus.inv(psi).expect("root is a unit");
        let mut fwd = vec![0u64; n];
        let mut inv = vec![0u64; n];
        let (mut pw, mut pw_inv) = (1u64, 1u64);
        for k in 0..n {
            let r = bit_reverse(k, log_n);
            fwd[r] = pw;
            inv[r] = pw_inv;
            pw = modulus.mul(pw, psi);
            pw_inv = modulus.mul(pw_inv, psi_inv);
        }
        let fwd_shoup = fwd.iter().map(|&w| modulus.shoup(w)).collect();
        let inv_shoup = inv.iter().map(|&w| modulus.shoup(w)).collect();
        let n_inv = modulus.inv(n as u64).expect("degree is a unit");
        NttTables {
            n_inv_shoup: modulus.shoup(n_inv),
            n_inv,
            modulus,
            log_n,
            fwd,
            fwd_shoup,
            inv,
            inv_shoup,
        }
    }

    pub fn modulus(&self) -> &PrimeModulus {
        &self.modulus
    }

    pub fn degree(&self) -> usize {
        1 << self.log_n
    }

    /// In-place forward transform; input and output coefficients are in `[0, p)`.
    pub fn forward(&self, a: &mut [u64]) {
        let n = a.len();
        debug_assert_eq!(n, self.degree());
        let p = self.modulus.value();
        let two_p = 2 * p;
        let mut t = n;
        let mut m = 1;
        while m < n {
            t >>= 1;
            for (i, block) in a.chunks_exact_mut(2 * t).enumerate() {
                let w = self.fwd[m + i];
                let ws = self.fwd_shoup[m + i];
                let (lo, hi) = block.split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let u = if *x >= two_p { *x - two_p } else { *x };
                    let v = self.modulus.mul_shoup_lazy(*y, w, ws);
                    *x = u + v;
                    *y = u + two_p - v;
                }
            }
            m <<= 1;
        }
        for x in a.iter_mut() {
            let mut v = *x;
            if v >= two_p {
                v -= two_p;
            }
            if v >= p {
                v -= p;
            }
            *x = v;
        }
    }

    /// In-place inverse transform including the `N^-1` scaling.
    pub fn inverse(&self, a: &mut [u64]) {
        let n = a.len();
        debug_assert_eq!(n, self.degree());
        let p = self.modulus.value();
        let two_p = 2 * p;
        let mut t = 1;
        let mut m = n;
        while m > 1 {
            let h = m >> 1;
            for (i, block) in a.chunks_exact_mut(2 * t).enumerate() {
                let w = self.inv[h + i];
                let ws = self.inv_shoup[h + i];
                let (lo, hi) = block.split_at_mut(t);
                for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (u, v) = (*x, *y);
                    let mut s = u + v;
                    if s >= two_p {
                        s -= two_p;
                    }
                    *x = s;
                    *y = self.modulus.mul_shoup_lazy(u + two_p - v, w, ws);
                }
            }
            t <<= 1;
            m = h;
        }
        for x in a.iter_mut() {
            *x = self.modulus.mul_shoup(*x, self.n_inv, self.n_inv_shoup);
        }
    }
}
