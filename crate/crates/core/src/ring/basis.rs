use super::modulus::PrimeModulus;
use super::ntt::NttTables;
use super::wide::WideUint;
use super::MAX_PRIMES;
use crate::error::{Error, Result};

/// An ordered set of distinct NTT-friendly primes sharing one ring degree `N`.
///
/// `q` is the product of the primes; CRT constants for recombining residues into `[0, q)`
/// are precomputed here.
#[derive(Debug)]
pub struct RnsBasis {
    degree: usize,
    primes: Vec<PrimeModulus>,
    tables: Vec<NttTables>,
    q: WideUint,
    // q / q_i
    q_hat: Vec<WideUint>,
    // (q / q_i)^-1 mod q_i and its Shoup constant
    q_hat_inv: Vec<u64>,
    q_hat_inv_shoup: Vec<u64>,
    // ntt index -> exponent e with evaluation point psi^e
    eval_exponents: Vec<usize>,
    // exponent (odd, < 2N) -> ntt index
    exponent_index: Vec<usize>,
}

impl PartialEq for RnsBasis {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.primes == other.primes
    }
}

impl Eq for RnsBasis {}

impl RnsBasis {
    pub fn new(degree: usize, primes: &[u64]) -> Result<Self> {
        if degree < 2 || !degree.is_power_of_two() {
            return Err(Error::Parameter(format!("degree {degree} is not a power of two >= 2")));
        }
        if primes.is_empty() || primes.len() > MAX_PRIMES {
            return Err(Error::Parameter(format!(
                "basis needs 1..={MAX_PRIMES} primes, got {}",
                primes.len()
            )));
        }
        for (i, p) in primes.iter().enumerate() {
            if primes[..i].contains(p) {
                return Err(Error::Parameter(format!("duplicate prime {p} in basis")));
            }
        }
        let primes: Vec<PrimeModulus> = primes
            .iter()
            .map(|&p| PrimeModulus::new(p, degree))
            .collect::<Result<_>>()?;
        let tables: Vec<NttTables> = primes.iter().cloned().map(NttTables::new).collect();

        let mut q = WideUint::from_u64(1);
        for p in &primes {
            q = q.mul_u64(p.value());
        }
        let mut q_hat = Vec::with_capacity(primes.len());
        let mut q_hat_inv = Vec::with_capacity(primes.len());
        for (i, pi) in primes.iter().enumerate() {
            let mut h = WideUint::from_u64(1);
            for (j, pj) in primes.iter().enumerate() {
                if j != i {
                    h = h.mul_u64(pj.value());
                }
            }
            let inv = pi.inv(h.rem_u64(pi.value())).expect("primes are distinct");
            q_hat.push(h);
            q_hat_inv.push(inv);
        }
        let q_hat_inv_shoup = primes.iter().zip(&q_hat_inv).map(|(p, &v)| p.shoup(v)).collect();

        // Evaluation order of the forward transform, read off from ntt(X).
        let m0 = &primes[0];
        let two_n = 2 * degree;
        let mut x = vec![0u64; degree];
        x[1 % degree] = 1;
        tables[0].forward(&mut x);
        let mut log_table = std::collections::HashMap::with_capacity(two_n);
        let mut pw = 1u64;
        for e in 0..two_n {
            log_table.insert(pw, e);
            pw = m0.mul(pw, m0.root());
        }
        let eval_exponents: Vec<usize> = x.iter().map(|v| log_table[v]).collect();
        let mut exponent_index = vec![usize::MAX; two_n];
        for (i, &e) in eval_exponents.iter().enumerate() {
            exponent_index[e] = i;
        }

        Ok(RnsBasis {
            degree,
            primes,
            tables,
            q,
            q_hat,
            q_hat_inv,
            q_hat_inv_shoup,
            eval_exponents,
            exponent_index,
        })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[PrimeModulus] {
        &self.primes
    }

    pub fn prime_values(&self) -> Vec<u64> {
        self.primes.iter().map(|p| p.value()).collect()
    }

    pub fn tables(&self) -> &[NttTables] {
        &self.tables
    }

    /// The composite modulus `q`.
    pub fn modulus(&self) -> &WideUint {
        &self.q
    }

    pub fn log2_modulus(&self) -> f64 {
        self.q.log2()
    }

    /// Exponent `e` such that NTT slot `i` holds the evaluation at `psi^e`.
    pub fn eval_exponent(&self, index: usize) -> usize {
        self.eval_exponents[index]
    }

    /// Inverse of [`eval_exponent`](Self::eval_exponent); `e` must be odd and `< 2N`.
    pub fn exponent_index(&self, exponent: usize) -> usize {
        self.exponent_index[exponent]
    }

    /// Recombines one residue per prime into the unique integer in `[0, q)`.
    #[inline]
    pub fn crt_compose(&self, residues: &[u64]) -> WideUint {
        debug_assert_eq!(residues.len(), self.primes.len());
        let mut acc = WideUint::ZERO;
        for (i, &r) in residues.iter().enumerate() {
            let z = self.primes[i].mul_shoup(r, self.q_hat_inv[i], self.q_hat_inv_shoup[i]);
            acc.add_mul_u64(&self.q_hat[i], z);
        }
        // acc < len * q
        while acc >= self.q {
            acc = acc.sub(&self.q);
        }
        acc
    }

    /// Residues of a value in `[0, q)`.
    pub fn crt_decompose(&self, value: &WideUint) -> Vec<u64> {
        self.primes.iter().map(|p| value.rem_u64(p.value())).collect()
    }
}
