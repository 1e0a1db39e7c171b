use std::sync::Arc;

use super::basis::RnsBasis;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Coefficient,
    Ntt,
}

/// An element of `Z_q[X]/(X^N + 1)` stored as one residue vector per prime (prime-major).
#[derive(Clone, Debug)]
pub struct PolyRns {
    basis: Arc<RnsBasis>,
    data: Vec<u64>,
    domain: Domain,
}

impl PartialEq for PolyRns {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.data == other.data && *self.basis == *other.basis
    }
}

impl Eq for PolyRns {}

impl PolyRns {
    pub fn zero(basis: &Arc<RnsBasis>, domain: Domain) -> Self {
        PolyRns {
            data: vec![0; basis.len() * basis.degree()],
            basis: basis.clone(),
            domain,
        }
    }

    /// Builds from prime-major residues; every value must already be reduced.
    pub fn from_residues(basis: &Arc<RnsBasis>, data: Vec<u64>, domain: Domain) -> Result<Self> {
        let n = basis.degree();
        if data.len() != basis.len() * n {
            return Err(Error::Parameter(format!(
                "expected {} residues, got {}",
                basis.len() * n,
                data.len()
            )));
        }
        for (chunk, p) in data.chunks(n).zip(basis.primes()) {
            if let Some(&bad) = chunk.iter().find(|&&c| c >= p.value()) {
                return Err(Error::Range { value: bad, modulus: p.value() });
            }
        }
        Ok(PolyRns { basis: basis.clone(), data, domain })
    }

    /// Coefficient-domain polynomial from small signed integer coefficients.
    pub fn from_signed(basis: &Arc<RnsBasis>, coeffs: &[i64]) -> Result<Self> {
        let n = basis.degree();
        if coeffs.len() != n {
            return Err(Error::Parameter(format!("expected {n} coefficients, got {}", coeffs.len())));
        }
        let mut data = Vec::with_capacity(basis.len() * n);
        for p in basis.primes() {
            data.extend(coeffs.iter().map(|&c| p.from_i64(c)));
        }
        Ok(PolyRns { basis: basis.clone(), data, domain: Domain::Coefficient })
    }

    /// Coefficient-domain polynomial from non-negative coefficients, reduced per prime.
    pub fn from_unsigned(basis: &Arc<RnsBasis>, coeffs: &[u64]) -> Result<Self> {
        let n = basis.degree();
        if coeffs.len() != n {
            return Err(Error::Parameter(format!("expected {n} coefficients, got {}", coeffs.len())));
        }
        let mut data = Vec::with_capacity(basis.len() * n);
        for p in basis.primes() {
            data.extend(coeffs.iter().map(|&c| p.reduce(c)));
        }
        Ok(PolyRns { basis: basis.clone(), data, domain: Domain::Coefficient })
    }

    pub fn basis(&self) -> &Arc<RnsBasis> {
        &self.basis
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn residue(&self, i: usize) -> &[u64] {
        let n = self.basis.degree();
        &self.data[i * n..(i + 1) * n]
    }

    pub(crate) fn residue_mut(&mut self, i: usize) -> &mut [u64] {
        let n = self.basis.degree();
        &mut self.data[i * n..(i + 1) * n]
    }

    /// All residues, prime-major.
    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&c| c == 0)
    }

    fn expect_domain(&self, expected: Domain) -> Result<()> {
        if self.domain != expected {
            return Err(Error::Domain { expected, found: self.domain });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &PolyRns) -> Result<()> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && *self.basis != *other.basis {
            return Err(Error::Parameter("polynomials use different RNS bases".into()));
        }
        if self.domain != other.domain {
            return Err(Error::Domain { expected: self.domain, found: other.domain });
        }
        Ok(())
    }

    pub fn ntt_forward(&self) -> Result<PolyRns> {
        self.expect_domain(Domain::Coefficient)?;
        let mut out = self.clone();
        out.forward_in_place();
        Ok(out)
    }

    pub fn ntt_inverse(&self) -> Result<PolyRns> {
        self.expect_domain(Domain::Ntt)?;
        let mut out = self.clone();
        out.inverse_in_place();
        Ok(out)
    }

    pub(crate) fn forward_in_place(&mut self) {
        debug_assert_eq!(self.domain, Domain::Coefficient);
        let n = self.basis.degree();
        let basis = self.basis.clone();
        for (chunk, t) in self.data.chunks_mut(n).zip(basis.tables()) {
            t.forward(chunk);
        }
        self.domain = Domain::Ntt;
    }

    pub(crate) fn inverse_in_place(&mut self) {
        debug_assert_eq!(self.domain, Domain::Ntt);
        let n = self.basis.degree();
        let basis = self.basis.clone();
        for (chunk, t) in self.data.chunks_mut(n).zip(basis.tables()) {
            t.inverse(chunk);
        }
        self.domain = Domain::Coefficient;
    }

    /// Converts to `domain`, transforming only if needed.
    pub fn into_domain(mut self, domain: Domain) -> PolyRns {
        match (self.domain, domain) {
            (Domain::Coefficient, Domain::Ntt) => self.forward_in_place(),
            (Domain::Ntt, Domain::Coefficient) => self.inverse_in_place(),
            _ => {}
        }
        self
    }

    fn zip_map(&self, other: &PolyRns, f: impl Fn(&super::PrimeModulus, u64, u64) -> u64) -> Result<PolyRns> {
        self.check_compatible(other)?;
        let n = self.basis.degree();
        let mut data = Vec::with_capacity(self.data.len());
        for (i, p) in self.basis.primes().iter().enumerate() {
            let (a, b) = (&self.data[i * n..(i + 1) * n], &other.data[i * n..(i + 1) * n]);
            data.extend(a.iter().zip(b).map(|(&x, &y)| f(p, x, y)));
        }
        Ok(PolyRns { basis: self.basis.clone(), data, domain: self.domain })
    }

    pub fn add(&self, other: &PolyRns) -> Result<PolyRns> {
        self.zip_map(other, |p, x, y| p.add(x, y))
    }

    pub fn sub(&self, other: &PolyRns) -> Result<PolyRns> {
        self.zip_map(other, |p, x, y| p.sub(x, y))
    }

    pub fn add_assign(&mut self, other: &PolyRns) -> Result<()> {
        self.check_compatible(other)?;
        let n = self.basis.degree();
        let basis = self.basis.clone();
        for (i, p) in basis.primes().iter().enumerate() {
            let b = &other.data[i * n..(i + 1) * n];
            for (x, &y) in self.data[i * n..(i + 1) * n].iter_mut().zip(b) {
                *x = p.add(*x, y);
            }
        }
        Ok(())
    }

    pub fn neg(&self) -> PolyRns {
        let n = self.basis.degree();
        let mut out = self.clone();
        for (chunk, p) in out.data.chunks_mut(n).zip(self.basis.primes()) {
            for x in chunk {
                *x = p.neg(*x);
            }
        }
        out
    }

    /// Slot-wise product of two NTT-domain polynomials.
    pub fn pointwise_mul(&self, other: &PolyRns) -> Result<PolyRns> {
        self.expect_domain(Domain::Ntt)?;
        self.zip_map(other, |p, x, y| p.mul(x, y))
    }

    /// Negacyclic product; the result is in the domain of `self`.
    pub fn mul(&self, other: &PolyRns) -> Result<PolyRns> {
        if !Arc::ptr_eq(&self.basis, &other.basis) && *self.basis != *other.basis {
            return Err(Error::Parameter("polynomials use different RNS bases".into()));
        }
        let a = self.clone().into_domain(Domain::Ntt);
        let b = other.clone().into_domain(Domain::Ntt);
        Ok(a.pointwise_mul(&b)?.into_domain(self.domain))
    }

    /// Multiplies residue `i` by `scalars[i]`.
    pub fn mul_scalars(&self, scalars: &[u64]) -> PolyRns {
        let n = self.basis.degree();
        let mut out = self.clone();
        for ((chunk, p), &s) in out.data.chunks_mut(n).zip(self.basis.primes()).zip(scalars) {
            let ws = p.shoup(s);
            for x in chunk {
                *x = p.mul_shoup(*x, s, ws);
            }
        }
        out
    }

    /// `p(X) -> p(X^k) mod (X^N + 1)` for odd `k`, in either domain.
    pub fn apply_automorphism(&self, k: usize) -> Result<PolyRns> {
        let n = self.basis.degree();
        let two_n = 2 * n;
        if k.is_multiple_of(2) {
            return Err(Error::Parameter(format!("automorphism exponent {k} is even")));
        }
        let k = k % two_n;
        let mut out = PolyRns::zero(&self.basis, self.domain);
        match self.domain {
            Domain::Coefficient => {
                for (i, p) in self.basis.primes().iter().enumerate() {
                    let src = &self.data[i * n..(i + 1) * n];
                    let dst = &mut out.data[i * n..(i + 1) * n];
                    for (j, &c) in src.iter().enumerate() {
                        let e = (j * k) % two_n;
                        if e < n {
                            dst[e] = c;
                        } else {
                            dst[e - n] = p.neg(c);
                        }
                    }
                }
            }
            Domain::Ntt => {
                let perm = self.ntt_automorphism_map(k);
                for i in 0..self.basis.len() {
                    let src = &self.data[i * n..(i + 1) * n];
                    let dst = &mut out.data[i * n..(i + 1) * n];
                    for (d, &s) in dst.iter_mut().zip(&perm) {
                        *d = src[s];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Index permutation `out[i] = in[perm[i]]` realizing `X -> X^k` on NTT-domain values.
    pub fn ntt_automorphism_map(&self, k: usize) -> Vec<usize> {
        ntt_automorphism_map(&self.basis, k)
    }
}

pub fn ntt_automorphism_map(basis: &RnsBasis, k: usize) -> Vec<usize> {
    let two_n = 2 * basis.degree();
    (0..basis.degree())
        .map(|i| basis.exponent_index((basis.eval_exponent(i) * k) % two_n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::modulus::ntt_primes;
    use proptest::prelude::*;

    fn basis(n: usize, count: usize) -> Arc<RnsBasis> {
        Arc::new(RnsBasis::new(n, &ntt_primes(60, n, count, &[]).unwrap()).unwrap())
    }

    fn monomial(b: &Arc<RnsBasis>, k: usize) -> PolyRns {
        let mut c = vec![0i64; b.degree()];
        c[k] = 1;
        PolyRns::from_signed(b, &c).unwrap()
    }

    #[test]
    fn forward_of_zero_and_constant() {
        let b = basis(16, 2);
        let z = PolyRns::zero(&b, Domain::Coefficient);
        assert!(z.ntt_forward().unwrap().is_zero());
        let mut c = vec![0i64; 16];
        c[0] = 42;
        let f = PolyRns::from_signed(&b, &c).unwrap().ntt_forward().unwrap();
        assert!(f.data().iter().all(|&x| x == 42));
    }

    #[test]
    fn domain_errors() {
        let b = basis(8, 1);
        let z = PolyRns::zero(&b, Domain::Coefficient);
        assert!(matches!(z.ntt_inverse(), Err(Error::Domain { .. })));
        let f = z.ntt_forward().unwrap();
        assert!(matches!(f.ntt_forward(), Err(Error::Domain { .. })));
        assert!(matches!(z.add(&f), Err(Error::Domain { .. })));
        let other = PolyRns::zero(&basis(16, 1), Domain::Coefficient);
        assert!(matches!(z.add(&other), Err(Error::Parameter(_))));
        assert!(matches!(z.mul(&other), Err(Error::Parameter(_))));
    }

    #[test]
    fn negacyclic_wraparound() {
        for n in [8usize, 16, 64] {
            let b = basis(n, 2);
            let half = monomial(&b, n / 2);
            let prod = half.mul(&half).unwrap();
            assert_eq!(prod, PolyRns::from_signed(&b, &{
                let mut c = vec![0i64; n];
                c[0] = -1;
                c
            }).unwrap());
            let one = monomial(&b, 0);
            assert_eq!(half.mul(&one).unwrap(), half);
        }
    }

    #[test]
    fn automorphism_examples() {
        let n = 16;
        let b = basis(n, 2);
        let x = monomial(&b, 1);
        assert_eq!(x.apply_automorphism(1).unwrap(), x);
        let conj = x.apply_automorphism(2 * n - 1).unwrap();
        let mut c = vec![0i64; n];
        c[n - 1] = -1;
        assert_eq!(conj, PolyRns::from_signed(&b, &c).unwrap());
        assert!(matches!(x.apply_automorphism(4), Err(Error::Parameter(_))));
    }

    proptest! {
        #[test]
        fn automorphism_inverse_and_composition(
            coeffs in proptest::collection::vec(-1000i64..1000, 16),
            k1 in 0usize..16, k2 in 0usize..16,
        ) {
            let n = 16;
            let b = basis(n, 2);
            let (k1, k2) = (2 * k1 + 1, 2 * k2 + 1);
            let p = PolyRns::from_signed(&b, &coeffs).unwrap();
            let k1_inv = (1..2 * n).step_by(2).find(|x| (x * k1) % (2 * n) == 1).unwrap();
            prop_assert_eq!(p.apply_automorphism(k1).unwrap().apply_automorphism(k1_inv).unwrap(), p.clone());
            let composed = p.apply_automorphism(k2).unwrap().apply_automorphism(k1).unwrap();
            prop_assert_eq!(composed, p.apply_automorphism((k1 * k2) % (2 * n)).unwrap());
            // NTT-domain permutation agrees with the coefficient map.
            let via_ntt = p.ntt_forward().unwrap().apply_automorphism(k1).unwrap().ntt_inverse().unwrap();
            prop_assert_eq!(via_ntt, p.apply_automorphism(k1).unwrap());
        }

        #[test]
        fn add_sub_identities(coeffs in proptest::collection::vec(any::<i64>(), 8)) {
            let b = basis(8, 3);
            let a = PolyRns::from_signed(&b, &coeffs).unwrap();
            let z = PolyRns::zero(&b, Domain::Coefficient);
            prop_assert_eq!(a.add(&z).unwrap(), a.clone());
            prop_assert!(a.sub(&a).unwrap().is_zero());
            prop_assert!(a.add(&a.neg()).unwrap().is_zero());
        }
    }
}
