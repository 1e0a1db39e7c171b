//! Seedable samplers for ring elements. All outputs are in the coefficient domain.

use std::sync::Arc;

use rand::{CryptoRng, Rng, RngCore};

use super::basis::RnsBasis;
use super::poly::{Domain, PolyRns};

/// Centered-binomial parameter: noise coefficients lie in `[-ETA, ETA]`, std. dev. ~3.24.
pub const NOISE_ETA: u32 = 21;

/// Uniform element of `R_q` (independent uniform residues, uniform by CRT).
pub fn sample_uniform<R: RngCore + CryptoRng>(basis: &Arc<RnsBasis>, rng: &mut R) -> PolyRns {
    let n = basis.degree();
    let mut data = Vec::with_capacity(basis.len() * n);
    for p in basis.primes() {
        data.extend((0..n).map(|_| rng.gen_range(0..p.value())));
    }
    PolyRns::from_residues(basis, data, Domain::Coefficient).expect("residues are reduced")
}

/// Uniform ternary coefficients in `{-1, 0, 1}`.
pub fn ternary_coeffs<R: RngCore + CryptoRng>(n: usize, rng: &mut R) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-1i64..=1)).collect()
}

pub fn sample_ternary<R: RngCore + CryptoRng>(basis: &Arc<RnsBasis>, rng: &mut R) -> PolyRns {
    PolyRns::from_signed(basis, &ternary_coeffs(basis.degree(), rng)).expect("length matches")
}

/// Centered binomial coefficients with parameter [`NOISE_ETA`].
pub fn noise_coeffs<R: RngCore + CryptoRng>(n: usize, rng: &mut R) -> Vec<i64> {
    binomial_coeffs(n, NOISE_ETA, rng)
}

/// Centered binomial coefficients in `[-eta, eta]`, `1 <= eta <= 32`.
pub fn binomial_coeffs<R: RngCore + CryptoRng>(n: usize, eta: u32, rng: &mut R) -> Vec<i64> {
    assert!((1..=32).contains(&eta), "binomial parameter {eta} out of range");
    let mask = if eta == 32 { u32::MAX as u64 } else { (1u64 << eta) - 1 };
    (0..n)
        .map(|_| {
            let bits = rng.next_u64();
            let a = (bits & mask).count_ones() as i64;
            let b = ((bits >> 32) & mask).count_ones() as i64;
            a - b
        })
        .collect()
}

pub fn sample_noise<R: RngCore + CryptoRng>(basis: &Arc<RnsBasis>, rng: &mut R) -> PolyRns {
    PolyRns::from_signed(basis, &noise_coeffs(basis.degree(), rng)).expect("length matches")
}
