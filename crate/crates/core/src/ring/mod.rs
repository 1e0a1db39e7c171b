//! Exact arithmetic in `R_q = Z_q[X]/(X^N + 1)` with `q` held as a product of word-sized
//! NTT-friendly primes.

mod basis;
mod modulus;
mod ntt;
mod poly;
mod sample;
mod wide;

pub use basis::RnsBasis;
pub use modulus::{is_prime, ntt_primes, PrimeModulus, MAX_PRIME_BITS};
pub use ntt::NttTables;
pub use poly::{ntt_automorphism_map, Domain, PolyRns};
pub use sample::{
    binomial_coeffs, noise_coeffs, sample_noise, sample_ternary, sample_uniform, ternary_coeffs, NOISE_ETA,
};
pub use wide::WideUint;

/// Upper bound on the number of primes in a basis.
pub const MAX_PRIMES: usize = 4;
