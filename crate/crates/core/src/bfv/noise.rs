//! Worst-case noise tracker.
//!
//! Every ciphertext carries an upper bound (as `log2`) on the infinity norm of its
//! invariant noise `w = [t * (c0 + c1*s)]_q`. Decryption is correct iff `|w| < q/2`, so the
//! remaining budget is `log2(q) - 1 - log2|w|`. Each bound below is a rigorous worst case
//! for the operation it models; a small slack absorbs floating-point rounding.

const SLACK: f64 = 1e-9;

/// `log2(2^a + 2^b)`, rounded up.
pub fn log2_sum(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2() + SLACK
}

/// Fresh public-key encryption: `w = t*(e1 + e2*s - e*u) - (q mod t)*m`.
pub fn fresh(t: u64, degree: usize, eta: u32, q_mod_t: u64) -> f64 {
    let err = eta as f64 * (2.0 * degree as f64 + 1.0);
    let term = t as f64 * err + q_mod_t as f64 * (t - 1) as f64;
    term.log2() + SLACK
}

/// Adding or subtracting a plaintext `p` with coefficients in `[0, t)` shifts `w` by
/// `-(q mod t) * p`.
pub fn plain_shift(noise: f64, t: u64, q_mod_t: u64) -> f64 {
    if q_mod_t == 0 {
        return noise;
    }
    log2_sum(noise, (q_mod_t as f64 * (t - 1) as f64).log2())
}

/// Multiplying by a plaintext with centered coefficient 1-norm `l1` maps `w` to `w * p`.
pub fn plain_mult(noise: f64, l1: f64) -> f64 {
    if l1 == 0.0 {
        return f64::NEG_INFINITY;
    }
    noise + l1.log2() + SLACK
}

/// Additive key-switching term `t * sum_j d_j * e_j` with `digits` digits below `2^w`.
pub fn key_switch(t: u64, degree: usize, eta: u32, digits: usize, digit_bits: u32) -> f64 {
    let bound = t as f64
        * digits as f64
        * degree as f64
        * ((1u64 << digit_bits) - 1) as f64
        * eta as f64;
    bound.log2() + SLACK
}

/// Remaining budget in bits given `log2(q)`, clamped at zero.
pub fn budget(log2_q: f64, noise: f64) -> f64 {
    (log2_q - 1.0 - noise.max(0.0)).max(0.0)
}
