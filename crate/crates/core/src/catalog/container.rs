//! Binary ciphertext container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "HPC1" | version u16 | params id [32] | N u64 | t u64 | k u64 | k × prime u64
//! | domain u8 (0 = coefficient, 1 = NTT) | c0: k·N × u64 | c1: k·N × u64
//! ```

use crate::bfv::{BfvContext, Ciphertext, ParamsId};
use crate::error::{Error, Result};
use crate::ring::{Domain, PolyRns};

pub const CIPHERTEXT_MAGIC: [u8; 4] = *b"HPC1";
pub const CONTAINER_VERSION: u16 = 1;

/// Size in bytes of the fixed header for `k` primes.
pub fn header_len(k: usize) -> usize {
    4 + 2 + 32 + 8 * 3 + 8 * k + 1
}

/// Writes the shared header fields after the magic and version.
pub(crate) fn write_params(out: &mut Vec<u8>, ctx: &BfvContext) {
    out.extend_from_slice(&ctx.params_id().0);
    let p = ctx.params();
    out.extend_from_slice(&(p.degree as u64).to_le_bytes());
    out.extend_from_slice(&p.plaintext_modulus.to_le_bytes());
    out.extend_from_slice(&(p.ciphertext_primes.len() as u64).to_le_bytes());
    for q in &p.ciphertext_primes {
        out.extend_from_slice(&q.to_le_bytes());
    }
}

pub(crate) fn write_poly(out: &mut Vec<u8>, poly: &PolyRns) {
    out.reserve(poly.data().len() * 8);
    for x in poly.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn serialize_ciphertext(ctx: &BfvContext, ct: &Ciphertext) -> Result<Vec<u8>> {
    if ct.params_id() != ctx.params_id() {
        return Err(Error::ParamsMismatch {
            expected: ctx.params_id().short(),
            found: ct.params_id().short(),
        });
    }
    let k = ctx.basis().len();
    let mut out = Vec::with_capacity(header_len(k) + 16 * k * ctx.degree());
    out.extend_from_slice(&CIPHERTEXT_MAGIC);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    write_params(&mut out, ctx);
    out.push(domain_flag(ct.c0().domain()));
    write_poly(&mut out, ct.c0());
    write_poly(&mut out, ct.c1());
    Ok(out)
}

/// Parses a container produced for `ctx`. The tracked noise of the result is set to the
/// pessimistic [`BfvContext::unknown_noise_log2`]; callers that know better may override it.
pub fn deserialize_ciphertext(ctx: &BfvContext, bytes: &[u8]) -> Result<Ciphertext> {
    let mut r = Reader::new(bytes);
    r.expect_magic(CIPHERTEXT_MAGIC)?;
    r.read_params(ctx)?;
    let domain = match r.u8()? {
        0 => Domain::Coefficient,
        1 => Domain::Ntt,
        f => return Err(Error::Format(format!("unknown domain flag {f}"))),
    };
    let c0 = r.poly(ctx, domain)?.into_domain(Domain::Ntt);
    let c1 = r.poly(ctx, domain)?.into_domain(Domain::Ntt);
    r.finish()?;
    Ciphertext::from_parts(c0, c1, ctx.params_id(), ctx.unknown_noise_log2())
}

pub(crate) fn domain_flag(d: Domain) -> u8 {
    match d {
        Domain::Coefficient => 0,
        Domain::Ntt => 1,
    }
}

/// Bounds-checked little-endian cursor.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if len > available {
            return Err(Error::Truncated { needed: self.pos + len, available: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub(crate) fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().expect("2 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn expect_magic(&mut self, magic: [u8; 4]) -> Result<()> {
        let found: [u8; 4] = self.take(4)?.try_into().expect("4 bytes");
        if found != magic {
            return Err(Error::BadMagic { expected: magic, found });
        }
        let version = self.u16()?;
        if version != CONTAINER_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        Ok(())
    }

    /// Reads the params block and checks it against `ctx`.
    pub(crate) fn read_params(&mut self, ctx: &BfvContext) -> Result<()> {
        let id = ParamsId(self.take(32)?.try_into().expect("32 bytes"));
        if id != ctx.params_id() {
            return Err(Error::ParamsMismatch {
                expected: ctx.params_id().short(),
                found: id.short(),
            });
        }
        let p = ctx.params();
        let degree = self.u64()?;
        let t = self.u64()?;
        let k = self.u64()?;
        if k > crate::ring::MAX_PRIMES as u64 {
            return Err(Error::Format(format!("prime count {k} too large")));
        }
        let mut primes = Vec::with_capacity(k as usize);
        for _ in 0..k {
            primes.push(self.u64()?);
        }
        if degree != p.degree as u64 || t != p.plaintext_modulus || primes != p.ciphertext_primes {
            return Err(Error::ParamsMismatch {
                expected: format!("N={} t={} primes={:?}", p.degree, p.plaintext_modulus, p.ciphertext_primes),
                found: format!("N={degree} t={t} primes={primes:?}"),
            });
        }
        Ok(())
    }

    pub(crate) fn poly(&mut self, ctx: &BfvContext, domain: Domain) -> Result<PolyRns> {
        let count = ctx.basis().len() * ctx.degree();
        let raw = self.take(count * 8)?;
        let data: Vec<u64> = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        PolyRns::from_residues(ctx.basis(), data, domain).map_err(|e| match e {
            Error::Range { value, modulus } => {
                Error::Format(format!("residue {value} not reduced mod {modulus}"))
            }
            other => other,
        })
    }

    pub(crate) fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after container",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfv::SchemeParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup(primes: &[u32]) -> (BfvContext, Ciphertext) {
        let ctx = BfvContext::new(SchemeParams::new(8, 17, primes).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let (_, pk) = ctx.keygen(&mut rng);
        let ct = ctx.encrypt(&pk, &ctx.encode(&[1, 2, 3]).unwrap(), &mut rng).unwrap();
        (ctx, ct)
    }

    #[test]
    fn size_and_roundtrip() {
        let (ctx, ct) = setup(&[60]);
        let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
        assert_eq!(bytes.len(), header_len(1) + 128);
        let back = deserialize_ciphertext(&ctx, &bytes).unwrap();
        assert_eq!(back.c0(), ct.c0());
        assert_eq!(back.c1(), ct.c1());
        assert_eq!(serialize_ciphertext(&ctx, &back).unwrap(), bytes);
    }

    #[test]
    fn load_errors() {
        let (ctx, ct) = setup(&[60, 60]);
        let bytes = serialize_ciphertext(&ctx, &ct).unwrap();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(deserialize_ciphertext(&ctx, &bad), Err(Error::BadMagic { .. })));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(matches!(deserialize_ciphertext(&ctx, &bad), Err(Error::UnsupportedVersion(9))));
        for cut in [0, 3, 10, header_len(2), bytes.len() - 1] {
            assert!(
                matches!(deserialize_ciphertext(&ctx, &bytes[..cut]), Err(Error::Truncated { .. })),
                "cut at {cut}"
            );
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(deserialize_ciphertext(&ctx, &long), Err(Error::Format(_))));
        let (other, _) = setup(&[60]);
        assert!(matches!(deserialize_ciphertext(&other, &bytes), Err(Error::ParamsMismatch { .. })));
    }
}
