//! Key files. Each uses the container header discipline with magic `HPK1` and a two-byte
//! role tag (`SK`, `PK`, `GK`) before the params block.
//!
//! The secret key file is sensitive: anyone holding it can decrypt every table.

use std::fs;
use std::path::{Path, PathBuf};

use super::container::{domain_flag, write_params, write_poly, Reader, CONTAINER_VERSION};
use super::write_atomic;
use crate::bfv::{BfvContext, GaloisKeySet, KeySwitchKey, PublicKey, SchemeParams, SecretKey};
use crate::error::{Error, Result};
use crate::ring::Domain;

pub const KEY_MAGIC: [u8; 4] = *b"HPK1";

pub const PARAMS_FILE: &str = "params.json";
pub const SECRET_KEY_FILE: &str = "secret.key";
pub const PUBLIC_KEY_FILE: &str = "public.key";
pub const GALOIS_KEY_FILE: &str = "galois.key";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeyRole {
    Secret,
    Public,
    Galois,
}

impl KeyRole {
    fn tag(self) -> [u8; 2] {
        match self {
            KeyRole::Secret => *b"SK",
            KeyRole::Public => *b"PK",
            KeyRole::Galois => *b"GK",
        }
    }
}

fn header(ctx: &BfvContext, role: KeyRole) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&KEY_MAGIC);
    out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
    out.extend_from_slice(&role.tag());
    write_params(&mut out, ctx);
    out.push(domain_flag(Domain::Ntt));
    out
}

fn open<'a>(ctx: &BfvContext, bytes: &'a [u8], role: KeyRole) -> Result<Reader<'a>> {
    let mut r = Reader::new(bytes);
    r.expect_magic(KEY_MAGIC)?;
    let tag = r.take(2)?;
    if tag != role.tag() {
        return Err(Error::Format(format!(
            "key role {:?} where {:?} was expected",
            String::from_utf8_lossy(tag),
            String::from_utf8_lossy(&role.tag())
        )));
    }
    r.read_params(ctx)?;
    if r.u8()? != domain_flag(Domain::Ntt) {
        return Err(Error::Format("key material must be in the NTT domain".into()));
    }
    Ok(r)
}

pub fn serialize_secret_key(ctx: &BfvContext, sk: &SecretKey) -> Vec<u8> {
    let mut out = header(ctx, KeyRole::Secret);
    write_poly(&mut out, sk.poly());
    out
}

pub fn deserialize_secret_key(ctx: &BfvContext, bytes: &[u8]) -> Result<SecretKey> {
    let mut r = open(ctx, bytes, KeyRole::Secret)?;
    let s = r.poly(ctx, Domain::Ntt)?;
    r.finish()?;
    Ok(SecretKey::from_poly(s, ctx.params_id()))
}

pub fn serialize_public_key(ctx: &BfvContext, pk: &PublicKey) -> Vec<u8> {
    let mut out = header(ctx, KeyRole::Public);
    let (b, a) = pk.polys();
    write_poly(&mut out, b);
    write_poly(&mut out, a);
    out
}

pub fn deserialize_public_key(ctx: &BfvContext, bytes: &[u8]) -> Result<PublicKey> {
    let mut r = open(ctx, bytes, KeyRole::Public)?;
    let b = r.poly(ctx, Domain::Ntt)?;
    let a = r.poly(ctx, Domain::Ntt)?;
    r.finish()?;
    Ok(PublicKey::from_polys(b, a, ctx.params_id()))
}

/// Body: key count u64, then per key: step i64, exponent u64, digit count u64, digits × (b, a).
pub fn serialize_galois_keys(ctx: &BfvContext, gk: &GaloisKeySet) -> Result<Vec<u8>> {
    if gk.params_id() != ctx.params_id() {
        return Err(Error::ParamsMismatch {
            expected: ctx.params_id().short(),
            found: gk.params_id().short(),
        });
    }
    let mut out = header(ctx, KeyRole::Galois);
    out.extend_from_slice(&(gk.len() as u64).to_le_bytes());
    for step in gk.steps() {
        let key = gk.get(step)?;
        out.extend_from_slice(&step.to_le_bytes());
        out.extend_from_slice(&(key.exponent() as u64).to_le_bytes());
        out.extend_from_slice(&(key.digit_count() as u64).to_le_bytes());
        for (b, a) in key.parts() {
            write_poly(&mut out, b);
            write_poly(&mut out, a);
        }
    }
    Ok(out)
}

pub fn deserialize_galois_keys(ctx: &BfvContext, bytes: &[u8]) -> Result<GaloisKeySet> {
    let mut r = open(ctx, bytes, KeyRole::Galois)?;
    let count = r.u64()?;
    let mut set = GaloisKeySet::empty(ctx.params_id());
    for _ in 0..count {
        let step = r.i64()?;
        let exponent = r.u64()? as usize;
        if exponent != ctx.rotation_exponent(step) {
            return Err(Error::Format(format!("rotation key for step {step} has exponent {exponent}")));
        }
        let digits = r.u64()? as usize;
        if digits != ctx.digit_count() {
            return Err(Error::Format(format!("rotation key has {digits} digits")));
        }
        let mut parts = Vec::with_capacity(digits);
        for _ in 0..digits {
            let b = r.poly(ctx, Domain::Ntt)?;
            let a = r.poly(ctx, Domain::Ntt)?;
            parts.push((b, a));
        }
        set.insert(step, KeySwitchKey::from_parts(exponent, parts));
    }
    r.finish()?;
    Ok(set)
}

/// Keys as stored in a key directory.
#[derive(Clone, Debug)]
pub struct StoredKeys {
    pub params: SchemeParams,
    pub secret: Option<SecretKey>,
    pub public: PublicKey,
    pub galois: GaloisKeySet,
}

fn key_paths(dir: &Path) -> [PathBuf; 4] {
    [PARAMS_FILE, SECRET_KEY_FILE, PUBLIC_KEY_FILE, GALOIS_KEY_FILE].map(|f| dir.join(f))
}

/// Whether any key file already exists in `dir`.
pub fn keys_exist(dir: &Path) -> bool {
    key_paths(dir).iter().any(|p| p.exists())
}

pub fn save_keys(
    dir: &Path,
    ctx: &BfvContext,
    sk: &SecretKey,
    pk: &PublicKey,
    gk: &GaloisKeySet,
) -> Result<()> {
    fs::create_dir_all(dir)?;
    let [params, secret, public, galois] = key_paths(dir);
    write_atomic(&params, serde_json::to_string_pretty(ctx.params())?.as_bytes())?;
    write_atomic(&secret, &serialize_secret_key(ctx, sk))?;
    write_atomic(&public, &serialize_public_key(ctx, pk))?;
    write_atomic(&galois, &serialize_galois_keys(ctx, gk)?)?;
    Ok(())
}

pub fn load_params(dir: &Path) -> Result<SchemeParams> {
    let text = fs::read_to_string(dir.join(PARAMS_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

/// Loads every key in `dir`, checking each file against `ctx`. A missing secret key is
/// allowed (encrypt-only setups).
pub fn load_keys(dir: &Path, ctx: &BfvContext) -> Result<StoredKeys> {
    let params = load_params(dir)?;
    if params.params_id() != ctx.params_id() {
        return Err(Error::ParamsMismatch {
            expected: ctx.params_id().short(),
            found: params.params_id().short(),
        });
    }
    let [_, secret, public, galois] = key_paths(dir);
    let secret = match fs::read(&secret) {
        Ok(bytes) => Some(deserialize_secret_key(ctx, &bytes)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    let public = deserialize_public_key(ctx, &fs::read(public)?)?;
    let galois = deserialize_galois_keys(ctx, &fs::read(galois)?)?;
    Ok(StoredKeys { params, secret, public, galois })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn keys_roundtrip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let ctx = BfvContext::new(SchemeParams::desk(16).unwrap()).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (sk, pk) = ctx.keygen(&mut rng);
        let gk = ctx.gen_rotation_keys(&sk, &[1, -1, 2], &mut rng).unwrap();
        assert!(!keys_exist(dir.path()));
        save_keys(dir.path(), &ctx, &sk, &pk, &gk).unwrap();
        assert!(keys_exist(dir.path()));

        let loaded = load_keys(dir.path(), &ctx).unwrap();
        assert_eq!(loaded.secret.as_ref(), Some(&sk));
        assert_eq!(loaded.public, pk);
        assert_eq!(loaded.galois, gk);
        assert_eq!(serialize_public_key(&ctx, &loaded.public), serialize_public_key(&ctx, &pk));

        let ct = ctx.encrypt(&loaded.public, &ctx.encode(&[3, 1, 4]).unwrap(), &mut rng).unwrap();
        let rotated = ctx.rotate(&ct, 2, &loaded.galois).unwrap();
        assert_eq!(
            ctx.decrypt(loaded.secret.as_ref().unwrap(), &rotated).unwrap(),
            ctx.decrypt(&sk, &ctx.rotate(&ct, 2, &gk).unwrap()).unwrap()
        );

        let other = BfvContext::new(SchemeParams::desk(32).unwrap()).unwrap();
        assert!(matches!(load_keys(dir.path(), &other), Err(Error::ParamsMismatch { .. })));
    }

    #[test]
    fn role_tags_are_checked() {
        let ctx = BfvContext::new(SchemeParams::desk(8).unwrap()).unwrap();
        let (sk, pk) = ctx.keygen(&mut ChaCha20Rng::seed_from_u64(1));
        let bytes = serialize_secret_key(&ctx, &sk);
        assert!(matches!(deserialize_public_key(&ctx, &bytes), Err(Error::Format(_))));
        let bytes = serialize_public_key(&ctx, &pk);
        assert!(matches!(
            deserialize_public_key(&ctx, &bytes[..bytes.len() - 3]),
            Err(Error::Truncated { .. })
        ));
    }
}
