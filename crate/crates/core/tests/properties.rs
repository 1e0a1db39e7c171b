use std::sync::Arc;

use hermes::bench::{self, PlaintextOracle};
use hermes::bfv::{BfvContext, SchemeParams};
use hermes::catalog::{deserialize_ciphertext, serialize_ciphertext};
use hermes::pack::{InsertMode, KeyBundle, PackEngine, PackedVector, RefreshPolicy};
use hermes::ring::{ntt_primes, Domain, PolyRns, RnsBasis};
use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

fn engine(degree: usize, seed: u64) -> PackEngine {
    let ctx = Arc::new(BfvContext::new(SchemeParams::desk(degree).unwrap()).unwrap());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (sk, pk) = ctx.keygen(&mut rng);
    let galois = ctx.gen_rotation_keys(&sk, &[1, -1], &mut rng).unwrap();
    PackEngine::new(ctx, KeyBundle { public: pk, secret: Some(sk), galois }, Some(seed))
}

fn schoolbook(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let n = a.len();
    let p = p as u128;
    let mut out = vec![0u128; n];
    for i in 0..n {
        for j in 0..n {
            let prod = a[i] as u128 * b[j] as u128 % p;
            if i + j < n {
                out[i + j] = (out[i + j] + prod) % p;
            } else {
                out[i + j - n] = (out[i + j - n] + p - prod) % p;
            }
        }
    }
    out.into_iter().map(|x| x as u64).collect()
}

fn basis(degree: usize, count: usize) -> Arc<RnsBasis> {
    Arc::new(RnsBasis::new(degree, &ntt_primes(60, degree, count, &[]).unwrap()).unwrap())
}

#[derive(Clone, Debug)]
enum Op {
    Pack(Vec<u64>),
    Insert(usize, u64, bool),
    Append(u64),
    Delete(usize),
}

fn op() -> impl Strategy<Value = Op> {
    let v = 0u64..65537;
    prop_oneof![
        prop::collection::vec(v.clone(), 0..=7).prop_map(Op::Pack),
        (any::<usize>(), v.clone(), any::<bool>()).prop_map(|(i, v, e)| Op::Insert(i, v, e)),
        v.prop_map(Op::Append),
        any::<usize>().prop_map(Op::Delete),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ntt_product_matches_schoolbook(log_n in 2u32..=6, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let b = basis(n, 2);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha20Rng| -> Vec<u64> {
            b.prime_values().iter().flat_map(|&p| (0..n).map(move |_| p)).map(|p| rand::Rng::gen_range(rng, 0..p)).collect()
        };
        let (ra, rb) = (draw(&mut rng), draw(&mut rng));
        let a = PolyRns::from_residues(&b, ra.clone(), Domain::Coefficient).unwrap();
        let c = a.mul(&PolyRns::from_residues(&b, rb.clone(), Domain::Coefficient).unwrap()).unwrap();
        for (i, &p) in b.prime_values().iter().enumerate() {
            let s = i * n..(i + 1) * n;
            let want = schoolbook(&ra[s.clone()], &rb[s], p);
            prop_assert_eq!(c.residue(i), want.as_slice());
        }
    }

    #[test]
    fn ntt_roundtrip_is_identity(log_n in 1u32..=8, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let b = basis(n, 3);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let data: Vec<u64> = b.prime_values().iter().flat_map(|&p| (0..n).map(move |_| p))
            .map(|p| rand::Rng::gen_range(&mut rng, 0..p)).collect();
        let a = PolyRns::from_residues(&b, data, Domain::Coefficient).unwrap();
        prop_assert_eq!(a.ntt_forward().unwrap().ntt_inverse().unwrap(), a);
    }

    #[test]
    fn crt_compose_matches_bigint(r0 in any::<u64>(), r1 in any::<u64>(), r2 in any::<u64>()) {
        let b = basis(16, 3);
        let primes = b.prime_values();
        let residues: Vec<u64> = [r0, r1, r2].iter().zip(&primes).map(|(r, p)| r % p).collect();
        let composed = b.crt_compose(&residues);
        let got = BigUint::from_bytes_le(&composed.to_le_bytes());
        let q: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
        prop_assert!(got < q);
        for (&r, &p) in residues.iter().zip(&primes) {
            prop_assert_eq!(&got % BigUint::from(p), BigUint::from(r));
        }
        prop_assert_eq!(b.crt_decompose(&composed), residues);
    }

    #[test]
    fn pack_ops_track_the_oracle(ops in prop::collection::vec(op(), 1..24), seed in any::<u64>()) {
        let mut e = engine(16, seed);
        let t = e.context().plaintext_modulus();
        let mut oracle = PlaintextOracle::new(t, e.slot_count());
        let mut pv: PackedVector = e.pack_group(&[], 0).unwrap();
        oracle.pack(0, &[]);
        for op in ops {
            let l = oracle.len(0);
            match op {
                Op::Pack(vals) => {
                    pv = e.pack_group(&vals, 0).unwrap();
                    oracle.pack(0, &vals);
                }
                Op::Insert(i, v, enc) if l < 7 => {
                    let i = i % (l + 1);
                    let mode = if enc { InsertMode::Encrypted } else { InsertMode::Plain };
                    pv = e.insert_at(&pv, i, v, mode).unwrap();
                    oracle.insert(0, i, v);
                }
                Op::Append(v) if l < 7 => {
                    pv = e.append(&pv, v).unwrap();
                    oracle.append(0, v);
                }
                Op::Delete(i) if l > 0 => {
                    let i = i % l;
                    let v = oracle.values(0)[i];
                    pv = e.delete_at(&pv, i, v).unwrap();
                    oracle.delete(0, i);
                }
                _ => {
                    prop_assert!(e.append(&pv, 0).is_err() || l < 7);
                    continue;
                }
            }
            prop_assert_eq!(e.decrypt_pack(&pv).unwrap(), oracle.expected_slots(0));
            prop_assert_eq!(pv.len(), oracle.len(0));
        }
    }

    #[test]
    fn tracked_budget_never_exceeds_exact(ops in prop::collection::vec((any::<bool>(), 0u64..65537), 1..5), seed in any::<u64>()) {
        let mut e = engine(64, seed).with_policy(RefreshPolicy::Off);
        let mut pv = e.pack_group(&[1, 2, 3], 0).unwrap();
        prop_assert!(e.tracked_budget(&pv) <= e.exact_budget(&pv).unwrap());
        for (ins, v) in ops {
            pv = if ins || pv.is_empty() {
                e.insert_at(&pv, 0, v, InsertMode::Plain).unwrap()
            } else {
                let v_del = e.decrypt_slot(&pv, 0).unwrap().unwrap();
                e.delete_at(&pv, 0, v_del).unwrap()
            };
            let (tracked, exact) = (e.tracked_budget(&pv), e.exact_budget(&pv).unwrap());
            prop_assert!(tracked <= exact, "tracked {} > exact {}", tracked, exact);
        }
    }

    #[test]
    fn container_roundtrip(values in prop::collection::vec(0u64..65537, 0..=15), seed in any::<u64>()) {
        let mut e = engine(32, seed);
        let ctx = e.context().clone();
        let pv = e.pack_group(&values, 3).unwrap();
        let bytes = serialize_ciphertext(&ctx, pv.ciphertext()).unwrap();
        let back = deserialize_ciphertext(&ctx, &bytes).unwrap();
        prop_assert_eq!(serialize_ciphertext(&ctx, &back).unwrap(), bytes.clone());
        prop_assert_eq!(e.decrypt_ciphertext(&back).unwrap(), e.decrypt_pack(&pv).unwrap());
        for cut in [0, 3, 40, bytes.len() - 1] {
            prop_assert!(deserialize_ciphertext(&ctx, &bytes[..cut]).is_err());
        }
    }

    #[test]
    fn encode_decode_roundtrip(values in prop::collection::vec(0u64..65537, 0..=16)) {
        let ctx = BfvContext::new(SchemeParams::desk(32).unwrap()).unwrap();
        let pt = ctx.encode(&values).unwrap();
        let mut padded = values.clone();
        padded.resize(16, 0);
        prop_assert_eq!(ctx.decode(&pt), padded.clone());
        let rebuilt = ctx.plaintext_from_coeffs(pt.coeffs().to_vec()).unwrap();
        prop_assert_eq!(rebuilt.slots(), padded.as_slice());
    }
}

#[test]
fn fuzz_is_seed_deterministic() {
    let run = |seed| {
        let mut e = bench::build_engine(SchemeParams::desk(16).unwrap(), Some(seed)).unwrap();
        bench::oracle_fuzz(&mut e, seed, 400).unwrap()
    };
    assert_eq!(run(5), run(5));
    assert!(run(6).passed());
}

#[test]
fn fuzz_boundary_sweeps() {
    // Fill to capacity, then drain to empty, mixing insert modes.
    let mut e = engine(16, 9);
    let t = e.context().plaintext_modulus();
    let mut oracle = PlaintextOracle::new(t, 8);
    let mut pv = e.pack_group(&[], 0).unwrap();
    for k in 0..7u64 {
        let mode = if k % 2 == 0 { InsertMode::Plain } else { InsertMode::Encrypted };
        pv = e.insert_at(&pv, (k as usize) / 2, 1000 + k, mode).unwrap();
        oracle.insert(0, (k as usize) / 2, 1000 + k);
        assert_eq!(e.decrypt_pack(&pv).unwrap(), oracle.expected_slots(0));
    }
    assert!(e.insert_at(&pv, 0, 1, InsertMode::Plain).is_err());
    while !pv.is_empty() {
        let i = pv.len() / 2;
        let v = oracle.delete(0, i).unwrap();
        pv = e.delete_at(&pv, i, v).unwrap();
        assert_eq!(e.decrypt_pack(&pv).unwrap(), oracle.expected_slots(0));
    }
    let inert = e.delete_at(&pv, 0, 0).unwrap();
    assert_eq!(e.decrypt_pack(&inert).unwrap(), vec![0; 8]);
}
