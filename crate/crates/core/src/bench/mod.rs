//! Benchmark suites comparing packed and singular ciphertext layouts, the group-size sweep,
//! the aggregation comparison and a seeded oracle fuzzer.
//!
//! Timings use a monotonic clock and measure engine work only (no storage I/O). Sweep points
//! take the median of three runs; raw samples are reported alongside.

mod oracle;
mod report;

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub use oracle::PlaintextOracle;
pub use report::{print_lines, write_csv, BenchReport};

use crate::bfv::{default_rotation_steps, power_of_two_steps, BfvContext, Ciphertext, SchemeParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::pack::{InsertMode, KeyBundle, OpKind, PackEngine, PackedVector};

/// Runs per sweep point.
pub const SWEEP_RUNS: usize = 3;

/// Group sizes of the sweep suite.
pub const SWEEP_SIZES: [usize; 6] = [128, 256, 512, 1024, 2048, 4096];

/// Builds a context, keys for every default and power-of-two step, and an engine.
pub fn build_engine(params: SchemeParams, seed: Option<u64>) -> Result<PackEngine> {
    let ctx = Arc::new(BfvContext::new(params)?);
    let mut rng = match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s ^ 0x6b65_7973),
        None => ChaCha20Rng::from_entropy(),
    };
    let (sk, pk) = ctx.keygen(&mut rng);
    let mut steps = default_rotation_steps(ctx.slot_count());
    steps.extend(power_of_two_steps(ctx.slot_count()));
    let galois = ctx.gen_rotation_keys(&sk, &steps, &mut rng)?;
    Ok(PackEngine::new(ctx, KeyBundle { public: pk, secret: Some(sk), galois }, seed))
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn median(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    s[s.len() / 2]
}

fn samples_field(samples: &[f64]) -> String {
    samples.iter().map(|s| format!("{s:.3}")).collect::<Vec<_>>().join(";")
}

fn check_group_size(engine: &PackEngine, group_size: usize) -> Result<()> {
    if group_size == 0 || group_size > engine.capacity() {
        return Err(Error::Parameter(format!(
            "group size {group_size} not in [1, {}]",
            engine.capacity()
        )));
    }
    Ok(())
}

fn check_values(engine: &PackEngine, dataset: &Dataset) -> Result<()> {
    let t = engine.context().plaintext_modulus();
    if let Some((i, &v)) = dataset.values.iter().enumerate().find(|(_, &v)| v >= t) {
        return Err(Error::Ingest { row: i + 1, reason: format!("value {v} is not below {t}") });
    }
    Ok(())
}

fn new_report(engine: &PackEngine, suite: &str, dataset: &Dataset) -> BenchReport {
    BenchReport::new(suite, &dataset.name, dataset.len(), &engine.context().params().label())
}

/// Packs every group of `values`; returns the packs.
fn pack_all(engine: &mut PackEngine, values: &[u64], group_size: usize) -> Result<Vec<PackedVector>> {
    values
        .chunks(group_size)
        .enumerate()
        .map(|(g, chunk)| engine.pack_group(chunk, g as u64))
        .collect()
}

/// Packed (one encryption per group) versus singular (one encryption per tuple) ingestion.
pub fn run_encrypt_bench(
    engine: &mut PackEngine,
    dataset: &Dataset,
    group_size: usize,
    parallel: bool,
) -> Result<BenchReport> {
    check_group_size(engine, group_size)?;
    check_values(engine, dataset)?;
    let mut report = new_report(engine, "encrypt", dataset);
    report.parallel = parallel;
    report.push("group_size", group_size);

    let start = Instant::now();
    let groups = if parallel {
        parallel_pack(engine, &dataset.values, group_size)?
    } else {
        pack_all(engine, &dataset.values, group_size)?.len()
    };
    let packed_ms = elapsed_ms(start);

    let start = Instant::now();
    for &v in &dataset.values {
        engine.encrypt_slots(&[v])?;
    }
    let singular_ms = elapsed_ms(start);

    let tuples = dataset.len().max(1) as f64;
    report.push("groups", groups);
    report.push("packed_encryptions", groups);
    report.push("singular_encryptions", dataset.len());
    report.push_f64("packed_total_ms", packed_ms);
    report.push_f64("singular_total_ms", singular_ms);
    report.push_f64("packed_per_tuple_us", packed_ms * 1e3 / tuples);
    report.push_f64("singular_per_tuple_us", singular_ms * 1e3 / tuples);
    report.push_f64("speedup", singular_ms / packed_ms);
    Ok(report)
}

/// Group encryptions spread over all cores, one RNG stream per worker.
fn parallel_pack(engine: &mut PackEngine, values: &[u64], group_size: usize) -> Result<usize> {
    let ctx = engine.context().clone();
    let pk = engine.keys().public.clone();
    let chunks: Vec<&[u64]> = values.chunks(group_size).collect();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let per = chunks.len().div_ceil(workers).max(1);
    let seeds: Vec<u64> = (0..workers).map(|_| rand::random()).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = chunks
            .chunks(per)
            .zip(&seeds)
            .map(|(mine, &seed)| {
                let (ctx, pk) = (&ctx, &pk);
                s.spawn(move || -> Result<()> {
                    let mut rng = ChaCha20Rng::seed_from_u64(seed);
                    let t = ctx.plaintext_modulus();
                    for chunk in mine {
                        let mut slots = chunk.to_vec();
                        slots.resize(ctx.slot_count(), 0);
                        slots[ctx.slot_count() - 1] = chunk.iter().fold(0, |a, &v| (a + v) % t);
                        ctx.encrypt(pk, &ctx.encode(&slots)?, &mut rng)?;
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().try_for_each(|h| h.join().expect("worker panicked"))
    })?;
    Ok(chunks.len())
}

/// Initial content for the update suites: the first group, leaving room for `ops` inserts.
fn first_group(dataset: &Dataset, group_size: usize, room: usize) -> Vec<u64> {
    dataset.values[..group_size.min(room).min(dataset.len())].to_vec()
}

/// Encrypted one-tuple-per-ciphertext table.
fn singular_table(engine: &mut PackEngine, values: &[u64]) -> Result<Vec<Ciphertext>> {
    values.iter().map(|&v| engine.encrypt_slots(&[v])).collect()
}

fn verify_singular(engine: &mut PackEngine, table: &[Ciphertext], expected: &[u64]) -> Result<()> {
    if table.len() != expected.len() {
        return Err(Error::Divergence(format!(
            "singular table has {} rows, oracle {}",
            table.len(),
            expected.len()
        )));
    }
    for (i, (ct, &want)) in table.iter().zip(expected).enumerate() {
        let got = engine.decrypt_ciphertext(ct)?[0];
        if got != want {
            return Err(Error::Divergence(format!("singular row {i}: {got} != {want}")));
        }
    }
    Ok(())
}

fn verify_pack(engine: &mut PackEngine, pv: &PackedVector, oracle: &PlaintextOracle) -> Result<()> {
    let got = engine.decrypt_pack(pv)?;
    let want = oracle.expected_slots(pv.group_id());
    if got != want {
        let at = got.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(0);
        return Err(Error::Divergence(format!(
            "group {} slot {at}: {} != {}",
            pv.group_id(),
            got[at],
            want[at]
        )));
    }
    Ok(())
}

/// `ops` seeded-random inserts, packed (`insert_at`) versus singular (encrypt one tuple).
pub fn run_insert_bench(
    engine: &mut PackEngine,
    dataset: &Dataset,
    group_size: usize,
    ops: usize,
    seed: u64,
) -> Result<BenchReport> {
    check_group_size(engine, group_size)?;
    check_values(engine, dataset)?;
    let cap = engine.capacity();
    if ops > cap {
        return Err(Error::Parameter(format!("{ops} inserts exceed capacity {cap}")));
    }
    let t = engine.context().plaintext_modulus();
    let init = first_group(dataset, group_size, cap - ops);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let plan: Vec<(usize, u64)> = (0..ops)
        .map(|k| {
            let i = rng.gen_range(0..=init.len() + k);
            let v = if dataset.is_empty() { rng.gen_range(0..t) } else { dataset.values[k % dataset.len()] };
            (i, v)
        })
        .collect();

    let mut oracle = PlaintextOracle::new(t, engine.slot_count());
    oracle.pack(0, &init);
    let mut pv = engine.pack_group(&init, 0)?;
    engine.take_trace();
    let start = Instant::now();
    for &(i, v) in &plan {
        pv = engine.insert_at(&pv, i, v, InsertMode::Plain)?;
        oracle.insert(0, i, v);
    }
    let packed_ms = elapsed_ms(start);
    let trace = engine.take_trace();
    verify_pack(engine, &pv, &oracle)?;

    let mut table = singular_table(engine, &init)?;
    let start = Instant::now();
    for &(i, v) in &plan {
        let ct = engine.encrypt_slots(&[v])?;
        table.insert(i, ct);
    }
    let singular_ms = elapsed_ms(start);
    verify_singular(engine, &table, oracle.values(0))?;

    let mut report = new_report(engine, "insert", dataset);
    push_update_metrics(&mut report, group_size, init.len(), ops, packed_ms, singular_ms, &trace);
    Ok(report)
}

/// `ops` seeded-random deletes, packed (`delete_at`) versus singular (drop a ciphertext).
pub fn run_delete_bench(
    engine: &mut PackEngine,
    dataset: &Dataset,
    group_size: usize,
    ops: usize,
    seed: u64,
) -> Result<BenchReport> {
    check_group_size(engine, group_size)?;
    check_values(engine, dataset)?;
    let t = engine.context().plaintext_modulus();
    let init = first_group(dataset, group_size, engine.capacity());
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let mut oracle = PlaintextOracle::new(t, engine.slot_count());
    oracle.pack(0, &init);
    let mut pv = engine.pack_group(&init, 0)?;
    let mut plan = Vec::with_capacity(ops);
    engine.take_trace();
    let start = Instant::now();
    for _ in 0..ops {
        let len = oracle.len(0);
        let i = if len == 0 { 0 } else { rng.gen_range(0..len) };
        let v_del = oracle.values(0).get(i).copied().unwrap_or(0);
        pv = engine.delete_at(&pv, i, v_del)?;
        oracle.delete(0, i);
        plan.push(i);
    }
    let packed_ms = elapsed_ms(start);
    let trace = engine.take_trace();
    verify_pack(engine, &pv, &oracle)?;

    let mut table = singular_table(engine, &init)?;
    let start = Instant::now();
    for &i in &plan {
        if i < table.len() {
            table.remove(i);
        }
    }
    let singular_ms = elapsed_ms(start);
    verify_singular(engine, &table, oracle.values(0))?;

    let mut report = new_report(engine, "delete", dataset);
    push_update_metrics(&mut report, group_size, init.len(), ops, packed_ms, singular_ms, &trace);
    report.push("final_len", pv.len());
    report.push("inert", pv.is_empty());
    Ok(report)
}

fn push_update_metrics(
    report: &mut BenchReport,
    group_size: usize,
    initial_len: usize,
    ops: usize,
    packed_ms: f64,
    singular_ms: f64,
    trace: &crate::pack::OpTrace,
) {
    let per = ops.max(1) as f64;
    report.push("group_size", group_size);
    report.push("initial_len", initial_len);
    report.push("ops", ops);
    report.push_f64("packed_total_ms", packed_ms);
    report.push_f64("singular_total_ms", singular_ms);
    report.push_f64("packed_per_op_us", packed_ms * 1e3 / per);
    report.push_f64("singular_per_op_us", singular_ms * 1e3 / per);
    report.push_f64("speedup", singular_ms / packed_ms);
    report.push("rotations", trace.rotations());
    report.push("mask_mults", trace.count(OpKind::MultPlain));
    report.push_f64("rotations_per_op", trace.rotations() as f64 / per);
    report.push_f64("mask_mults_per_op", trace.count(OpKind::MultPlain) as f64 / per);
    report.push("refreshes", trace.count(OpKind::Refresh));
    report.push("oracle_match", true);
}

/// Encrypt / insert / delete totals over ascending group sizes (median of [`SWEEP_RUNS`]).
pub fn run_group_size_sweep(
    engine: &mut PackEngine,
    dataset: &Dataset,
    sizes: &[usize],
    ops: usize,
    seed: u64,
) -> Result<Vec<BenchReport>> {
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Parameter("sweep sizes must be strictly ascending".into()));
    }
    check_values(engine, dataset)?;
    let t = engine.context().plaintext_modulus();
    let cap = engine.capacity();
    let mut reports = Vec::with_capacity(sizes.len());
    let mut previous: Option<f64> = None;
    for &size in sizes {
        check_group_size(engine, size)?;
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ size as u64);
        let (mut enc, mut ins, mut del) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..SWEEP_RUNS {
            let start = Instant::now();
            pack_all(engine, &dataset.values, size)?;
            enc.push(elapsed_ms(start));

            let init = first_group(dataset, size, cap.saturating_sub(ops));
            let mut oracle = PlaintextOracle::new(t, engine.slot_count());
            oracle.pack(0, &init);
            let mut pv = engine.pack_group(&init, 0)?;
            let start = Instant::now();
            for k in 0..ops {
                let i = rng.gen_range(0..=oracle.len(0));
                let v = dataset.values[k % dataset.len()];
                pv = engine.insert_at(&pv, i, v, InsertMode::Plain)?;
                oracle.insert(0, i, v);
            }
            ins.push(elapsed_ms(start));
            verify_pack(engine, &pv, &oracle)?;

            let init = first_group(dataset, size, cap);
            oracle.pack(0, &init);
            let mut pv = engine.pack_group(&init, 0)?;
            let start = Instant::now();
            for _ in 0..ops {
                let len = oracle.len(0);
                let i = if len == 0 { 0 } else { rng.gen_range(0..len) };
                let v_del = oracle.values(0).get(i).copied().unwrap_or(0);
                pv = engine.delete_at(&pv, i, v_del)?;
                oracle.delete(0, i);
            }
            del.push(elapsed_ms(start));
            verify_pack(engine, &pv, &oracle)?;
        }
        let encrypt_ms = median(&enc);
        let mut report = new_report(engine, "sweep", dataset);
        report.push("group_size", size);
        report.push("groups", dataset.len().div_ceil(size));
        report.push("ops", ops);
        report.push_f64("encrypt_total_ms", encrypt_ms);
        report.push_f64("insert_total_ms", median(&ins));
        report.push_f64("delete_total_ms", median(&del));
        report.push("encrypt_samples_ms", samples_field(&enc));
        report.push("insert_samples_ms", samples_field(&ins));
        report.push("delete_samples_ms", samples_field(&del));
        report.push("encrypt_non_increasing", previous.is_none_or(|p| encrypt_ms <= p));
        previous = Some(encrypt_ms);
        reports.push(report);
    }
    Ok(reports)
}

/// Whether a sweep's encrypt totals never increase with group size.
pub fn sweep_is_non_increasing(reports: &[BenchReport]) -> bool {
    let totals: Vec<f64> = reports.iter().filter_map(|r| r.get_f64("encrypt_total_ms")).collect();
    totals.windows(2).all(|w| w[1] <= w[0])
}

/// Rotation-free aggregation (add ciphertexts, read the sum slot) versus the rotate-and-add
/// baseline on packs built without a sum slot.
pub fn run_aggregation_bench(engine: &mut PackEngine, dataset: &Dataset, group_size: usize) -> Result<BenchReport> {
    check_group_size(engine, group_size)?;
    check_values(engine, dataset)?;
    let groups = dataset.len().div_ceil(group_size);
    if groups < 4 {
        return Err(Error::Parameter(format!("aggregation bench needs >= 4 groups, dataset gives {groups}")));
    }
    let t = engine.context().plaintext_modulus();
    let packs = pack_all(engine, &dataset.values, group_size)?;
    let raw: Vec<Ciphertext> = dataset
        .values
        .chunks(group_size)
        .map(|chunk| engine.encrypt_slots(chunk))
        .collect::<Result<_>>()?;
    let expected = dataset.values.iter().fold(0u64, |a, &v| (a + v) % t);

    let (mut fast, mut slow) = (Vec::new(), Vec::new());
    let (mut fast_rot, mut slow_rot) = (0, 0);
    for _ in 0..SWEEP_RUNS {
        engine.take_trace();
        let start = Instant::now();
        let total = engine.global_sum(&packs)?;
        let got = engine.extract_sum(&total)?;
        fast.push(elapsed_ms(start));
        fast_rot = engine.take_trace().rotations();
        if got != expected {
            return Err(Error::Divergence(format!("rotation-free total {got} != {expected}")));
        }

        let start = Instant::now();
        let mut acc: Option<Ciphertext> = None;
        for ct in &raw {
            let summed = engine.rotate_baseline_sum(ct)?;
            acc = Some(match acc {
                None => summed,
                Some(a) => engine.context().add(&a, &summed)?,
            });
        }
        let got = engine.decrypt_ciphertext(&acc.expect("at least 4 groups"))?[0];
        slow.push(elapsed_ms(start));
        slow_rot = engine.take_trace().rotations();
        if got != expected {
            return Err(Error::Divergence(format!("baseline total {got} != {expected}")));
        }
    }
    let (fast_ms, slow_ms) = (median(&fast), median(&slow));
    let k = groups as f64;
    let mut report = new_report(engine, "aggregate", dataset);
    report.push("group_size", group_size);
    report.push("ciphertexts", groups);
    report.push("slots", engine.slot_count());
    report.push("rotation_free_rotations", fast_rot);
    report.push("baseline_rotations", slow_rot);
    report.push("baseline_rotations_per_ciphertext", slow_rot / groups);
    report.push_f64("rotation_free_total_ms", fast_ms);
    report.push_f64("baseline_total_ms", slow_ms);
    report.push_f64("rotation_free_per_ciphertext_ms", fast_ms / k);
    report.push_f64("baseline_per_ciphertext_ms", slow_ms / k);
    report.push_f64("speedup", slow_ms / fast_ms);
    report.push("total", expected);
    report.push("totals_match", true);
    Ok(report)
}

/// One step of a fuzz sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FuzzOp {
    Pack { group: u64, values: Vec<u64> },
    Insert { group: u64, index: usize, value: u64, mode: InsertMode },
    Append { group: u64, value: u64 },
    Delete { group: u64, index: usize },
    Sum,
}

impl fmt::Display for FuzzOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuzzOp::Pack { group, values } => write!(f, "pack g{group} {values:?}"),
            FuzzOp::Insert { group, index, value, mode } => {
                write!(f, "insert g{group} [{index}] = {value} ({mode:?})")
            }
            FuzzOp::Append { group, value } => write!(f, "append g{group} {value}"),
            FuzzOp::Delete { group, index } => write!(f, "delete g{group} [{index}]"),
            FuzzOp::Sum => f.write_str("sum"),
        }
    }
}

/// First divergence of a fuzz run, with the prefix of operations that reproduces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzFailure {
    pub seed: u64,
    pub step: usize,
    pub prefix: Vec<FuzzOp>,
    pub detail: String,
}

impl fmt::Display for FuzzFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed {} diverged at step {}: {}", self.seed, self.step, self.detail)?;
        for (i, op) in self.prefix.iter().enumerate() {
            writeln!(f, "  {i:>5}: {op}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzOutcome {
    pub ops_run: usize,
    pub failure: Option<FuzzFailure>,
}

impl FuzzOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

const FUZZ_GROUPS: u64 = 3;

/// Replays `op_count` random operations on the engine and a [`PlaintextOracle`], comparing
/// decryptions after every step. Stops at the first divergence.
pub fn oracle_fuzz(engine: &mut PackEngine, seed: u64, op_count: usize) -> Result<FuzzOutcome> {
    let t = engine.context().plaintext_modulus();
    let cap = engine.capacity();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut oracle = PlaintextOracle::new(t, engine.slot_count());
    let mut packs: Vec<PackedVector> = Vec::new();
    for g in 0..FUZZ_GROUPS {
        packs.push(engine.pack_group(&[], g)?);
        oracle.pack(g, &[]);
    }
    let mut done: Vec<FuzzOp> = Vec::with_capacity(op_count);
    for step in 0..op_count {
        let g = rng.gen_range(0..FUZZ_GROUPS);
        let gi = g as usize;
        let len = oracle.len(g);
        let op = match rng.gen_range(0..10) {
            0 => {
                let n = rng.gen_range(0..=cap);
                FuzzOp::Pack { group: g, values: (0..n).map(|_| rng.gen_range(0..t)).collect() }
            }
            1..=3 if len < cap => {
                let mode = if rng.gen() { InsertMode::Plain } else { InsertMode::Encrypted };
                FuzzOp::Insert { group: g, index: rng.gen_range(0..=len), value: rng.gen_range(0..t), mode }
            }
            4 if len < cap => FuzzOp::Append { group: g, value: rng.gen_range(0..t) },
            9 => FuzzOp::Sum,
            _ => FuzzOp::Delete { group: g, index: if len == 0 { 0 } else { rng.gen_range(0..len) } },
        };
        let check_group = match &op {
            FuzzOp::Pack { values, .. } => {
                packs[gi] = engine.pack_group(values, g)?;
                oracle.pack(g, values);
                Some(gi)
            }
            FuzzOp::Insert { index, value, mode, .. } => {
                packs[gi] = engine.insert_at(&packs[gi], *index, *value, *mode)?;
                oracle.insert(g, *index, *value);
                Some(gi)
            }
            FuzzOp::Append { value, .. } => {
                packs[gi] = engine.append(&packs[gi], *value)?;
                oracle.append(g, *value);
                Some(gi)
            }
            FuzzOp::Delete { index, .. } => {
                let v_del = oracle.values(g).get(*index).copied().unwrap_or(0);
                packs[gi] = engine.delete_at(&packs[gi], *index, v_del)?;
                oracle.delete(g, *index);
                Some(gi)
            }
            FuzzOp::Sum => None,
        };
        done.push(op);
        let detail = match check_group {
            Some(gi) => {
                let got = engine.decrypt_pack(&packs[gi])?;
                let want = oracle.expected_slots(gi as u64);
                (got != want || packs[gi].len() != oracle.len(gi as u64))
                    .then(|| format!("group {gi}: decrypted {got:?}, expected {want:?}"))
            }
            None => {
                let total = engine.global_sum(&packs)?;
                let got = engine.extract_sum(&total)?;
                (got != oracle.total()).then(|| format!("sum {got}, expected {}", oracle.total()))
            }
        };
        if let Some(detail) = detail {
            return Ok(FuzzOutcome {
                ops_run: step + 1,
                failure: Some(FuzzFailure { seed, step, prefix: done, detail }),
            });
        }
    }
    Ok(FuzzOutcome { ops_run: op_count, failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{covid_like, hg38_like};

    fn desk(degree: usize) -> PackEngine {
        build_engine(SchemeParams::desk(degree).unwrap(), Some(1)).unwrap()
    }

    #[test]
    fn fuzz_small_ring() {
        let mut e = desk(16);
        let out = oracle_fuzz(&mut e, 7, 2000).unwrap();
        assert!(out.passed(), "{}", out.failure.unwrap());
        assert_eq!(out.ops_run, 2000);
    }

    #[test]
    fn encrypt_bench_ratios() {
        let mut e = desk(64);
        let d = hg38_like(1);
        let d = Dataset { name: d.name, values: d.values[..620].to_vec() };
        let r = run_encrypt_bench(&mut e, &d, 31, false).unwrap();
        assert_eq!(r.get("groups"), Some("20"));
        assert!(r.get_f64("speedup").unwrap() > 1.0);
        let r1 = run_encrypt_bench(&mut e, &Dataset { name: "x".into(), values: vec![1; 40] }, 1, false).unwrap();
        // Group size 1 does the same work in both modes; wall-clock ratios are too noisy here.
        assert_eq!(r1.get("packed_encryptions"), r1.get("singular_encryptions"));
        assert_eq!(r1.get("packed_encryptions"), Some("40"));
        assert!(run_encrypt_bench(&mut e, &d, 32, false).is_err());
        let p = run_encrypt_bench(&mut e, &d, 31, true).unwrap();
        assert!(p.parallel);
    }

    #[test]
    fn update_benches_stay_oracle_equivalent() {
        let mut e = desk(256);
        let d = covid_like(2).reduced(65537);
        let ins = run_insert_bench(&mut e, &d, 20, 100, 3).unwrap();
        assert_eq!(ins.get("oracle_match"), Some("true"));
        assert_eq!(ins.get("rotations"), Some("100"));
        assert_eq!(ins.get("mask_mults"), Some("200"));
        let del = run_delete_bench(&mut e, &d, 60, 100, 4).unwrap();
        assert_eq!(del.get("inert"), Some("true"));
        assert_eq!(del.get("final_len"), Some("0"));
    }

    #[test]
    fn sweep_and_aggregation() {
        let mut e = desk(64);
        let d = Dataset { name: "h".into(), values: hg38_like(5).values[..300].to_vec() };
        let reports = run_group_size_sweep(&mut e, &d, &[4, 8, 16], 5, 1).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(run_group_size_sweep(&mut e, &d, &[8, 4], 5, 1).is_err());
        let agg = run_aggregation_bench(&mut e, &d, 31).unwrap();
        assert_eq!(agg.get("rotation_free_rotations"), Some("0"));
        assert_eq!(agg.get("baseline_rotations_per_ciphertext"), Some("5"));
        assert!(run_aggregation_bench(&mut e, &d, 31 * 3 + 10).is_err());
    }
}
