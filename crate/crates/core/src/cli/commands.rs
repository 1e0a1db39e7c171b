use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{
    Baseline, BenchArgs, Cli, Command, DeleteArgs, FuzzArgs, GetArgs, IngestArgs, InsertArgs, KeygenArgs, ModeArg,
    Output, PolicyArg, Rotations, Suite, SumArgs, UpdatePolicy, EXIT_OK,
};
use crate::bench::{self, BenchReport};
use crate::bfv::{default_rotation_steps, BfvContext, SchemeParams};
use crate::catalog::{keys_exist, load_keys, load_params, save_keys, Catalog, TableCatalog, PARAMS_FILE};
use crate::dataset::{self, Dataset, Overflow, Scale};
use crate::error::{Error, Result};
use crate::pack::{InsertMode, KeyBundle, OpKind, OpTrace, PackEngine, PackedVector, RefreshPolicy};

/// Default tuples per ciphertext, capped at the pack capacity.
const DEFAULT_GROUP_SIZE: usize = 4096;

pub fn dispatch(cli: &Cli, out: &mut Output) -> Result<i32> {
    match &cli.command {
        Command::Keygen(a) => keygen(cli, a, out),
        Command::Ingest(a) => ingest(cli, a, out),
        Command::Insert(a) => insert(cli, a, out),
        Command::Delete(a) => delete(cli, a, out),
        Command::Sum(a) => sum(cli, a, out),
        Command::Get(a) => get(cli, a, out),
        Command::Bench(a) => run_bench(cli, a, out),
        Command::Fuzz(a) => fuzz(cli, a, out),
        Command::Info => info(cli, out),
    }
    .map(|()| EXIT_OK)
}

fn rng(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn default_group_size(engine: &PackEngine) -> usize {
    DEFAULT_GROUP_SIZE.min(engine.capacity())
}

fn check_group_size(engine: &PackEngine, size: usize) -> Result<()> {
    if size == 0 || size > engine.capacity() {
        return Err(Error::Parameter(format!(
            "group size {size} must be in 1..={} (n-1 with n = {} slots)",
            engine.capacity(),
            engine.slot_count()
        )));
    }
    Ok(())
}

fn load_engine(cli: &Cli, seed_salt: u64) -> Result<(PackEngine, Catalog)> {
    let dir = cli.keys_dir();
    if !dir.join(PARAMS_FILE).exists() {
        return Err(Error::Parameter(format!("no keys in {}; run `hermes keygen` first", dir.display())));
    }
    let ctx = Arc::new(BfvContext::new(load_params(&dir)?)?);
    let stored = load_keys(&dir, &ctx)?;
    let keys = KeyBundle { public: stored.public, secret: stored.secret, galois: stored.galois };
    let engine = PackEngine::new(ctx, keys, cli.seed.map(|s| s ^ seed_salt));
    Ok((engine, Catalog::open(&cli.data_dir)?))
}

fn apply_policy(engine: &mut PackEngine, p: &UpdatePolicy) {
    engine.set_policy(match p.refresh {
        PolicyArg::Auto => RefreshPolicy::Auto { floor: p.floor },
        PolicyArg::Strict => RefreshPolicy::Strict { floor: p.floor },
        PolicyArg::Off => RefreshPolicy::Off,
    });
}

fn params_summary(params: &SchemeParams, ctx: &BfvContext, out: &mut Output) {
    let n = params.slot_count();
    out.field("degree", params.degree);
    out.field("slots", n);
    out.field("capacity", n - 1);
    out.field("plain_modulus", params.plaintext_modulus);
    out.field("log2_q", format!("{:.1}", ctx.log2_modulus()));
    out.field("params_id", params.params_id().short());
    out.say(format!("parameters  {} ({})", params.label(), params.params_id().short()));
    out.say(format!("slots       n = {n}, payload capacity n-1 = {}, sum slot {}", n - 1, n - 1));
    out.say(format!("log2 q      {:.1}", ctx.log2_modulus()));
}

fn keygen(cli: &Cli, a: &KeygenArgs, out: &mut Output) -> Result<()> {
    let dir = cli.keys_dir();
    if keys_exist(&dir) && !a.force {
        return Err(Error::Parameter(format!("keys already exist in {}; pass --force to overwrite", dir.display())));
    }
    let params = a.profile.params()?;
    let ctx = BfvContext::new(params.clone())?;
    let start = Instant::now();
    let mut rng = rng(cli.seed);
    let (sk, pk) = ctx.keygen(&mut rng);
    let steps = match a.rotations {
        Rotations::Standard => default_rotation_steps(ctx.slot_count()),
        Rotations::Minimal => vec![1, -1],
    };
    let galois = ctx.gen_rotation_keys(&sk, &steps, &mut rng)?;
    save_keys(&dir, &ctx, &sk, &pk, &galois)?;
    let elapsed = ms(start);
    params_summary(&params, &ctx, out);
    out.field("rotation_keys", galois.len());
    out.field("keys_dir", dir.display());
    out.field("keygen_ms", format!("{elapsed:.1}"));
    let set = a.rotations.to_possible_value().map(|v| v.get_name().to_owned()).unwrap_or_default();
    out.say(format!("rotations   {} keys ({set})", galois.len()));
    out.say(format!("wrote keys to {} in {elapsed:.0} ms", dir.display()));
    Ok(())
}

/// A path that exists wins over a built-in dataset name.
fn load_dataset(name: &str, seed: u64, scale: Option<Scale>, t: u64, reduce: bool) -> Result<Dataset> {
    let scale = scale.unwrap_or_default();
    let overflow = if reduce { Overflow::ReduceModT } else { Overflow::Reject };
    let path = Path::new(name);
    if path.exists() {
        dataset::load_csv(path, scale, t, overflow)
    } else {
        dataset::resolve(name, seed, scale, t, overflow)
    }
}

fn ingest(cli: &Cli, a: &IngestArgs, out: &mut Output) -> Result<()> {
    let (mut engine, catalog) = load_engine(cli, 0x696e)?;
    let group_size = a.group_size.unwrap_or_else(|| default_group_size(&engine));
    check_group_size(&engine, group_size)?;
    let t = engine.context().plaintext_modulus();
    let data = load_dataset(&a.csv, cli.seed.unwrap_or(1), a.scale, t, a.reduce_mod_t)?;
    if a.reduce_mod_t {
        out.warn(format!("--reduce-mod-t: values >= {t} were wrapped; all sums are mod {t}"));
    }
    if a.replace && catalog.list_tables()?.contains(&a.table) {
        catalog.drop_table(&a.table)?;
    }
    let mut table = catalog.create_table(&a.table, engine.context().params_id(), group_size)?;

    let start = Instant::now();
    let packs: Vec<PackedVector> = data
        .values
        .chunks(group_size)
        .enumerate()
        .map(|(g, chunk)| engine.pack_group(chunk, g as u64))
        .collect::<Result<_>>()?;
    let encrypt_ms = ms(start);
    let start = Instant::now();
    table.put_groups(engine.context(), &packs)?;
    let write_ms = ms(start);

    let per_tuple_us = if data.is_empty() { 0.0 } else { encrypt_ms * 1e3 / data.len() as f64 };
    out.field("table", &a.table);
    out.field("dataset", &data.name);
    out.field("tuples", data.len());
    out.field("groups", packs.len());
    out.field("group_size", group_size);
    out.field("encryptions", packs.len());
    out.field("encrypt_total_ms", format!("{encrypt_ms:.4}"));
    out.field("encrypt_per_tuple_us", format!("{per_tuple_us:.4}"));
    out.field("write_ms", format!("{write_ms:.4}"));
    out.say(format!(
        "ingested {} tuples into `{}` as {} group(s) of up to {group_size}",
        data.len(),
        a.table,
        packs.len()
    ));
    out.say(format!("encryption  {encrypt_ms:.3} ms total, {per_tuple_us:.2} µs per tuple; write {write_ms:.1} ms"));
    Ok(())
}

fn report_update(
    engine: &PackEngine,
    pv: &PackedVector,
    trace: &OpTrace,
    verbose: bool,
    out: &mut Output,
) {
    if trace.count(OpKind::Refresh) > 0 {
        out.warn(format!("group {}: noise budget was low; refreshed before the update", pv.group_id()));
    }
    out.field("group", pv.group_id());
    out.field("len", pv.len());
    out.field("capacity", pv.capacity());
    out.say(format!("group {}: L = {} of {}", pv.group_id(), pv.len(), pv.capacity()));
    if verbose {
        let budget = engine.tracked_budget(pv);
        out.field("rotations", trace.rotations());
        out.field("mask_mults", trace.count(OpKind::MultPlain));
        out.field("refreshes", trace.count(OpKind::Refresh));
        out.field("budget_bits", format!("{budget:.1}"));
        out.say(format!(
            "trace: {} rotation(s), {} mask mult(s), {} refresh(es); tracked budget {budget:.1} bits",
            trace.rotations(),
            trace.count(OpKind::MultPlain),
            trace.count(OpKind::Refresh)
        ));
    }
}

fn open_group(engine: &mut PackEngine, table: &TableCatalog, group: u64, create: bool) -> Result<PackedVector> {
    match table.get_group(engine.context(), group) {
        Err(Error::UnknownGroup { .. }) if create => engine.pack_group(&[], group),
        other => other,
    }
}

fn insert(cli: &Cli, a: &InsertArgs, out: &mut Output) -> Result<()> {
    let (mut engine, catalog) = load_engine(cli, 0x696e73)?;
    apply_policy(&mut engine, &a.policy);
    let mut table = catalog.open_table(&a.table)?;
    let pv = open_group(&mut engine, &table, a.group, true)?;
    engine.take_trace();
    let pv = match a.index {
        Some(i) if !a.append => {
            let mode = match a.mode {
                ModeArg::Plain => InsertMode::Plain,
                ModeArg::Encrypted => InsertMode::Encrypted,
            };
            engine.insert_at(&pv, i, a.value, mode)?
        }
        _ => engine.append(&pv, a.value)?,
    };
    let trace = engine.take_trace();
    table.put_group(engine.context(), &pv)?;
    report_update(&engine, &pv, &trace, a.policy.verbose, out);
    Ok(())
}

fn delete(cli: &Cli, a: &DeleteArgs, out: &mut Output) -> Result<()> {
    let (mut engine, catalog) = load_engine(cli, 0x64656c)?;
    apply_policy(&mut engine, &a.policy);
    let mut table = catalog.open_table(&a.table)?;
    let pv = open_group(&mut engine, &table, a.group, false)?;
    if pv.is_empty() {
        out.warn(format!("group {} is empty; nothing deleted", a.group));
        report_update(&engine, &pv, &OpTrace::default(), a.policy.verbose, out);
        return Ok(());
    }
    if a.index >= pv.len() {
        return Err(Error::Index { index: a.index, len: pv.len() });
    }
    let v_del = engine.decrypt_slot(&pv, a.index)?.expect("index below n");
    engine.take_trace();
    let pv = engine.delete_at(&pv, a.index, v_del)?;
    let trace = engine.take_trace();
    table.put_group(engine.context(), &pv)?;
    out.field("deleted", v_del);
    out.say(format!("deleted value {v_del} from slot {}", a.index));
    report_update(&engine, &pv, &trace, a.policy.verbose, out);
    Ok(())
}

fn sum(cli: &Cli, a: &SumArgs, out: &mut Output) -> Result<()> {
    let (mut engine, catalog) = load_engine(cli, 0x73756d)?;
    let table = catalog.open_table(&a.table)?;
    let ids = match a.group {
        Some(g) => vec![table.group(g)?.group_id],
        None => table.list_groups(),
    };
    let packs: Vec<PackedVector> =
        ids.iter().map(|&g| table.get_group(engine.context(), g)).collect::<Result<_>>()?;
    engine.take_trace();
    let start = Instant::now();
    let total = match (a.baseline, packs.is_empty()) {
        (_, true) => 0,
        (None, false) => {
            let ct = engine.global_sum(&packs)?;
            engine.extract_sum(&ct)?
        }
        (Some(Baseline::Rotate), false) => {
            let mut acc = None;
            for pv in &packs {
                let s = engine.baseline_pack_sum(pv)?;
                acc = Some(match acc {
                    None => s,
                    Some(x) => engine.context().add(&x, &s)?,
                });
            }
            engine.decrypt_ciphertext(&acc.expect("non-empty"))?[0]
        }
    };
    let elapsed = ms(start);
    let trace = engine.take_trace();
    let method = if a.baseline.is_some() { "rotate" } else { "sum-slot" };
    out.field("table", &a.table);
    if let Some(g) = a.group {
        out.field("group", g);
    }
    out.field("method", method);
    out.field("ciphertexts", packs.len());
    out.field("total", total);
    out.field("modulus", engine.context().plaintext_modulus());
    out.field("rotations", trace.rotations());
    out.field("rotations_per_ciphertext", trace.rotations() / packs.len().max(1));
    out.field("latency_ms", format!("{elapsed:.4}"));
    out.say(format!(
        "sum = {total} (mod {}) over {} ciphertext(s), {} rotation(s), {method}, {elapsed:.1} ms",
        engine.context().plaintext_modulus(),
        packs.len(),
        trace.rotations()
    ));
    Ok(())
}

fn get(cli: &Cli, a: &GetArgs, out: &mut Output) -> Result<()> {
    let (mut engine, catalog) = load_engine(cli, 0x676574)?;
    let table = catalog.open_table(&a.table)?;
    let pv = table.get_group(engine.context(), a.group)?;
    let n = engine.slot_count();
    if a.slot >= n {
        out.warn(format!("slot {} is outside 0..{n}; no value", a.slot));
        out.field("slot", a.slot);
        out.field("value", "absent");
        out.say(format!("slot {}: <absent>", a.slot));
        return Ok(());
    }
    let value = engine.decrypt_slot(&pv, a.slot)?.expect("slot below n");
    out.field("slot", a.slot);
    out.field("value", value);
    out.say(format!("slot {}: {value}", a.slot));
    Ok(())
}

fn emit_reports(reports: &[BenchReport], csv: Option<&Path>, out: &mut Output) -> Result<()> {
    for (i, r) in reports.iter().enumerate() {
        match out.format() {
            super::Format::Machine => out.raw(&r.to_lines()),
            super::Format::Human => {
                if i > 0 {
                    out.raw("\n");
                }
                out.raw(&r.to_table());
            }
        }
    }
    if let Some(path) = csv {
        bench::write_csv(reports, path)?;
    }
    Ok(())
}

fn run_bench(cli: &Cli, a: &BenchArgs, out: &mut Output) -> Result<()> {
    let params = a.profile.params()?;
    let t = params.plaintext_modulus;
    let seed = cli.seed.unwrap_or(1);
    let data = load_dataset(&a.dataset, seed, a.scale, t, a.reduce_mod_t)?;
    let mut engine = bench::build_engine(params, cli.seed)?;
    let group_size = a.group_size.unwrap_or_else(|| default_group_size(&engine));
    let reports = match a.suite {
        Suite::Encrypt => vec![bench::run_encrypt_bench(&mut engine, &data, group_size, a.parallel)?],
        Suite::Insert => vec![bench::run_insert_bench(&mut engine, &data, group_size, a.ops, seed)?],
        Suite::Delete => vec![bench::run_delete_bench(&mut engine, &data, group_size, a.ops, seed)?],
        Suite::Aggregate => vec![bench::run_aggregation_bench(&mut engine, &data, group_size)?],
        Suite::Sweep => {
            let sizes = match &a.group_sizes {
                Some(s) => s.clone(),
                None => {
                    let cap = engine.capacity();
                    let sizes: Vec<usize> = bench::SWEEP_SIZES.iter().copied().filter(|&s| s <= cap).collect();
                    if sizes.len() < bench::SWEEP_SIZES.len() {
                        out.warn(format!("sizes above capacity {cap} skipped"));
                    }
                    sizes
                }
            };
            let reports = bench::run_group_size_sweep(&mut engine, &data, &sizes, a.ops, seed)?;
            let first = reports.first().and_then(|r| r.get_f64("encrypt_total_ms"));
            let last = reports.last().and_then(|r| r.get_f64("encrypt_total_ms"));
            emit_reports(&reports, a.csv.as_deref(), out)?;
            let monotone = bench::sweep_is_non_increasing(&reports);
            out.field("encrypt_non_increasing", monotone);
            if let (Some(f), Some(l)) = (first, last) {
                out.field("encrypt_ratio_first_last", format!("{:.4}", f / l));
                out.say(format!("\nencrypt totals non-increasing: {monotone}; first/last ratio {:.2}", f / l));
            }
            return Ok(());
        }
    };
    emit_reports(&reports, a.csv.as_deref(), out)
}

fn fuzz(cli: &Cli, a: &FuzzArgs, out: &mut Output) -> Result<()> {
    let seed = cli.seed.unwrap_or(1);
    let mut engine = bench::build_engine(SchemeParams::desk(a.degree)?, Some(seed))?;
    let outcome = bench::oracle_fuzz(&mut engine, seed, a.ops)?;
    out.field("seed", seed);
    out.field("ops", outcome.ops_run);
    out.field("passed", outcome.passed());
    match &outcome.failure {
        None => {
            out.say(format!("{} operations at n = {} matched the oracle (seed {seed})", outcome.ops_run, engine.slot_count()));
            Ok(())
        }
        Some(f) => {
            out.raw(&f.to_string());
            Err(Error::Divergence(format!("seed {seed}, step {}", f.step)))
        }
    }
}

fn info(cli: &Cli, out: &mut Output) -> Result<()> {
    let dir = cli.keys_dir();
    out.field("keys_dir", dir.display());
    if dir.join(PARAMS_FILE).exists() {
        let params = load_params(&dir)?;
        let ctx = BfvContext::new(params.clone())?;
        params_summary(&params, &ctx, out);
        let stored = load_keys(&dir, &ctx)?;
        let steps: Vec<String> = stored.galois.steps().map(|s| s.to_string()).collect();
        out.field("secret_key", stored.secret.is_some());
        out.field("rotation_steps", steps.join(","));
        out.say(format!("rotation steps {}", steps.join(", ")));
        if stored.secret.is_none() {
            out.say("secret key absent: decryption and refresh unavailable");
        }
    } else {
        out.say(format!("no keys in {}", dir.display()));
    }
    let catalog = Catalog::open(&cli.data_dir)?;
    for name in catalog.list_tables()? {
        let table = catalog.open_table(&name)?;
        out.field("table", &name);
        out.field("table_groups", table.list_groups().len());
        out.field("table_tuples", table.tuple_count());
        out.say(format!(
            "table `{name}`: {} group(s), {} tuple(s), group size {}",
            table.list_groups().len(),
            table.tuple_count(),
            table.group_size()
        ));
    }
    Ok(())
}
