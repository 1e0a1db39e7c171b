//! Encrypted tables: one append-only data file of ciphertext containers plus a text
//! manifest. Writers append the new container, then atomically replace the manifest, so a
//! reader always sees either the old or the new group version.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::container::{deserialize_ciphertext, serialize_ciphertext};
use super::{temp_path, write_atomic};
use crate::bfv::{BfvContext, ParamsId};
use crate::error::{Error, Result};
use crate::pack::PackedVector;

pub const MANIFEST_FILE: &str = "manifest.txt";
const MANIFEST_HEADER: &str = "hermes-table v1";

/// Group id of the tuple at `index`.
pub fn group_of(index: usize, group_size: usize) -> u64 {
    (index / group_size) as u64
}

/// Per-group manifest entry.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRecord {
    pub group_id: u64,
    pub len: usize,
    pub offset: u64,
    pub size: u64,
    /// Tracked noise bound at the time of writing.
    pub noise_log2: f64,
}

/// Root of all tables under a data directory.
#[derive(Clone, Debug)]
pub struct Catalog {
    root: PathBuf,
}

impl Catalog {
    pub fn open(data_dir: &Path) -> Result<Self> {
        let root = data_dir.join("tables");
        fs::create_dir_all(&root)?;
        Ok(Catalog { root })
    }

    fn table_dir(&self, name: &str) -> Result<PathBuf> {
        let valid = !name.is_empty()
            && name.len() <= 64
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !valid {
            return Err(Error::Parameter(format!(
                "table name `{name}` must be 1-64 characters of [A-Za-z0-9_-]"
            )));
        }
        Ok(self.root.join(name))
    }

    pub fn create_table(&self, name: &str, params_id: ParamsId, group_size: usize) -> Result<TableCatalog> {
        if group_size == 0 {
            return Err(Error::Parameter("group size must be positive".into()));
        }
        let dir = self.table_dir(name)?;
        if dir.join(MANIFEST_FILE).exists() {
            return Err(Error::AlreadyExists(dir));
        }
        fs::create_dir_all(&dir)?;
        let table = TableCatalog {
            dir,
            name: name.to_string(),
            params_id,
            group_size,
            generation: 0,
            groups: BTreeMap::new(),
        };
        File::create(table.data_path())?;
        table.write_manifest()?;
        Ok(table)
    }

    pub fn open_table(&self, name: &str) -> Result<TableCatalog> {
        let dir = self.table_dir(name)?;
        let manifest = dir.join(MANIFEST_FILE);
        let text = match fs::read_to_string(&manifest) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::UnknownTable(name.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        // A leftover temp manifest is an interrupted write; the committed one wins.
        let tmp = temp_path(&manifest);
        if tmp.exists() {
            log::warn!("table `{name}`: discarding interrupted manifest write");
            let _ = fs::remove_file(tmp);
        }
        TableCatalog::parse(dir, &text)
    }

    pub fn list_tables(&self) -> Result<Vec<String>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.root)? {
            let entry = entry?;
            if entry.path().join(MANIFEST_FILE).exists() {
                out.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn drop_table(&self, name: &str) -> Result<()> {
        let dir = self.table_dir(name)?;
        if !dir.join(MANIFEST_FILE).exists() {
            return Err(Error::UnknownTable(name.to_string()));
        }
        fs::remove_dir_all(dir)?;
        Ok(())
    }
}

/// An open table: name, parameters, group size and the group index.
#[derive(Clone, Debug)]
pub struct TableCatalog {
    dir: PathBuf,
    name: String,
    params_id: ParamsId,
    group_size: usize,
    generation: u64,
    groups: BTreeMap<u64, GroupRecord>,
}

impl TableCatalog {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params_id(&self) -> ParamsId {
        self.params_id
    }

    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn groups(&self) -> impl Iterator<Item = &GroupRecord> {
        self.groups.values()
    }

    pub fn list_groups(&self) -> Vec<u64> {
        self.groups.keys().copied().collect()
    }

    pub fn group(&self, id: u64) -> Result<&GroupRecord> {
        self.groups
            .get(&id)
            .ok_or_else(|| Error::UnknownGroup { table: self.name.clone(), group: id })
    }

    /// Total logical length over all groups.
    pub fn tuple_count(&self) -> usize {
        self.groups.values().map(|g| g.len).sum()
    }

    fn data_name(&self) -> String {
        format!("data.{}.bin", self.generation)
    }

    fn data_path(&self) -> PathBuf {
        self.dir.join(self.data_name())
    }

    fn manifest_path(&self) -> PathBuf {
        self.dir.join(MANIFEST_FILE)
    }

    fn check(&self, ctx: &BfvContext) -> Result<()> {
        if ctx.params_id() != self.params_id {
            return Err(Error::ParamsMismatch {
                expected: self.params_id.short(),
                found: ctx.params_id().short(),
            });
        }
        Ok(())
    }

    fn render_manifest(&self) -> String {
        let mut s = String::new();
        s.push_str(MANIFEST_HEADER);
        s.push('\n');
        s.push_str(&format!("name {}\n", self.name));
        s.push_str(&format!("params {}\n", self.params_id.to_hex()));
        s.push_str(&format!("group_size {}\n", self.group_size));
        s.push_str(&format!("data {}\n", self.data_name()));
        for g in self.groups.values() {
            s.push_str(&format!(
                "group {} len {} offset {} size {} noise {}\n",
                g.group_id, g.len, g.offset, g.size, g.noise_log2
            ));
        }
        s
    }

    fn write_manifest(&self) -> Result<()> {
        Ok(write_atomic(&self.manifest_path(), self.render_manifest().as_bytes())?)
    }

    fn parse(dir: PathBuf, text: &str) -> Result<Self> {
        let bad = |line: &str| Error::Format(format!("manifest line `{line}`"));
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(Error::Format("missing manifest header".into()));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| Error::Format(format!("manifest lacks `{key}`")))?;
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| bad(line))
        };
        let name = field("name")?;
        let params_id = ParamsId::from_hex(&field("params")?)?;
        let group_size: usize = field("group_size")?.parse().map_err(|_| bad("group_size"))?;
        let data = field("data")?;
        let generation = data
            .strip_prefix("data.")
            .and_then(|r| r.strip_suffix(".bin"))
            .and_then(|g| g.parse().ok())
            .ok_or_else(|| bad(&data))?;
        let mut groups = BTreeMap::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let rec = match parts.as_slice() {
                ["group", id, "len", len, "offset", off, "size", size, "noise", noise] => GroupRecord {
                    group_id: id.parse().map_err(|_| bad(line))?,
                    len: len.parse().map_err(|_| bad(line))?,
                    offset: off.parse().map_err(|_| bad(line))?,
                    size: size.parse().map_err(|_| bad(line))?,
                    noise_log2: noise.parse().map_err(|_| bad(line))?,
                },
                [] => continue,
                _ => return Err(bad(line)),
            };
            groups.insert(rec.group_id, rec);
        }
        Ok(TableCatalog { dir, name, params_id, group_size, generation, groups })
    }

    /// Appends containers to the data file and returns their records (not yet committed).
    fn append_groups(&self, ctx: &BfvContext, packs: &[PackedVector]) -> Result<Vec<GroupRecord>> {
        self.check(ctx)?;
        let mut file = OpenOptions::new().append(true).open(self.data_path())?;
        let mut offset = file.seek(SeekFrom::End(0))?;
        let mut records = Vec::with_capacity(packs.len());
        for pv in packs {
            let bytes = serialize_ciphertext(ctx, pv.ciphertext())?;
            file.write_all(&bytes)?;
            records.push(GroupRecord {
                group_id: pv.group_id(),
                len: pv.len(),
                offset,
                size: bytes.len() as u64,
                noise_log2: pv.ciphertext().noise_log2(),
            });
            offset += bytes.len() as u64;
        }
        file.sync_data()?;
        Ok(records)
    }

    /// Stores (or overwrites) one group atomically.
    pub fn put_group(&mut self, ctx: &BfvContext, pv: &PackedVector) -> Result<()> {
        self.put_groups(ctx, std::slice::from_ref(pv))
    }

    /// Stores several groups with a single manifest commit.
    pub fn put_groups(&mut self, ctx: &BfvContext, packs: &[PackedVector]) -> Result<()> {
        let records = self.append_groups(ctx, packs)?;
        let previous = self.groups.clone();
        for r in records {
            self.groups.insert(r.group_id, r);
        }
        if let Err(e) = self.write_manifest() {
            self.groups = previous;
            return Err(e);
        }
        Ok(())
    }

    /// Test hook: performs a `put_group` but stops after writing the temporary manifest, as
    /// if the process died before the rename.
    #[doc(hidden)]
    pub fn put_group_interrupted(&mut self, ctx: &BfvContext, pv: &PackedVector) -> Result<()> {
        let records = self.append_groups(ctx, std::slice::from_ref(pv))?;
        let mut staged = self.clone();
        for r in records {
            staged.groups.insert(r.group_id, r);
        }
        fs::write(temp_path(&self.manifest_path()), staged.render_manifest())?;
        Ok(())
    }

    pub fn get_group(&self, ctx: &BfvContext, id: u64) -> Result<PackedVector> {
        self.check(ctx)?;
        let rec = self.group(id)?;
        let mut file = File::open(self.data_path())?;
        file.seek(SeekFrom::Start(rec.offset))?;
        let mut bytes = vec![0u8; rec.size as usize];
        file.read_exact(&mut bytes).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => Error::Truncated {
                needed: (rec.offset + rec.size) as usize,
                available: file.metadata().map(|m| m.len() as usize).unwrap_or(0),
            },
            _ => e.into(),
        })?;
        let mut ct = deserialize_ciphertext(ctx, &bytes)?;
        ct.set_noise_log2(rec.noise_log2);
        Ok(PackedVector::from_parts(ct, id, rec.len, ctx.slot_count() - 1))
    }

    /// Rewrites live groups into a fresh data file, dropping superseded versions.
    pub fn compact(&mut self, ctx: &BfvContext) -> Result<()> {
        self.check(ctx)?;
        let packs: Vec<PackedVector> = self
            .list_groups()
            .into_iter()
            .map(|id| self.get_group(ctx, id))
            .collect::<Result<_>>()?;
        let old = self.data_path();
        let mut next = self.clone();
        next.generation += 1;
        next.groups.clear();
        File::create(next.data_path())?;
        let records = next.append_groups(ctx, &packs)?;
        for r in records {
            next.groups.insert(r.group_id, r);
        }
        next.write_manifest()?;
        *self = next;
        let _ = fs::remove_file(old);
        Ok(())
    }

    /// Bytes in the data file not referenced by the manifest.
    pub fn garbage_bytes(&self) -> Result<u64> {
        let total = fs::metadata(self.data_path())?.len();
        let live: u64 = self.groups.values().map(|g| g.size).sum();
        Ok(total.saturating_sub(live))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bfv::{default_rotation_steps, SchemeParams};
    use crate::pack::{KeyBundle, PackEngine};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::sync::Arc;

    fn engine() -> PackEngine {
        let ctx = Arc::new(BfvContext::new(SchemeParams::desk(16).unwrap()).unwrap());
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let (sk, pk) = ctx.keygen(&mut rng);
        let galois = ctx.gen_rotation_keys(&sk, &default_rotation_steps(8), &mut rng).unwrap();
        PackEngine::new(ctx, KeyBundle { public: pk, secret: Some(sk), galois }, Some(2))
    }

    #[test]
    fn group_assignment() {
        assert_eq!(group_of(0, 4096), 0);
        assert_eq!(group_of(340, 4096), 0);
        assert_eq!(group_of(34423, 4096), 8);
        assert_eq!(34424 - 8 * 4096, 1656);
    }

    #[test]
    fn put_get_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let mut e = engine();
        let ctx = e.context().clone();
        let cat = Catalog::open(dir.path()).unwrap();
        let mut table = cat.create_table("t1", ctx.params_id(), 7).unwrap();
        assert!(matches!(cat.create_table("t1", ctx.params_id(), 7), Err(Error::AlreadyExists(_))));
        assert!(cat.create_table("bad/name", ctx.params_id(), 7).is_err());

        let a = e.pack_group(&[1, 2, 3], 0).unwrap();
        let b = e.pack_group(&[4, 5], 1).unwrap();
        table.put_groups(&ctx, &[a.clone(), b.clone()]).unwrap();
        let b2 = e.append(&b, 6).unwrap();
        table.put_group(&ctx, &b2).unwrap();

        let reopened = cat.open_table("t1").unwrap();
        assert_eq!(reopened.list_groups(), vec![0, 1]);
        assert_eq!(reopened.tuple_count(), 6);
        let got = reopened.get_group(&ctx, 1).unwrap();
        assert_eq!(got.len(), 3);
        assert_eq!(got.ciphertext().noise_log2(), b2.ciphertext().noise_log2());
        assert_eq!(e.decrypt_pack(&got).unwrap(), e.decrypt_pack(&b2).unwrap());
        assert!(matches!(reopened.get_group(&ctx, 9), Err(Error::UnknownGroup { group: 9, .. })));

        let mut t = reopened;
        assert!(t.garbage_bytes().unwrap() > 0);
        t.compact(&ctx).unwrap();
        assert_eq!(t.garbage_bytes().unwrap(), 0);
        let again = cat.open_table("t1").unwrap();
        assert_eq!(e.decrypt_pack(&again.get_group(&ctx, 0).unwrap()).unwrap(), e.decrypt_pack(&a).unwrap());

        assert_eq!(cat.list_tables().unwrap(), vec!["t1".to_string()]);
        cat.drop_table("t1").unwrap();
        assert!(matches!(cat.open_table("t1"), Err(Error::UnknownTable(_))));
    }

    #[test]
    fn interrupted_put_keeps_previous_version() {
        let dir = tempfile::tempdir().unwrap();
        let mut e = engine();
        let ctx = e.context().clone();
        let cat = Catalog::open(dir.path()).unwrap();
        let mut table = cat.create_table("t", ctx.params_id(), 7).unwrap();
        let v1 = e.pack_group(&[9, 9], 0).unwrap();
        table.put_group(&ctx, &v1).unwrap();
        let v2 = e.append(&v1, 1).unwrap();
        table.put_group_interrupted(&ctx, &v2).unwrap();

        let after = cat.open_table("t").unwrap();
        let got = after.get_group(&ctx, 0).unwrap();
        assert_eq!(got.len(), 2);
        assert_eq!(e.decrypt_pack(&got).unwrap(), e.decrypt_pack(&v1).unwrap());
    }
}
