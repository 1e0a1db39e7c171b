//! Persistence: ciphertext containers, key files and the table catalog.

mod container;
mod keys;
mod table;

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

pub use container::{
    deserialize_ciphertext, header_len, serialize_ciphertext, CIPHERTEXT_MAGIC, CONTAINER_VERSION,
};
pub use keys::{
    deserialize_galois_keys, deserialize_public_key, deserialize_secret_key, keys_exist,
    load_keys, load_params, save_keys, serialize_galois_keys, serialize_public_key,
    serialize_secret_key, KeyRole, StoredKeys, GALOIS_KEY_FILE, KEY_MAGIC, PARAMS_FILE,
    PUBLIC_KEY_FILE, SECRET_KEY_FILE,
};
pub use table::{group_of, Catalog, GroupRecord, TableCatalog, MANIFEST_FILE};

pub(crate) fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `bytes` to a sibling temp file, syncs it, then renames it over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = temp_path(path);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}
