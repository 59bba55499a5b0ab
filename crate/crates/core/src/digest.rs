//! SHA-256 content digests used by manifests and fingerprints.

use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}

pub fn file_digest(path: &Path) -> io::Result<String> {
    Ok(sha256_hex(fs::read(path)?))
}

/// Digest of a directory tree: every regular file's relative path and
/// content digest, in sorted path order.
pub fn dir_digest(root: &Path) -> io::Result<String> {
    let mut entries = Vec::new();
    collect_files(root, root, &mut entries)?;
    entries.sort();
    let mut hasher = Sha256::new();
    for (rel, digest) in entries {
        hasher.update(rel.as_bytes());
        hasher.update(b"\0");
        hasher.update(digest.as_bytes());
        hasher.update(b"\n");
    }
    Ok(hex::encode(hasher.finalize()))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path
                .strip_prefix(root)
                .unwrap_or(&path)
                .to_string_lossy()
                .replace('\\', "/");
            out.push((rel, file_digest(&path)?));
        }
    }
    Ok(())
}

/// Digest of any serializable value through its canonical JSON form.
///
/// `serde_json` maps are key-sorted, so two values that differ only in
/// field or key order hash identically.
pub fn canonical_json_digest<T: serde::Serialize>(value: &T) -> String {
    let canonical = serde_json::to_value(value).expect("value serializes to JSON");
    sha256_hex(serde_json::to_vec(&canonical).expect("JSON value serializes"))
}

/// Derive an independent 64-bit seed for a named sub-stream.
pub fn derive_seed(seed: u64, tag: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("8 bytes"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_vector() {
        assert_eq!(
            sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn canonical_digest_ignores_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"b":1,"a":{"y":2,"x":3}}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"a":{"x":3,"y":2},"b":1}"#).unwrap();
        assert_eq!(canonical_json_digest(&a), canonical_json_digest(&b));
    }
}
