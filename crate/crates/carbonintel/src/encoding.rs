//! Canonical encoding and content digests.
//!
//! Every artifact in this crate serializes to a single canonical form:
//! compact JSON with object keys in lexicographic order and no
//! insignificant whitespace (see `docs/formats.md`). Digests are SHA-256
//! over the canonical UTF-8 bytes, rendered as lowercase hex. Two values
//! are interchangeable if and only if their canonical encodings are
//! byte-identical, which is what makes payload references and the
//! provenance hash chain platform-stable.

use serde::Serialize;
use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EncodingError {
    #[error("value cannot be canonically encoded: {0}")]
    Encode(String),
    #[error("malformed canonical record: {0}")]
    Decode(String),
}

/// Canonical encoding of any serializable value.
///
/// The value is first lifted into a JSON tree (object keys collect into a
/// sorted map) and then written compactly, so field order in source code
/// never leaks into the encoding.
pub fn canonical_json<T: Serialize>(value: &T) -> Result<String, EncodingError> {
    let tree = serde_json::to_value(value).map_err(|e| EncodingError::Encode(e.to_string()))?;
    serde_json::to_string(&tree).map_err(|e| EncodingError::Encode(e.to_string()))
}

/// Decode a canonical record produced by [`canonical_json`].
pub fn from_canonical<T: DeserializeOwned>(text: &str) -> Result<T, EncodingError> {
    serde_json::from_str(text).map_err(|e| EncodingError::Decode(e.to_string()))
}

/// Lowercase hex SHA-256 of raw bytes.
pub fn digest_bytes(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    to_hex(&hasher.finalize())
}

/// Digest of a value's canonical encoding.
pub fn digest_value<T: Serialize>(value: &T) -> Result<String, EncodingError> {
    Ok(digest_bytes(canonical_json(value)?.as_bytes()))
}

/// Chained digest: SHA-256 over the predecessor digest followed by the
/// canonical encoding of the payload. Used by the provenance event log.
pub fn chained_digest(prev: &str, canonical_payload: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(prev.as_bytes());
    hasher.update(canonical_payload.as_bytes());
    to_hex(&hasher.finalize())
}

/// Short opaque identifier derived from a digest-worthy seed.
pub fn short_id(prefix: &str, seed: &str) -> String {
    format!("{prefix}-{}", &digest_bytes(seed.as_bytes())[..12])
}

fn to_hex(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        use std::fmt::Write;
        let _ = write!(out, "{b:02x}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn map_keys_sort_regardless_of_insertion_order() {
        let mut a = HashMap::new();
        a.insert("zulu", 1);
        a.insert("alpha", 2);
        let mut b = HashMap::new();
        b.insert("alpha", 2);
        b.insert("zulu", 1);
        assert_eq!(canonical_json(&a).unwrap(), canonical_json(&b).unwrap());
        assert_eq!(canonical_json(&a).unwrap(), r#"{"alpha":2,"zulu":1}"#);
    }

    #[test]
    fn digest_is_stable_and_lowercase_hex() {
        let d = digest_bytes(b"abc");
        assert_eq!(
            d,
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let original = r#"{"body":["a","b"],"title":"x"}"#;
        let decoded: serde_json::Value = from_canonical(original).unwrap();
        assert_eq!(canonical_json(&decoded).unwrap(), original);
    }

    #[test]
    fn chained_digest_depends_on_predecessor() {
        let a = chained_digest("", "{}");
        let b = chained_digest(&a, "{}");
        assert_ne!(a, b);
    }
}
