//! Canonical config digests.
//!
//! Digest = SHA-256 over the serde_json encoding of a typed value. Struct
//! fields serialize in declaration order and floats via shortest-round-trip
//! formatting, so the digest is stable for a fixed value.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Hex SHA-256 of the canonical JSON encoding of `value`.
pub fn of<T: Serialize>(value: &T) -> Result<String> {
    let json = serde_json::to_string(value)?;
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(out.len() * 2);
    for byte in out {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}
