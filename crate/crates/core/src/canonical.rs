//! Canonical JSON encoding shared by catalogs, records, reports and audit
//! events: keys sorted lexicographically, 2-space indentation, LF endings.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Pretty canonical form terminated by a single LF.
pub fn to_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    // Going through `Value` sorts object keys: serde_json's map is a BTreeMap
    // unless `preserve_order` is enabled, which this crate never does.
    let value = serde_json::to_value(value).expect("canonical values serialize to JSON");
    let mut out = serde_json::to_vec_pretty(&value).expect("JSON values always encode");
    out.push(b'\n');
    out
}

/// Single-line canonical form, used for audit log lines and digests.
pub fn to_line<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("canonical values serialize to JSON");
    serde_json::to_string(&value).expect("JSON values always encode")
}

/// Hex SHA-256 over the compact canonical encoding.
pub fn digest<T: Serialize + ?Sized>(value: &T) -> String {
    hex::encode(Sha256::digest(to_line(value).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_and_indented_by_two() {
        let bytes = to_bytes(&json!({"b": 1, "a": {"d": [], "c": true}}));
        let text = String::from_utf8(bytes).unwrap();
        assert_eq!(
            text,
            "{\n  \"a\": {\n    \"c\": true,\n    \"d\": []\n  },\n  \"b\": 1\n}\n"
        );
    }

    #[test]
    fn digest_ignores_source_key_order() {
        let a: serde_json::Value = serde_json::from_str(r#"{"x":1,"y":2}"#).unwrap();
        let b: serde_json::Value = serde_json::from_str(r#"{"y":2,"x":1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
    }
}
