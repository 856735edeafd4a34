//! Canonical JSON: sorted object keys and fixed 17-significant-digit float
//! formatting, so experiment artifacts are byte-reproducible and survive a
//! parse/re-serialize round trip unchanged.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

#[derive(Clone, Copy, Default)]
pub struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        // 17 significant digits round-trip any finite f64 exactly
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to canonical JSON text (no trailing newline).
///
/// The value is routed through `serde_json::Value`, whose object maps are
/// ordered, so key order is independent of struct declaration order.
pub fn to_canonical_json<T: Serialize>(value: &T) -> crate::error::Result<String> {
    let tree = serde_json::to_value(value)?;
    let mut out = Vec::with_capacity(1024);
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    tree.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("JSON serializer emits UTF-8"))
}
