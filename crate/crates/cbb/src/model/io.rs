//! Canonical instance text format.
//!
//! ```text
//! # comment lines start with '#' and may appear anywhere
//! N M          header: spin count, coupling count
//! i j J        M coupling lines, 0-based indices with i < j
//! F            field count
//! i h          F field lines
//! ```
//!
//! Serialization is canonical: couplings sorted by `(i, j)`, fields sorted
//! by index, no zero entries, values written in Rust's shortest round-trip
//! decimal form, one trailing newline per line, no comments. Equal models
//! yield byte-equal text. Offsets are never serialized; instances on disk
//! always describe offset-0 models.

use super::{SpinConfiguration, SpinModel};
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub(crate) fn canonical_text(model: &SpinModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", model.n(), model.couplings().len());
    for &(i, j, v) in model.couplings() {
        let _ = writeln!(out, "{i} {j} {v}");
    }
    let _ = writeln!(out, "{}", model.fields().len());
    for &(i, v) in model.fields() {
        let _ = writeln!(out, "{i} {v}");
    }
    out
}

/// Canonical text form of `model`. Refuses models with a nonzero offset,
/// since the format cannot represent them.
pub fn serialize_instance(model: &SpinModel) -> Result<String> {
    if model.offset() != 0.0 {
        return Err(Error::InvalidModel(format!(
            "cannot serialize a model with nonzero offset {}",
            model.offset()
        )));
    }
    Ok(canonical_text(model))
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { iter: text.lines().enumerate() }
    }

    /// Next line that is neither blank nor a comment, with its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        for (idx, line) in self.iter.by_ref() {
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('#') {
                return Some((idx + 1, t));
            }
        }
        None
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_usize(line: usize, tok: &str, what: &str) -> Result<usize> {
    tok.parse().map_err(|_| parse_err(line, format!("{what} '{tok}' is not a non-negative integer")))
}

fn parse_value(line: usize, tok: &str, what: &str) -> Result<f64> {
    let v: f64 =
        tok.parse().map_err(|_| parse_err(line, format!("{what} '{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("{what} '{tok}' is not finite")));
    }
    Ok(v)
}

/// Parse the canonical instance format. Accepts comments and blank lines
/// anywhere and any finite decimal value; rejects structural violations
/// with the 1-based line number.
pub fn parse_instance(text: &str) -> Result<SpinModel> {
    let mut lines = Lines::new(text);
    let (hline, header) =
        lines.next_content().ok_or_else(|| parse_err(1, "missing header line"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 2 {
        return Err(parse_err(hline, "header must be 'N M'"));
    }
    let n = parse_usize(hline, toks[0], "spin count")?;
    let m = parse_usize(hline, toks[1], "coupling count")?;

    let mut couplings = Vec::with_capacity(m);
    let mut seen_pairs = std::collections::HashSet::with_capacity(m);
    for k in 0..m {
        let (lno, line) = lines
            .next_content()
            .ok_or_else(|| parse_err(0, format!("expected {m} coupling lines, found {k}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_err(lno, "coupling line must be 'i j J'"));
        }
        let i = parse_usize(lno, toks[0], "index")?;
        let j = parse_usize(lno, toks[1], "index")?;
        let v = parse_value(lno, toks[2], "coupling")?;
        if i >= j {
            return Err(parse_err(lno, format!("indices must satisfy i < j, got {i} {j}")));
        }
        if j >= n {
            return Err(parse_err(lno, format!("index {j} out of range for {n} spins")));
        }
        if !seen_pairs.insert((i, j)) {
            return Err(parse_err(lno, format!("duplicate coupling ({i},{j})")));
        }
        if v != 0.0 {
            couplings.push((i, j, v));
        }
    }

    let (fline, fheader) =
        lines.next_content().ok_or_else(|| parse_err(0, "missing field count line"))?;
    let ftoks: Vec<&str> = fheader.split_whitespace().collect();
    if ftoks.len() != 1 {
        return Err(parse_err(fline, "field count line must be a single integer"));
    }
    let f = parse_usize(fline, ftoks[0], "field count")?;

    let mut fields = Vec::with_capacity(f);
    let mut seen_idx = std::collections::HashSet::with_capacity(f);
    for k in 0..f {
        let (lno, line) = lines
            .next_content()
            .ok_or_else(|| parse_err(0, format!("expected {f} field lines, found {k}")))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_err(lno, "field line must be 'i h'"));
        }
        let i = parse_usize(lno, toks[0], "index")?;
        let v = parse_value(lno, toks[1], "field")?;
        if i >= n {
            return Err(parse_err(lno, format!("index {i} out of range for {n} spins")));
        }
        if !seen_idx.insert(i) {
            return Err(parse_err(lno, format!("duplicate field index {i}")));
        }
        if v != 0.0 {
            fields.push((i, v));
        }
    }

    if let Some((lno, line)) = lines.next_content() {
        return Err(parse_err(lno, format!("unexpected trailing content '{line}'")));
    }
    SpinModel::new(n, couplings, fields, 0.0)
}

/// Parse a spin configuration given as whitespace- or comma-separated
/// `+1`/`-1` tokens, with '#' comments allowed.
pub fn parse_configuration(text: &str) -> Result<SpinConfiguration> {
    let mut spins = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        for tok in t.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            match tok {
                "1" | "+1" => spins.push(1),
                "-1" => spins.push(-1),
                _ => {
                    return Err(parse_err(idx + 1, format!("spin token '{tok}' is not +1 or -1")));
                }
            }
        }
    }
    SpinConfiguration::new(spins)
}
