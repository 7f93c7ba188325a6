//! Plain-text persistence of [`TumorState`].
//!
//! Layout: a header line `fbp-snapshot v1 <config-hash>`, then one line per
//! array, `label count v_1 ... v_count`. Floats use the shortest form that
//! parses back to the same bits, so a reload is exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{FbpError, Result};
use crate::fracmem::HistoryCache;

use super::TumorState;

pub const MAGIC: &str = "fbp-snapshot";
pub const VERSION: &str = "v1";

fn write_array(out: &mut String, label: &str, values: &[f64]) {
    let _ = write!(out, "{label} {}", values.len());
    for v in values {
        let _ = write!(out, " {v:?}");
    }
    out.push('\n');
}

fn write_history(out: &mut String, label: &str, cache: &HistoryCache) {
    let _ = writeln!(out, "{label} {} {}", cache.len(), cache.reads());
    for row in cache.entries() {
        write_array(out, "row", row);
    }
}

/// Serializes `state` stamped with `config_hash`.
pub fn to_text(state: &TumorState, config_hash: &str) -> String {
    let mut out = format!("{MAGIC} {VERSION} {config_hash}\n");
    let _ = writeln!(out, "step {}", state.step);
    write_array(&mut out, "radius", &[state.radius]);
    write_array(&mut out, "radius_prev", &[state.radius_prev]);
    for (label, v) in [
        ("c", &state.c),
        ("c_prev", &state.c_prev),
        ("w", &state.w),
        ("w_prev", &state.w_prev),
        ("p", &state.p),
        ("q", &state.q),
        ("d", &state.d),
        ("p_prev", &state.p_prev),
        ("q_prev", &state.q_prev),
        ("d_prev", &state.d_prev),
        ("velocity_prev", &state.velocity_prev),
        ("source_c_prev", &state.source_c_prev),
        ("source_w_prev", &state.source_w_prev),
    ] {
        write_array(&mut out, label, v);
    }
    write_history(&mut out, "history_c", &state.history_c);
    write_history(&mut out, "history_w", &state.history_w);
    out
}

pub fn save_snapshot(path: &Path, state: &TumorState, config_hash: &str) -> Result<()> {
    std::fs::write(path, to_text(state, config_hash))?;
    Ok(())
}

/// Reads a snapshot, returning the config hash it was written with.
pub fn load_snapshot(path: &Path) -> Result<(String, TumorState)> {
    from_text(&std::fs::read_to_string(path)?)
}

/// Whitespace-separated tokens with their byte offsets.
struct Tokens<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn err(&self, offset: usize, message: impl Into<String>) -> FbpError {
        FbpError::Snapshot {
            offset,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= bytes.len() {
            return Err(self.err(self.pos, format!("unexpected end of file, expected {what}")));
        }
        let start = self.pos;
        while self.pos < bytes.len() && !bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        Ok((start, &self.text[start..self.pos]))
    }

    fn expect(&mut self, label: &str) -> Result<()> {
        let (at, tok) = self.next(label)?;
        if tok != label {
            return Err(self.err(at, format!("expected `{label}`, found `{tok}`")));
        }
        Ok(())
    }

    fn usize(&mut self, what: &str) -> Result<usize> {
        let (at, tok) = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(at, format!("invalid {what} `{tok}`")))
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        let (at, tok) = self.next(what)?;
        tok.parse()
            .map_err(|_| self.err(at, format!("invalid number `{tok}` in {what}")))
    }

    fn array(&mut self, label: &str) -> Result<Vec<f64>> {
        self.expect(label)?;
        let n = self.usize("array length")?;
        (0..n).map(|_| self.f64(label)).collect()
    }

    fn scalar(&mut self, label: &str) -> Result<f64> {
        let at = self.pos;
        let v = self.array(label)?;
        if v.len() != 1 {
            return Err(self.err(at, format!("`{label}` must hold one value")));
        }
        Ok(v[0])
    }

    fn history(&mut self, label: &str) -> Result<HistoryCache> {
        self.expect(label)?;
        let rows = self.usize("history length")?;
        let reads = self.usize("history read count")? as u64;
        let entries = (0..rows).map(|_| self.array("row")).collect::<Result<Vec<_>>>()?;
        Ok(HistoryCache::from_parts(entries, reads))
    }
}

pub fn from_text(text: &str) -> Result<(String, TumorState)> {
    let mut t = Tokens { text, pos: 0 };
    let (at, magic) = t.next("header")?;
    if magic != MAGIC {
        return Err(t.err(at, format!("not a snapshot file (header `{magic}`)")));
    }
    let (at, version) = t.next("version")?;
    if version != VERSION {
        return Err(t.err(at, format!("unsupported snapshot version `{version}` (expected {VERSION})")));
    }
    let (_, hash) = t.next("config hash")?;
    let hash = hash.to_string();
    t.expect("step")?;
    let step = t.usize("step")?;
    let radius = t.scalar("radius")?;
    let radius_prev = t.scalar("radius_prev")?;
    let state = TumorState {
        step,
        radius,
        radius_prev,
        c: t.array("c")?,
        c_prev: t.array("c_prev")?,
        w: t.array("w")?,
        w_prev: t.array("w_prev")?,
        p: t.array("p")?,
        q: t.array("q")?,
        d: t.array("d")?,
        p_prev: t.array("p_prev")?,
        q_prev: t.array("q_prev")?,
        d_prev: t.array("d_prev")?,
        velocity_prev: t.array("velocity_prev")?,
        source_c_prev: t.array("source_c_prev")?,
        source_w_prev: t.array("source_w_prev")?,
        history_c: t.history("history_c")?,
        history_w: t.history("history_w")?,
    };
    if let Ok((at, tok)) = t.next("end of file") {
        return Err(t.err(at, format!("trailing data `{tok}`")));
    }
    Ok((hash, state))
}
