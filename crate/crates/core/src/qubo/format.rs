//! Bit-exact QUBO serialization.
//!
//! `qubo-lines`: a line-oriented text format compatible with the
//! upper-triangular convention used by annealer toolchains.
//!
//! ```text
//! p qubo <N> <nnz>
//! c constant <integer>
//! c mode <derived|verbatim>
//! c params <n> <m>
//! <h> <r> <value>        1 ≤ h ≤ r ≤ N
//! ```
//!
//! Diagonal lines carry `q_hh`; off-diagonal lines carry `q_hr + q_rh`.
//! Zero entries are omitted and `#` starts a comment line.
//!
//! The JSON format stores the dense symmetric matrix with every integer as
//! a decimal string.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{EncodingParams, QuboMatrix, SignMode};
use crate::error::{Error, Result};
use crate::json::Dec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QuboFormat {
    #[default]
    QuboLines,
    Json,
}

impl FromStr for QuboFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qubo-lines" | "qubo" => Ok(QuboFormat::QuboLines),
            "json" => Ok(QuboFormat::Json),
            _ => Err(format!("unknown QUBO format '{s}' (expected json|qubo-lines)")),
        }
    }
}

pub fn export_qubo(q: &QuboMatrix, format: QuboFormat) -> Vec<u8> {
    match format {
        QuboFormat::QuboLines => export_qubo_lines(q).into_bytes(),
        QuboFormat::Json => {
            let mut s = export_json(q);
            s.push('\n');
            s.into_bytes()
        }
    }
}

/// Detects the format from the first non-blank character.
pub fn import_qubo(bytes: &[u8]) -> Result<QuboMatrix> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("not UTF-8: {e}"),
    })?;
    if text.trim_start().starts_with('{') {
        import_json(text)
    } else {
        import_qubo_lines(text)
    }
}

pub fn export_qubo_lines(q: &QuboMatrix) -> String {
    let n = q.n_vars();
    let mut entries = Vec::new();
    for h in 0..n {
        let d = q.get(h, h);
        if !d.is_zero() {
            entries.push((h, h, d.clone()));
        }
        for r in h + 1..n {
            let v = q.get(h, r) + q.get(r, h);
            if !v.is_zero() {
                entries.push((h, r, v));
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "p qubo {} {}", n, entries.len());
    let _ = writeln!(out, "c constant {}", q.constant);
    let _ = writeln!(out, "c mode {}", q.sign_mode.as_str());
    if let Some(p) = &q.params {
        let _ = writeln!(out, "c params {} {}", p.n, p.m);
    }
    for (h, r, v) in entries {
        let _ = writeln!(out, "{} {} {}", h + 1, r + 1, v);
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_int<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("invalid {what} '{tok}'")))
}

pub fn import_qubo_lines(text: &str) -> Result<QuboMatrix> {
    let mut header: Option<(usize, usize)> = None;
    let mut constant = BigInt::zero();
    let mut mode = SignMode::Derived;
    let mut params = None;
    let mut q: Vec<BigInt> = Vec::new();
    let mut seen = std::collections::HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut toks = l.split_whitespace();
        match toks.next() {
            Some("p") => {
                if header.is_some() {
                    return Err(perr(line, "duplicate header"));
                }
                if toks.next() != Some("qubo") {
                    return Err(perr(line, "expected 'p qubo <N> <nnz>'"));
                }
                let n: usize = parse_int(toks.next(), line, "variable count")?;
                let nnz: usize = parse_int(toks.next(), line, "entry count")?;
                q = vec![BigInt::zero(); n * n];
                header = Some((n, nnz));
            }
            Some("c") => match toks.next() {
                Some("constant") => constant = parse_int(toks.next(), line, "constant")?,
                Some("mode") => {
                    let s = toks.next().ok_or_else(|| perr(line, "missing mode"))?;
                    mode = s.parse().map_err(|e: String| perr(line, e))?;
                }
                Some("params") => {
                    let n: usize = parse_int(toks.next(), line, "n")?;
                    let m: u32 = parse_int(toks.next(), line, "m")?;
                    params = Some(EncodingParams::new(n, m));
                }
                _ => {}
            },
            Some(first) => {
                let (n, _) = header.ok_or_else(|| perr(line, "entry before 'p qubo' header"))?;
                let h: usize = parse_int(Some(first), line, "row index")?;
                let r: usize = parse_int(toks.next(), line, "column index")?;
                let v: BigInt = parse_int(toks.next(), line, "value")?;
                if h == 0 || r > n || h > r {
                    return Err(perr(line, format!("entry ({h}, {r}) outside 1 <= h <= r <= {n}")));
                }
                if !seen.insert((h, r)) {
                    return Err(perr(line, format!("duplicate entry ({h}, {r})")));
                }
                let (h, r) = (h - 1, r - 1);
                if h == r {
                    q[h * n + h] = v;
                } else {
                    let (half, rem) = v.div_rem(&BigInt::from(2));
                    if !rem.is_zero() {
                        return Err(perr(line, "odd off-diagonal value cannot be split into a symmetric pair"));
                    }
                    q[h * n + r] = half.clone();
                    q[r * n + h] = half;
                }
            }
            None => unreachable!(),
        }
    }
    let (n, nnz) = header.ok_or_else(|| perr(0, "missing 'p qubo' header"))?;
    if seen.len() != nnz {
        return Err(perr(0, format!("header declares {nnz} entries, found {}", seen.len())));
    }
    QuboMatrix::from_dense(n, q, constant, mode, params)
}

#[derive(Serialize, Deserialize)]
struct QuboJson {
    #[serde(default = "format_version")]
    format_version: u32,
    n: Option<usize>,
    m: Option<u32>,
    #[serde(rename = "N")]
    n_vars: usize,
    mode: String,
    constant: Dec,
    q: Vec<Vec<Dec>>,
}

fn format_version() -> u32 {
    1
}

pub fn export_json(q: &QuboMatrix) -> String {
    let n = q.n_vars();
    let doc = QuboJson {
        format_version: format_version(),
        n: q.params.as_ref().map(|p| p.n),
        m: q.params.as_ref().map(|p| p.m),
        n_vars: n,
        mode: q.sign_mode.as_str().to_string(),
        constant: Dec(q.constant.clone()),
        q: (0..n)
            .map(|h| (0..n).map(|r| Dec(q.get(h, r).clone())).collect())
            .collect(),
    };
    serde_json::to_string(&doc).expect("QUBO JSON serialization cannot fail")
}

pub fn import_json(text: &str) -> Result<QuboMatrix> {
    let doc: QuboJson = serde_json::from_str(text).map_err(|e| perr(e.line(), e.to_string()))?;
    let mode = doc.mode.parse().map_err(|e: String| perr(0, e))?;
    let params = match (doc.n, doc.m) {
        (Some(n), Some(m)) => Some(EncodingParams::new(n, m)),
        (None, None) => None,
        _ => return Err(perr(0, "fields n and m must be given together")),
    };
    if doc.q.len() != doc.n_vars || doc.q.iter().any(|row| row.len() != doc.n_vars) {
        return Err(perr(0, format!("q must be a {0}x{0} array", doc.n_vars)));
    }
    let q = doc.q.into_iter().flatten().map(|d| d.0).collect();
    QuboMatrix::from_dense(doc.n_vars, q, doc.constant.0, mode, params)
}
