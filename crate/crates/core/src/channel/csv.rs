//! Channel matrix text format.
//!
//! ```text
//! # nr=2 nt=3
//! 1.0000000000000000e0+0.0000000000000000e0j,...,...
//! ...
//! ```
//!
//! One line per receive antenna, `nt` comma-separated `re+imj` entries per
//! line, written with 17 significant digits so values round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::ChannelRealization;
use crate::error::{HbfError, Result};
use crate::linalg::CMatrix;

pub fn write_channel(h: &CMatrix) -> String {
    let mut out = String::with_capacity(h.nrows() * h.ncols() * 48 + 32);
    let _ = writeln!(out, "# nr={} nt={}", h.nrows(), h.ncols());
    for r in 0..h.nrows() {
        for c in 0..h.ncols() {
            if c > 0 {
                out.push(',');
            }
            let z = h[(r, c)];
            let _ = write!(out, "{:.16e}{:+.16e}j", z.re, z.im);
        }
        out.push('\n');
    }
    out
}

pub fn export_channel(h: &CMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_channel(h)).map_err(|e| HbfError::io(path, e))
}

pub fn import_channel(path: impl AsRef<Path>) -> Result<ChannelRealization> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| HbfError::io(path, e))?;
    Ok(ChannelRealization::from_matrix(parse_channel(&text)?))
}

fn perr(line: usize, column: Option<usize>, message: impl Into<String>) -> HbfError {
    HbfError::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize)> {
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| perr(1, None, "expected header `# nr=<int> nt=<int>`"))?;
    let mut nr = None;
    let mut nt = None;
    for tok in body.split_whitespace() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| perr(1, None, format!("bad header token `{tok}`")))?;
        let value: usize = value
            .parse()
            .map_err(|_| perr(1, None, format!("bad header value `{tok}`")))?;
        match key {
            "nr" => nr = Some(value),
            "nt" => nt = Some(value),
            _ => return Err(perr(1, None, format!("unknown header key `{key}`"))),
        }
    }
    match (nr, nt) {
        (Some(r), Some(t)) if r > 0 && t > 0 => Ok((r, t)),
        _ => Err(perr(1, None, "header must give positive nr and nt")),
    }
}

/// Parses `re+imj` / `re-imj`. The split point is the last sign that is not
/// the leading sign and not part of an exponent.
fn parse_complex(tok: &str) -> Option<Complex64> {
    let body = tok.trim().strip_suffix('j')?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'))?;
    let re: f64 = body[..split].parse().ok()?;
    let im: f64 = body[split..].parse().ok()?;
    Some(Complex64::new(re, im))
}

pub fn parse_channel(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| perr(1, None, "empty file"))?;
    let (nr, nt) = parse_header(header)?;
    let mut h = CMatrix::zeros(nr, nt);
    let mut rows = 0usize;
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if rows == nr {
            return Err(perr(lineno, None, format!("more than the {nr} data rows declared")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != nt {
            return Err(perr(
                lineno,
                None,
                format!("data row {} has {} entries, expected {nt}", rows + 1, fields.len()),
            ));
        }
        for (c, f) in fields.iter().enumerate() {
            h[(rows, c)] = parse_complex(f)
                .ok_or_else(|| perr(lineno, Some(c + 1), format!("not a complex number: `{}`", f.trim())))?;
        }
        rows += 1;
    }
    if rows < nr {
        return Err(perr(
            rows + 2,
            None,
            format!("expected {nr} data rows, found {rows} (row {} missing)", rows + 1),
        ));
    }
    Ok(h)
}
