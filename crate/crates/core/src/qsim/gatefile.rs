//! Plain-text gate definitions.
//!
//! ```text
//! gate NAME arity K adjoint NAME2
//! row a+bi a+bi ...
//! ```
//!
//! A block holds `2^(K+1)` rows of as many entries. Entries are complex
//! literals such as `0.5`, `-1e-3i`, `0.70710678-0.70710678i` or `i`. Blank
//! lines and lines starting with `#` or `--` are ignored.

use std::path::Path;

use num_complex::Complex64;

use super::matrix::Matrix;
use super::registry::GateDef;

#[derive(Debug, thiserror::Error)]
pub enum GateFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read gate file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> GateFileError {
    GateFileError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses a complex literal `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(text: &str) -> Option<Complex64> {
    let s = text.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split before the sign that starts the imaginary part, skipping a
    // leading sign and exponent signs.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (body[..k].parse::<f64>().ok()?, imag_part(&body[k..])?),
        None => (0.0, imag_part(body)?),
    };
    Some(Complex64::new(re, im))
}

fn imag_part(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    }
}

pub fn parse_gate_file(text: &str) -> Result<Vec<GateDef>, GateFileError> {
    struct Pending {
        name: String,
        arity_class: u32,
        adjoint: String,
        rows: Vec<Vec<Complex64>>,
        line: usize,
    }

    fn finish(p: Pending) -> Result<GateDef, GateFileError> {
        let dim = 1usize << (p.arity_class + 1);
        if p.rows.len() != dim {
            return Err(syntax(
                p.line,
                format!("gate `{}` needs {dim} rows, found {}", p.name, p.rows.len()),
            ));
        }
        let matrix = Matrix::from_rows(p.rows).expect("row lengths checked");
        Ok(GateDef::new(p.name, p.arity_class, matrix, p.adjoint))
    }

    let mut out = Vec::new();
    let mut pending: Option<Pending> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with("--") {
            continue;
        }
        let words: Vec<&str> = trimmed.split_whitespace().collect();
        match words[0] {
            "gate" => {
                if let Some(p) = pending.take() {
                    out.push(finish(p)?);
                }
                let [_, name, "arity", k, "adjoint", adj] = words[..] else {
                    return Err(syntax(line, "expected `gate NAME arity K adjoint NAME`"));
                };
                let arity_class: u32 = k
                    .parse()
                    .ok()
                    .filter(|&k: &u32| k < 12)
                    .ok_or_else(|| syntax(line, format!("bad arity `{k}`")))?;
                pending = Some(Pending {
                    name: name.to_string(),
                    arity_class,
                    adjoint: adj.to_string(),
                    rows: Vec::new(),
                    line,
                });
            }
            "row" => {
                let p = pending
                    .as_mut()
                    .ok_or_else(|| syntax(line, "`row` outside a gate block"))?;
                let dim = 1usize << (p.arity_class + 1);
                let row = words[1..]
                    .iter()
                    .map(|w| parse_complex(w).ok_or_else(|| syntax(line, format!("bad complex literal `{w}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                if row.len() != dim {
                    return Err(syntax(line, format!("row needs {dim} entries, found {}", row.len())));
                }
                p.rows.push(row);
            }
            other => return Err(syntax(line, format!("unexpected `{other}`"))),
        }
    }
    if let Some(p) = pending {
        out.push(finish(p)?);
    }
    Ok(out)
}

pub fn load_gate_file(path: &Path) -> Result<Vec<GateDef>, GateFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| GateFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_gate_file(&text)
}
