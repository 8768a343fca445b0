//! VPCF feature files.
//!
//! Layout, all little-endian:
//!
//! | offset | size | field                          |
//! |--------|------|--------------------------------|
//! | 0      | 4    | magic `b"VPCF"`                |
//! | 4      | 4    | version, `u32` = 1             |
//! | 8      | 4    | `n_rows`, `u32`                |
//! | 12     | 4    | `dim`, `u32`                   |
//! | 16     | ...  | `n_rows * dim` `f32`, row-major |
//!
//! Files with a `.csv` extension hold one row of decimal floats per line
//! instead.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::FeatureMatrix;

use super::write_bytes;

pub const VPCF_MAGIC: [u8; 4] = *b"VPCF";
pub const VPCF_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn encode_vpcf(matrix: &FeatureMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * matrix.values().len());
    out.extend_from_slice(&VPCF_MAGIC);
    out.extend_from_slice(&VPCF_VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.n_rows() as u32).to_le_bytes());
    out.extend_from_slice(&(matrix.dim() as u32).to_le_bytes());
    for v in matrix.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses VPCF bytes; `path` is only used in error messages.
pub fn decode_vpcf(bytes: &[u8], path: &Path) -> Result<FeatureMatrix> {
    if bytes.len() >= 4 && bytes[..4] != VPCF_MAGIC {
        return Err(Error::BadMagic {
            path: path.into(),
            found: bytes[..4].try_into().unwrap(),
        });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::TruncatedHeader {
            path: path.into(),
            len: bytes.len(),
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(4);
    if version != VPCF_VERSION {
        return Err(Error::UnsupportedVersion {
            path: path.into(),
            version,
        });
    }
    let n_rows = word(8) as usize;
    let dim = word(12) as usize;
    let expected = n_rows
        .checked_mul(dim)
        .and_then(|n| n.checked_mul(4))
        .unwrap_or(usize::MAX);
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(Error::PayloadSize {
            path: path.into(),
            expected,
            actual: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    FeatureMatrix::new(n_rows, dim, values)
}

fn decode_csv(text: &str, path: &Path) -> Result<FeatureMatrix> {
    let mut rows: Vec<Vec<f32>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim()
                    .parse::<f32>()
                    .map_err(|e| Error::parse(path, line_no, format!("{f:?}: {e}")))
            })
            .collect::<Result<Vec<f32>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::parse(
                    path,
                    line_no,
                    format!("expected {} values, found {}", first.len(), row.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    FeatureMatrix::from_rows(&rows)
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_csv(path) {
        let text = String::from_utf8(bytes).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        decode_csv(&text, path)
    } else {
        decode_vpcf(&bytes, path)
    }
}

/// Writes VPCF, or CSV when the path ends in `.csv`.
pub fn write_features(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_csv(path) {
        let mut out = String::new();
        for row in matrix.rows() {
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        write_bytes(path, out.as_bytes())
    } else {
        write_bytes(path, &encode_vpcf(matrix))
    }
}
