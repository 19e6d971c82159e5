//! DVEC: dense row-major float32 matrices on disk.
//!
//! Layout (little-endian):
//!
//! | bytes  | content                          |
//! |--------|----------------------------------|
//! | 0..4   | magic `DVEC`                     |
//! | 4..8   | version, u32 = 1                 |
//! | 8..16  | n_rows, u64                      |
//! | 16..24 | n_cols, u64                      |
//! | 24     | dtype flag, 0x01 = f32           |
//! | 25..32 | zero padding                     |
//! | 32..   | n_rows * n_cols f32, row-major   |
//!
//! An optional `<name>.ids` text file next to the matrix lists one document id per row.

use std::fs;
use std::path::{Path, PathBuf};

use super::matrix::{DenseMatrix, FeatureMatrix, MatrixKind};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"DVEC";
pub const VERSION: u32 = 1;
pub const DTYPE_F32: u8 = 0x01;
pub const HEADER_LEN: usize = 32;

/// Path of the optional id list for a DVEC file.
pub fn ids_path(path: &Path) -> PathBuf {
    path.with_extension("ids")
}

/// Encode a matrix. Values are narrowed to f32.
pub fn encode(matrix: &FeatureMatrix) -> Result<Vec<u8>> {
    let dense = matrix.to_dense();
    let mut out = Vec::with_capacity(HEADER_LEN + dense.data().len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(dense.n_rows() as u64).to_le_bytes());
    out.extend_from_slice(&(dense.n_cols() as u64).to_le_bytes());
    out.push(DTYPE_F32);
    out.extend_from_slice(&[0u8; 7]);
    for &v in dense.data() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(Error::Format(format!("value {v} is not representable as f32")));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

/// Decode a DVEC byte buffer into an embedding matrix with ids `0..n_rows`.
pub fn decode(bytes: &[u8]) -> Result<FeatureMatrix> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("header truncated ({} bytes)", bytes.len())));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}",
            String::from_utf8_lossy(&bytes[0..4])
        )));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n_rows = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let n_cols = u64::from_le_bytes(bytes[16..24].try_into().unwrap());
    if bytes[24] != DTYPE_F32 {
        return Err(Error::Format(format!("unsupported dtype flag {:#04x}", bytes[24])));
    }
    if bytes[25..32].iter().any(|&b| b != 0) {
        return Err(Error::Format("non-zero header padding".into()));
    }
    let count = n_rows
        .checked_mul(n_cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| Error::Format(format!("{n_rows}x{n_cols} overflows")))?;
    let payload = count
        .checked_mul(4)
        .ok_or_else(|| Error::Format(format!("{n_rows}x{n_cols} overflows")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() != payload {
        return Err(Error::Format(format!(
            "payload is {} bytes, expected {payload} for {n_rows}x{n_cols}",
            body.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for chunk in body.chunks_exact(4) {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Format("non-finite value in payload".into()));
        }
        data.push(v as f64);
    }
    let dense = DenseMatrix::new(n_rows as usize, n_cols as usize, data)?;
    Ok(FeatureMatrix::dense(MatrixKind::Embedding, dense))
}

/// Write `matrix` as DVEC plus its `.ids` list.
pub fn save_embeddings(matrix: &FeatureMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(matrix)?).map_err(|e| Error::io(path, e))?;
    let ids: String = matrix.ids().iter().map(|id| format!("{id}\n")).collect();
    let ids_file = ids_path(path);
    fs::write(&ids_file, ids).map_err(|e| Error::io(ids_file, e))
}

/// Read a DVEC file. Row ids come from the `.ids` file when present, else `0..n_rows`.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let matrix = decode(&bytes)?;
    let ids_file = ids_path(path);
    if !ids_file.exists() {
        return Ok(matrix);
    }
    let raw = fs::read_to_string(&ids_file).map_err(|e| Error::io(&ids_file, e))?;
    let ids = raw
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| {
            l.trim().parse::<usize>().map_err(|e| Error::Parse {
                line: n + 1,
                message: format!("{}: {e}", ids_file.display()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if ids.len() != matrix.n_rows() {
        return Err(Error::Format(format!(
            "{} lists {} ids for {} rows",
            ids_file.display(),
            ids.len(),
            matrix.n_rows()
        )));
    }
    matrix.with_ids(ids)
}
