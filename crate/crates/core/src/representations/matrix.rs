use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which representation produced a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Bow,
    Lsi,
    Embedding,
}

/// Row-compressed sparse matrix. Column indices within a row are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from per-row `(column, value)` lists. Zero entries are dropped,
    /// duplicate columns are summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let start = indices.len();
            for (c, v) in row {
                if c >= n_cols {
                    return Err(Error::OutOfRange { index: c, len: n_cols });
                }
                if !v.is_finite() {
                    return Err(Error::InvalidArgument("non-finite matrix entry".into()));
                }
                if indices.len() > start && *indices.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    values.push(v);
                }
            }
            // drop explicit zeros (including sums that cancelled)
            let mut w = start;
            for r in start..indices.len() {
                if values[r] != 0.0 {
                    indices[w] = indices[r];
                    values[w] = values[r];
                    w += 1;
                }
            }
            indices.truncate(w);
            values.truncate(w);
            indptr.push(indices.len());
        }
        Ok(CsrMatrix {
            n_rows: indptr.len() - 1,
            n_cols,
            indptr,
            indices,
            values,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    fn map_rows(&self, mut f: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_rows {
            let (_, v) = self.row(i);
            values.extend(f(i, v));
        }
        CsrMatrix { values, ..self.clone() }
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows.checked_mul(n_cols) != Some(data.len()) {
            return Err(Error::DimensionMismatch {
                expected: n_rows.saturating_mul(n_cols),
                got: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite matrix entry".into()));
        }
        Ok(DenseMatrix { n_rows, n_cols, data })
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch {
                expected: n_cols,
                got: bad.len(),
            });
        }
        Self::new(rows.len(), n_cols, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage {
    Sparse(CsrMatrix),
    Dense(DenseMatrix),
}

/// Borrowed view of one matrix row.
#[derive(Debug, Clone, Copy)]
pub enum Row<'a> {
    Sparse(&'a [usize], &'a [f64]),
    Dense(&'a [f64]),
}

impl Row<'_> {
    pub fn norm(&self) -> f64 {
        let v = match self {
            Row::Sparse(_, v) => v,
            Row::Dense(v) => v,
        };
        v.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Dot product, summed in ascending column order.
    pub fn dot(&self, other: &Row<'_>) -> f64 {
        match (self, other) {
            (Row::Dense(a), Row::Dense(b)) => a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc + x * y),
            (Row::Sparse(ia, va), Row::Sparse(ib, vb)) => {
                let (mut p, mut q, mut acc) = (0, 0, 0.0);
                while p < ia.len() && q < ib.len() {
                    match ia[p].cmp(&ib[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            acc += va[p] * vb[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                acc
            }
            (Row::Sparse(idx, v), Row::Dense(d)) | (Row::Dense(d), Row::Sparse(idx, v)) => {
                idx.iter().zip(v.iter()).fold(0.0, |acc, (&c, x)| acc + x * d[c])
            }
        }
    }

    /// Dense copy of the row with `n_cols` entries.
    pub fn to_dense(&self, n_cols: usize) -> Vec<f64> {
        match self {
            Row::Dense(v) => v.to_vec(),
            Row::Sparse(idx, v) => {
                let mut out = vec![0.0; n_cols];
                for (&c, &x) in idx.iter().zip(v.iter()) {
                    out[c] = x;
                }
                out
            }
        }
    }
}

/// Row-per-document feature matrix with the document ids of its rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    kind: MatrixKind,
    storage: Storage,
    ids: Vec<usize>,
}

impl FeatureMatrix {
    /// Rows get ids `0..n_rows` until [`with_ids`](Self::with_ids) is called.
    pub fn new(kind: MatrixKind, storage: Storage) -> Self {
        let n = match &storage {
            Storage::Sparse(m) => m.n_rows(),
            Storage::Dense(m) => m.n_rows(),
        };
        FeatureMatrix {
            kind,
            storage,
            ids: (0..n).collect(),
        }
    }

    pub fn dense(kind: MatrixKind, m: DenseMatrix) -> Self {
        Self::new(kind, Storage::Dense(m))
    }

    pub fn sparse(kind: MatrixKind, m: CsrMatrix) -> Self {
        Self::new(kind, Storage::Sparse(m))
    }

    pub fn with_ids(mut self, ids: Vec<usize>) -> Result<Self> {
        if ids.len() != self.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: self.n_rows(),
                got: ids.len(),
            });
        }
        self.ids = ids;
        Ok(self)
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn n_rows(&self) -> usize {
        match &self.storage {
            Storage::Sparse(m) => m.n_rows(),
            Storage::Dense(m) => m.n_rows(),
        }
    }

    pub fn n_cols(&self) -> usize {
        match &self.storage {
            Storage::Sparse(m) => m.n_cols(),
            Storage::Dense(m) => m.n_cols(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            Storage::Sparse(m) => {
                let (idx, v) = m.row(i);
                Row::Sparse(idx, v)
            }
            Storage::Dense(m) => Row::Dense(m.row(i)),
        }
    }

    pub fn dot(&self, i: usize, j: usize) -> f64 {
        self.row(i).dot(&self.row(j))
    }

    /// Indices of rows that are entirely zero.
    pub fn zero_rows(&self) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.row(i).norm() == 0.0).collect()
    }

    /// New matrix holding rows at `positions` (row positions, not ids), in that order.
    pub fn select_rows(&self, positions: &[usize]) -> Result<Self> {
        let n = self.n_rows();
        if let Some(&bad) = positions.iter().find(|&&p| p >= n) {
            return Err(Error::OutOfRange { index: bad, len: n });
        }
        let storage = match &self.storage {
            Storage::Sparse(m) => {
                let rows = positions
                    .iter()
                    .map(|&p| {
                        let (idx, v) = m.row(p);
                        idx.iter().copied().zip(v.iter().copied()).collect()
                    })
                    .collect();
                Storage::Sparse(CsrMatrix::from_rows(m.n_cols(), rows)?)
            }
            Storage::Dense(m) => {
                let mut data = Vec::with_capacity(positions.len() * m.n_cols());
                for &p in positions {
                    data.extend_from_slice(m.row(p));
                }
                Storage::Dense(DenseMatrix::new(positions.len(), m.n_cols(), data)?)
            }
        };
        Ok(FeatureMatrix {
            kind: self.kind,
            storage,
            ids: positions.iter().map(|&p| self.ids[p]).collect(),
        })
    }

    /// Rows whose ids are `ids`, in the order given.
    pub fn select_ids(&self, ids: &[usize]) -> Result<Self> {
        let lookup: std::collections::HashMap<usize, usize> =
            self.ids.iter().enumerate().map(|(p, &id)| (id, p)).collect();
        let positions = ids
            .iter()
            .map(|id| {
                lookup
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument(format!("document id {id} has no row in the matrix")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.select_rows(&positions)
    }

    /// Dense copy of the whole matrix.
    pub fn to_dense(&self) -> DenseMatrix {
        match &self.storage {
            Storage::Dense(m) => m.clone(),
            Storage::Sparse(m) => {
                let mut out = DenseMatrix::zeros(m.n_rows(), m.n_cols());
                for i in 0..m.n_rows() {
                    let (idx, v) = m.row(i);
                    let row = out.row_mut(i);
                    for (&c, &x) in idx.iter().zip(v) {
                        row[c] = x;
                    }
                }
                out
            }
        }
    }
}

/// Unit-L2 copy of `matrix` so cosine similarity is a dot product. Zero rows stay zero.
pub fn similarity_view(matrix: &FeatureMatrix) -> FeatureMatrix {
    let scale = |v: &[f64]| -> Vec<f64> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter().map(|x| x / norm).collect()
        } else {
            v.to_vec()
        }
    };
    let storage = match &matrix.storage {
        Storage::Sparse(m) => Storage::Sparse(m.map_rows(|_, v| scale(v))),
        Storage::Dense(m) => {
            let mut out = m.clone();
            for i in 0..m.n_rows() {
                let scaled = scale(m.row(i));
                out.row_mut(i).copy_from_slice(&scaled);
            }
            Storage::Dense(out)
        }
    };
    FeatureMatrix {
        kind: matrix.kind,
        storage,
        ids: matrix.ids.clone(),
    }
}
