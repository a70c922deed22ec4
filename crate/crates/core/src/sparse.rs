//! Compressed-sparse-column storage for constraint matrices.

use crate::model::ModelError;

/// A real sparse matrix in compressed-sparse-column form.
///
/// Row indices within each column are strictly increasing and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct CscMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscMatrix {
    /// Build from `(row, col, value)` triplets. Duplicate positions are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, ModelError> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(r, c, v) in triplets {
            if r >= nrows || c >= ncols {
                return Err(ModelError::IndexOutOfBounds {
                    row: r,
                    col: c,
                    nrows,
                    ncols,
                });
            }
            if !v.is_finite() {
                return Err(ModelError::NonFinite("matrix entry"));
            }
            sorted.push((c, r, v));
        }
        sorted.sort_by_key(|t| (t.0, t.1));

        let mut col_ptr = vec![0usize; ncols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut i = 0;
        for col in 0..ncols {
            while i < sorted.len() && sorted[i].0 == col {
                let row = sorted[i].1;
                let mut v = 0.0;
                while i < sorted.len() && sorted[i].0 == col && sorted[i].1 == row {
                    v += sorted[i].2;
                    i += 1;
                }
                if v != 0.0 {
                    row_idx.push(row);
                    values.push(v);
                }
            }
            col_ptr[col + 1] = row_idx.len();
        }
        Ok(CscMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Build from a row-major dense array. Zeros are not stored.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self, ModelError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(ModelError::DimensionMismatch {
                    what: "dense row length",
                    expected: ncols,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    trip.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &trip)
    }

    pub fn identity(n: usize) -> Self {
        CscMatrix {
            nrows: n,
            ncols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CscMatrix {
            nrows,
            ncols,
            col_ptr: vec![0; ncols + 1],
            row_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterate over `(row, value)` pairs of column `j`.
    pub fn col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn col_nnz(&self, j: usize) -> usize {
        self.col_ptr[j + 1] - self.col_ptr[j]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.col_ptr[col]..self.col_ptr[col + 1];
        match self.row_idx[range.clone()].binary_search(&row) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            out.extend(self.col(j).map(|(i, v)| (i, j, v)));
        }
        out
    }

    /// `A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "mul_vec: length mismatch");
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (i, v) in self.col(j) {
                y[i] += v * xj;
            }
        }
        y
    }

    /// `Aᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.nrows, "tr_mul_vec: length mismatch");
        (0..self.ncols)
            .map(|j| self.col(j).map(|(i, v)| v * y[i]).sum())
            .collect()
    }

    pub fn transpose(&self) -> CscMatrix {
        let mut counts = vec![0usize; self.nrows + 1];
        for &i in &self.row_idx {
            counts[i + 1] += 1;
        }
        for i in 0..self.nrows {
            counts[i + 1] += counts[i];
        }
        let col_ptr = counts.clone();
        let mut next = counts;
        let mut row_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for j in 0..self.ncols {
            for (i, v) in self.col(j) {
                let p = next[i];
                next[i] += 1;
                row_idx[p] = j;
                values[p] = v;
            }
        }
        CscMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Keep the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> CscMatrix {
        let mut col_ptr = Vec::with_capacity(keep.len() + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for &j in keep {
            for (i, v) in self.col(j) {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            nrows: self.nrows,
            ncols: keep.len(),
            col_ptr,
            row_idx,
            values,
        }
    }

    /// Keep the listed rows (increasing order), renumbering them consecutively.
    pub fn select_rows(&self, keep: &[usize]) -> CscMatrix {
        let mut map = vec![usize::MAX; self.nrows];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut col_ptr = Vec::with_capacity(self.ncols + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for j in 0..self.ncols {
            let mut entries: Vec<(usize, f64)> = self
                .col(j)
                .filter(|&(i, _)| map[i] != usize::MAX)
                .map(|(i, v)| (map[i], v))
                .collect();
            entries.sort_by_key(|e| e.0);
            for (i, v) in entries {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        CscMatrix {
            nrows: keep.len(),
            ncols: self.ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for (i, v) in self.col(j) {
                out[i][j] = v;
            }
        }
        out
    }

    /// Largest absolute entry, 0 for an empty matrix.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let a =
            CscMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 1.0), (1, 1, -1.0)])
                .unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 1), 0.0);
    }

    #[test]
    fn products_match_dense() {
        let a = CscMatrix::from_dense(&[vec![1.0, 0.0, 2.0], vec![0.0, 3.0, 4.0]]).unwrap();
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 7.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 2.0]), vec![1.0, 6.0, 10.0]);
        assert_eq!(
            a.transpose().to_dense(),
            vec![vec![1.0, 0.0], vec![0.0, 3.0], vec![2.0, 4.0]]
        );
    }

    #[test]
    fn row_and_column_selection() {
        let a = CscMatrix::from_dense(&[
            vec![1.0, 0.0, 2.0],
            vec![0.0, 3.0, 4.0],
            vec![5.0, 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(
            a.select_rows(&[0, 2]).to_dense(),
            vec![vec![1.0, 0.0, 2.0], vec![5.0, 0.0, 0.0]]
        );
        assert_eq!(
            a.select_columns(&[2, 0]).to_dense(),
            vec![vec![2.0, 1.0], vec![4.0, 0.0], vec![0.0, 5.0]]
        );
    }

    #[test]
    fn out_of_bounds_triplet_rejected() {
        assert!(CscMatrix::from_triplets(1, 1, &[(1, 0, 1.0)]).is_err());
    }
}
