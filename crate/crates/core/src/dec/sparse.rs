use std::io::Write;

use rayon::prelude::*;

use super::DecError;

/// Rows below this count are applied serially.
const PAR_ROWS: usize = 4096;

/// A sparse linear map in compressed-row form.
///
/// Column indices within a row are strictly increasing, so `(row, col)`
/// pairs are unique by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Builds an operator from `(row, col, value)` triplets. Duplicate
    /// coordinates and out-of-range indices are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self, DecError> {
        for &(r, c, _) in &entries {
            if r >= rows || c >= cols {
                return Err(DecError::IndexOutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(DecError::DuplicateEntry {
                row: w[0].0,
                col: w[0].1,
            });
        }
        let mut row_ptr = vec![0; rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for r in 0..rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Ok(SparseOperator {
            rows,
            cols,
            row_ptr,
            col_idx: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        })
    }

    /// Square diagonal operator.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        SparseOperator {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[span.clone()], &self.values[span])
    }

    /// All stored entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(move |(&c, &v)| (r, c, v))
        })
    }

    /// Stored value at `(r, c)`, zero if absent.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map_or(0.0, |i| vals[i])
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.apply_into(x, &mut y);
        y
    }

    /// `y = A x`. Each row is summed left to right, so results do not depend
    /// on the thread count.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.cols, "operand length");
        assert_eq!(y.len(), self.rows, "output length");
        let row = |r: usize| {
            let (c, v) = self.row(r);
            c.iter().zip(v).map(|(&c, &v)| v * x[c]).sum::<f64>()
        };
        if self.rows >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(r, out)| *out = row(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
    }

    pub fn transpose(&self) -> SparseOperator {
        let mut row_ptr = vec![0; self.cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..self.cols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for (r, c, v) in self.entries() {
            let k = next[c];
            col_idx[k] = r;
            values[k] = v;
            next[c] += 1;
        }
        SparseOperator {
            rows: self.cols,
            cols: self.rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Matrix product `self * rhs`.
    pub fn compose(&self, rhs: &SparseOperator) -> Result<SparseOperator, DecError> {
        if self.cols != rhs.rows {
            return Err(DecError::DimensionMismatch {
                left: (self.rows, self.cols),
                right: (rhs.rows, rhs.cols),
            });
        }
        let mut acc = vec![0.0; rhs.cols];
        let mut mark = vec![usize::MAX; rhs.cols];
        let mut touched = Vec::new();
        let mut row_ptr = Vec::with_capacity(self.rows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.rows {
            touched.clear();
            let (ac, av) = self.row(r);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = rhs.row(k);
                for (&c, &b) in bc.iter().zip(bv) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = 0.0;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                values.push(acc[c]);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseOperator {
            rows: self.rows,
            cols: rhs.cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Multiplies every stored value by `s`.
    pub fn scale(mut self, s: f64) -> SparseOperator {
        self.values.iter_mut().for_each(|v| *v *= s);
        self
    }

    /// Removes entries whose value is exactly zero.
    pub fn drop_zeros(self) -> SparseOperator {
        let entries = self.entries().filter(|e| e.2 != 0.0).collect();
        SparseOperator::from_triplets(self.rows, self.cols, entries)
            .expect("filtered entries stay unique")
    }

    /// Replaces each diagonal entry of a square operator with minus the sum
    /// of the row's off-diagonal entries, inserting it if absent.
    pub(crate) fn balance_diagonal(self) -> SparseOperator {
        debug_assert_eq!(self.rows, self.cols);
        let mut entries = Vec::with_capacity(self.nnz() + self.rows);
        for r in 0..self.rows {
            let (cols, vals) = self.row(r);
            let off: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(&c, _)| c != r)
                .map(|(_, &v)| v)
                .sum();
            entries.extend(
                cols.iter()
                    .zip(vals)
                    .filter(|(&c, _)| c != r)
                    .map(|(&c, &v)| (r, c, v)),
            );
            entries.push((r, r, -off));
        }
        SparseOperator::from_triplets(self.rows, self.cols, entries)
            .expect("balanced entries stay unique")
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.cols]; self.rows];
        for (r, c, v) in self.entries() {
            d[r][c] = v;
        }
        d
    }

    /// Coordinate-format text: one `row col value` line per stored entry.
    pub fn write_coo<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {} {} {}", self.rows, self.cols, self.nnz())?;
        for (r, c, v) in self.entries() {
            writeln!(out, "{r} {c} {v:e}")?;
        }
        Ok(())
    }
}
