//! Small dense/banded kernels and the compressed-row matrix used by assembly.

/// Solves a tridiagonal system in place (Thomas algorithm).
///
/// `lower[i]` couples row `i` to `i-1` (entry 0 unused), `upper[i]` couples
/// row `i` to `i+1` (last entry unused). `rhs` is overwritten by the solution.
/// Returns `false` on a zero pivot.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) -> bool {
    let n = diag.len();
    debug_assert!(lower.len() == n && upper.len() == n && rhs.len() == n);
    if n == 0 {
        return true;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return false;
    }
    rhs[0] /= pivot;
    for i in 1..n {
        scratch[i] = upper[i - 1] / pivot;
        pivot = diag[i] - lower[i] * scratch[i];
        if pivot == 0.0 {
            return false;
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i + 1] * rhs[i + 1];
    }
    true
}

/// Sparse matrix in compressed-row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds the matrix from `(row, col, value)` triplets, summing duplicates.
    /// Duplicates are summed in input order, so the result is deterministic.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut order = vec![0usize; triplets.len()];
        let mut next = counts.clone();
        for (k, &(r, _, _)) in triplets.iter().enumerate() {
            order[next[r]] = k;
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row.clear();
            row.extend(order[counts[r]..counts[r + 1]].iter().map(|&k| (triplets[k].1, triplets[k].2)));
            // stable: equal columns keep input order
            row.sort_by_key(|&(c, _)| c);
            let mut i = 0;
            while i < row.len() {
                let c = row[i].0;
                let mut v = 0.0;
                while i < row.len() && row[i].0 == c {
                    v += row[i].1;
                    i += 1;
                }
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.values[self.row_ptr[r] + k],
            Err(_) => 0.0,
        }
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `yᵀ A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        self.mul_vec(x).iter().zip(y).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        out
    }
}
