//! Compressed sparse storage and the direct solver used by the time stepper.

use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Mat, MatRef};

use crate::error::{Error, Result};

/// Coordinate-format accumulator; duplicates are summed on compression.
#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    /// Records an entry, also when `value` is zero (keeps sparsity patterns stable).
    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
        }
    }
}

/// Compressed-row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        TripletBuilder::new(nrows, ncols).into_csr()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterator over `(col, value)` of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec_acc(x, 1.0, &mut y);
        y
    }

    /// `y += alpha * A x`
    pub fn mul_vec_acc(&self, x: &[f64], alpha: f64, y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        for (r, yr) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[i] * x[self.cols[i]];
            }
            *yr += alpha * s;
        }
    }

    /// `A^T x`
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[i]] += self.vals[i] * xr;
            }
        }
        y
    }

    /// Appends all entries, scaled by `alpha`, to a builder.
    pub fn push_into(&self, alpha: f64, out: &mut TripletBuilder) {
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                out.push(r, c, alpha * v);
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] += v;
            }
        }
        d
    }

    fn to_faer(&self) -> (SymbolicSparseColMat<usize>, Vec<f64>) {
        // CSR of A is CSC of A^T; build the CSC of A directly by counting.
        let mut col_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.cols {
            col_ptr[c + 1] += 1;
        }
        for c in 0..self.ncols {
            col_ptr[c + 1] += col_ptr[c];
        }
        let mut next = col_ptr.clone();
        let mut rows = vec![0usize; self.vals.len()];
        let mut vals = vec![0.0; self.vals.len()];
        for r in 0..self.nrows {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[i];
                rows[next[c]] = r;
                vals[next[c]] = self.vals[i];
                next[c] += 1;
            }
        }
        let sym = SymbolicSparseColMat::new_checked(self.nrows, self.ncols, col_ptr, None, rows);
        (sym, vals)
    }
}

/// Sparse LU factorization that reuses the symbolic analysis while the
/// sparsity pattern stays the same.
#[derive(Default)]
pub struct SparseSolver {
    symbolic: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    lu: Option<Lu<usize, f64>>,
    n: usize,
}

impl std::fmt::Debug for SparseSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SparseSolver")
            .field("n", &self.n)
            .field("factored", &self.lu.is_some())
            .finish()
    }
}

impl Clone for SparseSolver {
    fn clone(&self) -> Self {
        // factorizations are cheap to recompute; clones start empty
        Self::default()
    }
}

impl SparseSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factorizes a square matrix.
    pub fn factor(&mut self, a: &CsrMatrix) -> Result<()> {
        if a.nrows != a.ncols {
            return Err(Error::SingularSystem);
        }
        let (sym, vals) = a.to_faer();
        let same_pattern = matches!(
            &self.symbolic,
            Some((ptr, idx, _)) if ptr.as_slice() == sym.col_ptr() && idx.as_slice() == sym.row_idx()
        );
        if !same_pattern {
            let symbolic = SymbolicLu::try_new(sym.as_ref()).map_err(|_| Error::SingularSystem)?;
            self.symbolic = Some((sym.col_ptr().to_vec(), sym.row_idx().to_vec(), symbolic));
        }
        let symbolic = self.symbolic.as_ref().unwrap().2.clone();
        let mat = SparseColMat::new(sym, vals);
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref()).map_err(|_| Error::SingularSystem)?;
        self.lu = Some(lu);
        self.n = a.nrows;
        Ok(())
    }

    pub fn is_factored(&self) -> bool {
        self.lu.is_some()
    }

    /// Solves with the last factorization.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        use faer::linalg::solvers::Solve;
        let lu = self.lu.as_ref().ok_or(Error::SingularSystem)?;
        let rhs = MatRef::from_column_major_slice(b, b.len(), 1);
        let x: Mat<f64> = lu.solve(rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::SingularSystem)
        }
    }
}

/// Solver for a sparse matrix with a few rows replaced, through a low-rank
/// update of the factorization of the unmodified matrix. Replacement rows
/// may be dense without causing fill.
#[derive(Debug, Clone, Default)]
pub struct RowUpdateSolver {
    base: SparseSolver,
    /// `(row, new row - old row)`
    updates: Vec<(usize, Vec<(usize, f64)>)>,
    /// `A^{-1} e_row` per update.
    columns: Vec<Vec<f64>>,
    capacitance: Option<faer::linalg::solvers::PartialPivLu<f64>>,
}

impl RowUpdateSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Factorizes `a` with row `r` replaced by `new` for every `(r, new)`.
    pub fn factor(&mut self, a: &CsrMatrix, replace: &[(usize, Vec<(usize, f64)>)]) -> Result<()> {
        self.base.factor(a)?;
        self.updates = replace
            .iter()
            .map(|(r, new)| {
                let mut diff: Vec<(usize, f64)> = new.clone();
                diff.extend(a.row(*r).map(|(c, v)| (c, -v)));
                (*r, diff)
            })
            .collect();
        self.columns = self
            .updates
            .iter()
            .map(|&(r, _)| {
                let mut e = vec![0.0; a.nrows];
                e[r] = 1.0;
                self.base.solve(&e)
            })
            .collect::<Result<_>>()?;
        let d = self.updates.len();
        self.capacitance = (d > 0).then(|| {
            Mat::from_fn(d, d, |i, j| {
                let delta: f64 = self.updates[i].1.iter().map(|&(c, v)| v * self.columns[j][c]).sum();
                delta + if i == j { 1.0 } else { 0.0 }
            })
            .partial_piv_lu()
        });
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        use faer::linalg::solvers::Solve;
        let mut x = self.base.solve(b)?;
        if let Some(cap) = &self.capacitance {
            let d = self.updates.len();
            let rhs = Mat::from_fn(d, 1, |i, _| self.updates[i].1.iter().map(|&(c, v)| v * x[c]).sum());
            let s = cap.solve(rhs);
            for (j, col) in self.columns.iter().enumerate() {
                let sj = s[(j, 0)];
                for (xi, ci) in x.iter_mut().zip(col) {
                    *xi -= sj * ci;
                }
            }
            if !x.iter().all(|v| v.is_finite()) {
                return Err(Error::SingularSystem);
            }
        }
        Ok(x)
    }
}

/// Factorizes and solves in one go.
pub fn solve(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let mut s = SparseSolver::new();
    s.factor(a)?;
    s.solve(b)
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut t = TripletBuilder::new(2, 3);
        t.push(1, 2, 1.0);
        t.push(0, 0, 2.0);
        t.push(1, 2, 0.5);
        let a = t.into_csr();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.mul_vec(&[1.0, 1.0, 2.0]), vec![2.0, 3.0]);
        assert_eq!(a.mul_transpose_vec(&[1.0, 2.0]), vec![2.0, 0.0, 3.0]);
    }

    #[test]
    fn solves_small_system() {
        let mut t = TripletBuilder::new(3, 3);
        for (r, c, v) in [(0, 0, 4.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 3.0), (2, 2, 2.0), (2, 0, -1.0)] {
            t.push(r, c, v);
        }
        let a = t.into_csr();
        let x = [1.0, -2.0, 0.5];
        let b = a.mul_vec(&x);
        let mut s = SparseSolver::new();
        s.factor(&a).unwrap();
        let y = s.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
        // refactor with the same pattern reuses the symbolic analysis
        s.factor(&a).unwrap();
        assert!(s.solve(&b).is_ok());
    }

    #[test]
    fn replaced_rows_match_direct_solve() {
        let n = 6;
        let mut t = TripletBuilder::new(n, n);
        let mut u = TripletBuilder::new(n, n);
        let new_rows = [(1, vec![(0, 1.0), (3, 2.0), (5, -1.0)]), (4, vec![(2, 0.5), (4, 3.0), (1, 1.0)])];
        for i in 0..n {
            for (j, v) in [(i, 4.0), ((i + 1) % n, -1.0), ((i + n - 1) % n, -1.5)] {
                t.push(i, j, v);
                if !new_rows.iter().any(|(r, _)| *r == i) {
                    u.push(i, j, v);
                }
            }
        }
        for (r, row) in &new_rows {
            for &(c, v) in row {
                u.push(*r, c, v);
            }
        }
        let (a, modified) = (t.into_csr(), u.into_csr());
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut s = RowUpdateSolver::new();
        s.factor(&a, &new_rows).unwrap();
        let x = s.solve(&b).unwrap();
        let y = solve(&modified, &b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 1, 1.0);
        t.push(1, 0, 1.0);
        t.push(1, 1, 1.0);
        assert!(solve(&t.into_csr(), &[1.0, 2.0]).is_err());
    }
}
