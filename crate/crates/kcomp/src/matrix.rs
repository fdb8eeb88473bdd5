//! Dense row-major matrices with the small set of operations the rest of the
//! crate needs: arithmetic, submatrix extraction, and LU-based determinants,
//! solves and inverses. Dimensions are desk-scale, so no blocking or
//! parallelism is attempted.

use crate::error::{Error, Result};

/// Dense matrix of `f64` entries stored row-major.
///
/// Every constructor checks that all entries are finite, so downstream code
/// can assume NaN/inf-free data.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from a row-major slice of entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite entry {bad} in matrix")));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("matrix must have at least one row"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("all rows must have the same length"));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix by evaluating `f(i, j)` at every (0-based) position.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    /// The zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Diagonal matrix with the given diagonal entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite diagonal entry {v}")));
            }
            m.data[i * n + i] = v;
        }
        if n == 0 {
            return Err(Error::domain("matrix dimensions must be positive"));
        }
        Ok(m)
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// True when the matrix is square.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Entry at 0-based position `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.data[i * self.cols + j]
    }

    /// Sets the entry at 0-based position `(i, j)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.data[i * self.cols + j] = v;
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Rows as nested vectors (handy for serialization).
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec())
            .collect()
    }

    /// Transposed copy.
    pub fn transpose(&self) -> DenseMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Entrywise sum; shapes must match.
    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    /// Entrywise difference; shapes must match.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &DenseMatrix, f: impl Fn(f64, f64) -> f64) -> Result<DenseMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::domain(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| c * v).collect(),
        }
    }

    /// Matrix product `self * other`.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(Error::domain(format!(
                "inner dimension mismatch: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.data[i * self.cols + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[l * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::domain(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(x)
                    .map(|(&a, &v)| a * v)
                    .sum()
            })
            .collect())
    }

    /// Sum of diagonal entries (square only).
    pub fn trace(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::domain("trace requires a square matrix"));
        }
        Ok((0..self.rows).map(|i| self.data[i * self.cols + i]).sum())
    }

    /// Largest absolute entry (0 for the zero matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }

    /// Copy of the submatrix with the given 0-based row and column indices,
    /// in the order supplied.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Result<DenseMatrix> {
        if row_idx.is_empty() || col_idx.is_empty() {
            return Err(Error::domain("submatrix index lists must be non-empty"));
        }
        if row_idx.iter().any(|&i| i >= self.rows) || col_idx.iter().any(|&j| j >= self.cols) {
            return Err(Error::domain("submatrix index out of range"));
        }
        let mut data = Vec::with_capacity(row_idx.len() * col_idx.len());
        for &i in row_idx {
            for &j in col_idx {
                data.push(self.data[i * self.cols + j]);
            }
        }
        Ok(DenseMatrix { rows: row_idx.len(), cols: col_idx.len(), data })
    }

    /// Determinant via LU with partial pivoting (square only).
    pub fn det(&self) -> Result<f64> {
        if !self.is_square() {
            return Err(Error::domain("determinant requires a square matrix"));
        }
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            // Pivot on the largest remaining entry in this column.
            let mut piv = col;
            let mut best = lu[col * n + col].abs();
            for r in col + 1..n {
                let v = lu[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Ok(0.0);
            }
            if piv != col {
                for j in 0..n {
                    lu.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = lu[col * n + col];
            det *= d;
            for r in col + 1..n {
                let factor = lu[r * n + col] / d;
                lu[r * n + col] = factor;
                for j in col + 1..n {
                    lu[r * n + j] -= factor * lu[col * n + j];
                }
            }
        }
        Ok(det)
    }

    /// Solves `self * X = rhs` for `X` via LU with partial pivoting.
    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::domain("solve requires a square matrix"));
        }
        if rhs.rows != self.rows {
            return Err(Error::domain("right-hand side has incompatible row count"));
        }
        let n = self.rows;
        let mut lu = self.data.clone();
        let mut x = rhs.data.clone();
        let m = rhs.cols;
        for col in 0..n {
            let mut piv = col;
            let mut best = lu[col * n + col].abs();
            for r in col + 1..n {
                let v = lu[r * n + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return Err(Error::domain("solve: matrix is singular"));
            }
            if piv != col {
                for j in 0..n {
                    lu.swap(col * n + j, piv * n + j);
                }
                for j in 0..m {
                    x.swap(col * m + j, piv * m + j);
                }
            }
            let d = lu[col * n + col];
            for r in col + 1..n {
                let factor = lu[r * n + col] / d;
                lu[r * n + col] = factor;
                for j in col + 1..n {
                    lu[r * n + j] -= factor * lu[col * n + j];
                }
                for j in 0..m {
                    x[r * m + j] -= factor * x[col * m + j];
                }
            }
        }
        // Back substitution.
        for col in (0..n).rev() {
            let d = lu[col * n + col];
            for j in 0..m {
                x[col * m + j] /= d;
            }
            for r in 0..col {
                let factor = lu[r * n + col];
                for j in 0..m {
                    x[r * m + j] -= factor * x[col * m + j];
                }
            }
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("solve produced non-finite entries"));
        }
        Ok(DenseMatrix { rows: n, cols: m, data: x })
    }

    /// Matrix inverse via [`DenseMatrix::solve`] against the identity.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        if !self.is_square() {
            return Err(Error::domain("inverse requires a square matrix"));
        }
        self.solve(&DenseMatrix::identity(self.rows))
    }
}

impl std::fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| format!("{:>12.6}", self.get(i, j))).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}
