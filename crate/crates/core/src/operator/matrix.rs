use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Which factor of a bipartite space `A ⊗ B` to keep in a partial trace.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dense row-major complex matrix.
///
/// Entries are guaranteed finite; every constructor that accepts external
/// data checks this.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for k in 0..dim {
            m[(k, k)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::BadDimension(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimMismatch("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.iter().flatten().copied().collect())
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (k, &v) in values.iter().enumerate() {
            m[(k, k)] = v;
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        Self { rows: 2, cols: 2, data: vec![z, -i, i, z] }
    }

    pub fn pauli_z() -> Self {
        Self::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NonSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for j in 0..self.rows {
            for k in 0..self.cols {
                out[(k, j)] = self[(j, k)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> Result<C64> {
        let d = self.square_dim()?;
        Ok((0..d).map(|k| self[(k, k)]).sum())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(j, l)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let rhs_row = &rhs.data[l * rhs.cols..(l + 1) * rhs.cols];
                let out_row = &mut out.data[j * rhs.cols..(j + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `Tr(self · rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &Self) -> Result<C64> {
        if self.cols != rhs.rows || self.rows != rhs.cols {
            return Err(Error::DimMismatch(format!(
                "trace of {}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.rows {
            for l in 0..self.cols {
                acc += self[(j, l)] * rhs[(l, j)];
            }
        }
        Ok(acc)
    }

    fn zip_with(&self, rhs: &Self, op: &str, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimMismatch(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.zip_with(rhs, "subtract", |a, b| a - b)
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// Kronecker product with `self` as the left (major) factor.
    pub fn kron(&self, rhs: &Self) -> Self {
        let rows = self.rows * rhs.rows;
        let cols = self.cols * rhs.cols;
        let mut out = Self::zeros(rows, cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                let s = self[(a, b)];
                for c in 0..rhs.rows {
                    for d in 0..rhs.cols {
                        out[(a * rhs.rows + c, b * rhs.cols + d)] = s * rhs[(c, d)];
                    }
                }
            }
        }
        out
    }

    /// Reduced matrix on `keep` of a square matrix on `A ⊗ B`, with `A` the
    /// major index.
    pub fn partial_trace(&self, dim_a: usize, dim_b: usize, keep: Subsystem) -> Result<Self> {
        let d = self.square_dim()?;
        if dim_a == 0 || dim_b == 0 || dim_a * dim_b != d {
            return Err(Error::DimMismatch(format!("{d}x{d} matrix does not factor as {dim_a} x {dim_b}")));
        }
        let out = match keep {
            Subsystem::B => {
                let mut out = Self::zeros(dim_b, dim_b);
                for b1 in 0..dim_b {
                    for b2 in 0..dim_b {
                        out[(b1, b2)] = (0..dim_a).map(|a| self[(a * dim_b + b1, a * dim_b + b2)]).sum();
                    }
                }
                out
            }
            Subsystem::A => {
                let mut out = Self::zeros(dim_a, dim_a);
                for a1 in 0..dim_a {
                    for a2 in 0..dim_a {
                        out[(a1, a2)] = (0..dim_b).map(|b| self[(a1 * dim_b + b, a2 * dim_b + b)]).sum();
                    }
                }
                out
            }
        };
        Ok(out)
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - rhs|` entrywise; infinite when shapes differ.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        match self.sub(rhs) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// `max |M[j,k] - conj(M[k,j])|`; infinite for non-square input.
    pub fn hermitian_residue(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for j in 0..self.rows {
            for k in j..self.cols {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Result<Self> {
        self.square_dim()?;
        Ok(self.add(&self.adjoint())?.scale_real(0.5))
    }

    /// Hilbert-Schmidt inner product `Tr(self† rhs)`.
    pub fn hs_inner(&self, rhs: &Self) -> Result<C64> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimMismatch("Hilbert-Schmidt inner product".into()));
        }
        Ok(self.data.iter().zip(&rhs.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|j| self.data[j * self.cols..(j + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                if c > 0 {
                    write!(f, ", ")?;
                }
                if z.im.abs() < 1e-12 {
                    write!(f, "{:+.6}", z.re)?;
                } else {
                    write!(f, "{:+.6}{:+.6}i", z.re, z.im)?;
                }
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
