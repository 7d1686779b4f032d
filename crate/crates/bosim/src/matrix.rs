//! Dense complex matrices in row-major order, plus the JSON file format
//! shared by every command that reads or writes a transfer matrix.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense complex-valued matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must have at least one row and column");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Build from row-major data; length must equal rows * cols.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch(format!(
                "expected {} entries for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::LengthMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// Entrywise squared modulus, |a_ij|^2, as a real-valued complex matrix.
    pub fn abs_sq(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex64::new(z.norm_sqr(), 0.0)).collect(),
        }
    }

    /// max_ij |a_ij - b_ij|
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ||U^dag U - I||_max
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.dagger().matmul(self).expect("square product");
        prod.max_abs_diff(&Self::identity(self.cols))
    }
}

/// On-disk form: { "rows": int, "cols": int, "re": [...], "im": [...] }, row-major.
#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

pub fn write_matrix(path: &Path, m: &ComplexMatrix) -> Result<()> {
    let file = MatrixFile {
        rows: m.rows(),
        cols: m.cols(),
        re: m.entries().iter().map(|z| z.re).collect(),
        im: m.entries().iter().map(|z| z.im).collect(),
    };
    let json = serde_json::to_string(&file)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text)?;
    let n = file.rows * file.cols;
    if file.re.len() != n || file.im.len() != n {
        return Err(Error::LengthMismatch(format!(
            "matrix file declares {}x{} but carries {} re / {} im entries",
            file.rows,
            file.cols,
            file.re.len(),
            file.im.len()
        )));
    }
    let data: Vec<Complex64> = file
        .re
        .iter()
        .zip(&file.im)
        .map(|(&re, &im)| Complex64::new(re, im))
        .collect();
    let m = ComplexMatrix::from_vec(file.rows, file.cols, data)?;
    if !m.all_finite() {
        return Err(Error::NonFinite);
    }
    Ok(m)
}
