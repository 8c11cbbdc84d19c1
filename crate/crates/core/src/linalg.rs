//! Dense complex matrices sized for the per-subcarrier problems here
//! (U×U Gram matrices, N×U channels). Row-major storage.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{pairwise_sum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} elements cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector from a slice.
    pub fn column(v: &[Complex<T>]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex<T>] {
        let c = self.cols;
        &mut self.data[i * c..(i + 1) * c]
    }

    pub fn col(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a.is_zero() {
                    continue;
                }
                let src = rhs.row(l);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᴴ · self`, the Gram matrix of the columns.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ci = row[i].conj();
                for j in i..n {
                    g[(i, j)] = g[(i, j)] + ci * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[(i, j)] = g[(j, i)].conj();
            }
        }
        g
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        let sq: Vec<T> = self.data.iter().map(|z| z.norm_sqr()).collect();
        pairwise_sum(&sq).sqrt()
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.shape(), rhs.shape())));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        let data = self.data.iter().map(|z| z * s).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Adds `s` to every diagonal entry.
    pub fn add_diagonal(&mut self, s: T) {
        for i in 0..self.rows.min(self.cols) {
            self[(i, i)].re = self[(i, i)].re + s;
        }
    }

    /// New matrix made of the listed rows, in the listed order.
    pub fn select_rows(&self, idx: &[usize]) -> Result<Self> {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            if i >= self.rows {
                return Err(Error::Domain(format!("row {i} out of range 0..{}", self.rows)));
            }
            data.extend_from_slice(self.row(i));
        }
        Ok(Self { rows: idx.len(), cols: self.cols, data })
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// A pivot smaller than `n·ε·max|a_ij|` is reported as singular.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::Shape(format!("cannot invert {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let scale = self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max);
        if n == 0 {
            return Ok(Self::zeros(0, 0));
        }
        let tol = T::lit(n as f64) * T::epsilon() * scale;
        if !(scale > T::zero()) {
            return Err(Error::Singular("zero matrix".into()));
        }
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(mag > tol) {
                return Err(Error::Singular(format!(
                    "pivot {mag:e} in column {col} below tolerance {tol:e}"
                )));
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * p;
                inv[(col, j)] = inv[(col, j)] * p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let av = a[(col, j)];
                    let iv = inv[(col, j)];
                    a[(r, j)] = a[(r, j)] - f * av;
                    inv[(r, j)] = inv[(r, j)] - f * iv;
                }
            }
        }
        Ok(inv)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.cols + j]
    }
}

/// Hermitian form `x · A · yᴴ` for row vectors `x`, `y`.
pub fn sesquilinear<T: Real>(x: &[Complex<T>], a: &CMatrix<T>, y: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::zero();
    for (i, xi) in x.iter().enumerate() {
        let row = a.row(i);
        let mut s = Complex::zero();
        for (aij, yj) in row.iter().zip(y) {
            s = s + aij * yj.conj();
        }
        acc = acc + xi * s;
    }
    acc
}

/// Row vector times matrix.
pub fn row_times<T: Real>(x: &[Complex<T>], a: &CMatrix<T>) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); a.cols()];
    for (i, xi) in x.iter().enumerate() {
        for (o, aij) in out.iter_mut().zip(a.row(i)) {
            *o = *o + xi * aij;
        }
    }
    out
}

pub fn norm_sqr<T: Real>(v: &[Complex<T>]) -> T {
    let sq: Vec<T> = v.iter().map(|z| z.norm_sqr()).collect();
    pairwise_sum(&sq)
}
