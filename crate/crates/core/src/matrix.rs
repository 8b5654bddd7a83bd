//! Dense matrices over a [`Scalar`] backend.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{Backend, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch { expected: m, found: bad.len() });
        }
        Ok(Matrix { rows: n, cols: m, data: rows.into_iter().flatten().collect() })
    }

    pub fn diag(entries: &[S]) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, |i, j| if i == j { entries[i].clone() } else { S::zero() })
    }

    pub fn block_diag(blocks: &[Matrix<S>]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
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

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(S::conj)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: &S) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn mul(&self, other: &Matrix<S>) -> Self {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let acc = std::mem::replace(&mut out[(i, j)], S::zero());
                        out[(i, j)] = acc + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix<S>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }

    pub fn sub(&self, other: &Matrix<S>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|x| -x.clone())
    }

    pub fn mul_vec(&self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect())
    }

    /// `xᵀ · self · y` (bilinear, no conjugation).
    pub fn bilinear(&self, x: &[S], y: &[S]) -> Result<S> {
        let my = self.mul_vec(y)?;
        if x.len() != my.len() {
            return Err(Error::DimensionMismatch { expected: my.len(), found: x.len() });
        }
        Ok(dot(x, &my))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(S::abs_f64).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.to_c64().norm_sqr()).sum::<f64>().sqrt()
    }

    /// Exact zero on the exact backend; Frobenius norm at most `tol` on the float backend.
    pub fn is_zero_within(&self, tol: f64) -> bool {
        match S::BACKEND {
            Backend::Exact => self.data.iter().all(S::is_zero),
            Backend::Float => self.frobenius() <= tol,
        }
    }

    fn pivot_in_column(m: &Matrix<S>, col: usize, from: usize) -> Option<usize> {
        match S::BACKEND {
            Backend::Exact => (from..m.rows).find(|&r| !m[(r, col)].is_zero()),
            Backend::Float => (from..m.rows)
                .filter(|&r| !m[(r, col)].is_zero())
                .max_by(|&a, &b| m[(a, col)].abs_f64().total_cmp(&m[(b, col)].abs_f64())),
        }
    }

    pub fn determinant(&self) -> Result<S> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        let mut m = self.clone();
        let n = self.rows;
        let mut det = S::one();
        for c in 0..n {
            let Some(p) = Self::pivot_in_column(&m, c, c) else {
                return Ok(S::zero());
            };
            if p != c {
                m.swap_rows(p, c);
                det = -det;
            }
            let piv = m[(c, c)].clone();
            det = det * piv.clone();
            for r in c + 1..n {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone() / piv.clone();
                for k in c..n {
                    let v = m[(c, k)].clone();
                    m[(r, k)].sub_mul_assign(&f, &v);
                }
            }
        }
        Ok(det)
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = Self::identity(n);
        for c in 0..n {
            let p = Self::pivot_in_column(&m, c, c)?;
            if S::BACKEND == Backend::Float && m[(p, c)].abs_f64() < 1e-300 {
                return None;
            }
            m.swap_rows(p, c);
            inv.swap_rows(p, c);
            let piv = m[(c, c)].clone();
            for k in 0..n {
                m[(c, k)] = m[(c, k)].clone() / piv.clone();
                inv[(c, k)] = inv[(c, k)].clone() / piv.clone();
            }
            for r in 0..n {
                if r == c || m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone();
                for k in 0..n {
                    let a = m[(c, k)].clone();
                    let b = inv[(c, k)].clone();
                    m[(r, k)].sub_mul_assign(&f, &a);
                    inv[(r, k)].sub_mul_assign(&f, &b);
                }
            }
        }
        Some(inv)
    }

    /// Rank by elimination. Float entries with modulus at most `tol` count as zero.
    pub fn rank(&self, tol: f64) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = Self::pivot_in_column(&m, c, rank) else { continue };
            if m[(p, c)].is_negligible(tol) {
                continue;
            }
            m.swap_rows(p, rank);
            let piv = m[(rank, c)].clone();
            for r in rank + 1..self.rows {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone() / piv.clone();
                for k in c..self.cols {
                    let v = m[(rank, k)].clone();
                    m[(r, k)].sub_mul_assign(&f, &v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self · x = b` for square invertible `self`.
    pub fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        let inv = self.inverse()?;
        inv.mul_vec(b).ok()
    }

    /// Hermitian positive-definiteness by LDLᴴ elimination: every pivot must
    /// be real and positive.
    pub fn is_hermitian_positive_definite(&self, tol: f64) -> bool {
        if !self.is_square() || !self.sub(&self.adjoint()).is_zero_within(tol) {
            return false;
        }
        let n = self.rows;
        let mut m = self.clone();
        for c in 0..n {
            let piv = m[(c, c)].clone();
            if !piv.is_positive_real() {
                return false;
            }
            for r in c + 1..n {
                if m[(r, c)].is_zero() {
                    continue;
                }
                let f = m[(r, c)].clone() / piv.clone();
                for k in c..n {
                    let v = m[(c, k)].clone();
                    m[(r, k)].sub_mul_assign(&f, &v);
                }
            }
        }
        true
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for k in 0..self.cols {
            self.data.swap(a * self.cols + k, b * self.cols + k);
        }
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    x.iter().zip(y).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

pub fn vec_add<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(a, b)| a.clone() + b.clone()).collect()
}

pub fn vec_sub<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(a, b)| a.clone() - b.clone()).collect()
}

pub fn vec_scale<S: Scalar>(c: &S, x: &[S]) -> Vec<S> {
    x.iter().map(|a| c.clone() * a.clone()).collect()
}

pub fn vec_neg<S: Scalar>(x: &[S]) -> Vec<S> {
    x.iter().map(|a| -a.clone()).collect()
}

pub fn vec_conj<S: Scalar>(x: &[S]) -> Vec<S> {
    x.iter().map(S::conj).collect()
}

pub fn vec_max_abs<S: Scalar>(x: &[S]) -> f64 {
    x.iter().map(S::abs_f64).fold(0.0, f64::max)
}
