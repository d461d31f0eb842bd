//! Small dense complex matrices and the truncated SVD used for bond
//! truncation.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T> CMatrix<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex<T>> {
        self.data
    }

    /// Wraps a row-major buffer. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Self {
        assert_eq!(data.len(), rows * cols, "buffer length vs shape");
        Self { rows, cols, data }
    }

    /// Reinterprets the buffer with a new shape of equal size.
    pub fn reshape(self, rows: usize, cols: usize) -> Self {
        assert_eq!(rows * cols, self.data.len(), "reshape size");
        Self {
            rows,
            cols,
            data: self.data,
        }
    }
}

impl<T: Copy> CMatrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }
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

    /// Builds a matrix from nested rows of real/imaginary `f64` pairs.
    pub fn from_rows(rows: &[Vec<Complex<f64>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        Self::from_fn(r, c, |i, j| {
            let z = rows[i][j];
            Complex::new(T::lit(z.re), T::lit(z.im))
        })
    }

    pub fn diagonal(entries: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Self) -> Self {
        T::matmul(self, other)
    }

    pub(crate) fn matmul_naive(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d = *d + a * b;
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    pub fn scale(&mut self, factor: Complex<T>) {
        for z in &mut self.data {
            *z = *z * factor;
        }
    }

    pub fn frobenius_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry of `|M^† M - I|`; zero for an exact isometry.
    pub fn unitarity_deviation(&self) -> T {
        let g = self.adjoint().matmul_naive(self);
        let mut worst = T::zero();
        for i in 0..g.rows {
            for j in 0..g.cols {
                let target = if i == j { Complex::one() } else { Complex::zero() };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// Largest entry of `|self - other|`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Result of [`truncated_svd`].
#[derive(Clone, Debug)]
pub struct TruncatedSvd<T> {
    /// `rows x kept` with orthonormal columns.
    pub u: CMatrix<T>,
    /// Retained singular values, descending.
    pub singular_values: Vec<T>,
    /// `kept x cols` with orthonormal rows.
    pub vh: CMatrix<T>,
    /// Dropped weight over total weight, in `[0, 1]`.
    pub discarded_weight: T,
    /// Sum of all squared singular values before truncation.
    pub total_weight: T,
    /// Sum of retained squared singular values.
    pub kept_weight: T,
    /// Rank before truncation (number of singular values computed).
    pub full_rank: usize,
}

/// SVD keeping at most `cap` singular values, and only those whose squared
/// value exceeds `cutoff` times the total squared weight.
pub fn truncated_svd<T: Real>(m: &CMatrix<T>, cap: usize, cutoff: T) -> Result<TruncatedSvd<T>> {
    if cap == 0 {
        return Err(Error::InvalidSize("bond cap must be at least 1".into()));
    }
    if cutoff < T::zero() || !cutoff.is_finite() {
        return Err(Error::contract("singular-value cutoff must be finite and nonnegative"));
    }
    if !m.is_finite() {
        return Err(Error::contract("truncated_svd input has non-finite entries"));
    }
    if m.data().iter().all(|z| z.is_zero()) {
        return Err(Error::ZeroMatrix);
    }
    let f = T::thin_svd(m)?;
    let total: T = f.s.iter().map(|&x| x * x).sum();
    if total <= T::zero() {
        return Err(Error::ZeroMatrix);
    }
    let threshold = cutoff * total;
    let above = f.s.iter().take_while(|&&x| x * x > threshold).count().max(1);
    let keep = above.min(cap);
    let kept: T = f.s[..keep].iter().map(|&x| x * x).sum();
    let discarded = ((total - kept) / total).max(T::zero()).min(T::one());

    let u = CMatrix::from_fn(f.u.rows(), keep, |i, j| f.u[(i, j)]);
    let vh = CMatrix::from_fn(keep, f.vh.cols(), |i, j| f.vh[(i, j)]);
    Ok(TruncatedSvd {
        u,
        singular_values: f.s[..keep].to_vec(),
        vh,
        discarded_weight: discarded,
        total_weight: total,
        kept_weight: kept,
        full_rank: f.s.len(),
    })
}
