//! Scalar abstraction for the tensor kernels.
//!
//! All state-vector and tensor code is written against [`Real`], a
//! `num-traits` float with a handful of dense complex kernels attached
//! (matrix product, thin SVD, thin QR). The kernels are backed by `faer`
//! for `f32` and `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use faer::Mat;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Thin SVD factors `a = u * diag(s) * vh`, singular values descending.
pub struct SvdFactors<T> {
    pub u: CMatrix<T>,
    pub s: Vec<T>,
    pub vh: CMatrix<T>,
}

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Sum
    + 'static
{
    /// Tolerance used for unitarity and isometry checks.
    const CHECK_TOL: f64;

    fn matmul(a: &CMatrix<Self>, b: &CMatrix<Self>) -> CMatrix<Self>;

    fn thin_svd(a: &CMatrix<Self>) -> Result<SvdFactors<Self>>;

    /// Thin QR with the diagonal of `r` made real and nonnegative, so an
    /// input with orthonormal columns comes back as `(a, I)`.
    fn thin_qr(a: &CMatrix<Self>) -> (CMatrix<Self>, CMatrix<Self>);

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

fn to_faer<T: Copy>(a: &CMatrix<T>) -> Mat<Complex<T>>
where
    Complex<T>: faer::traits::ComplexField,
{
    Mat::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)])
}

macro_rules! faer_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            const CHECK_TOL: f64 = $tol;

            fn matmul(a: &CMatrix<Self>, b: &CMatrix<Self>) -> CMatrix<Self> {
                assert_eq!(a.cols(), b.rows(), "matmul inner dimension");
                if a.rows() * a.cols() * b.cols() <= 512 {
                    return a.matmul_naive(b);
                }
                let c = to_faer(a) * to_faer(b);
                CMatrix::from_fn(c.nrows(), c.ncols(), |i, j| c[(i, j)])
            }

            fn thin_svd(a: &CMatrix<Self>) -> Result<SvdFactors<Self>> {
                let m = to_faer(a);
                let svd = m
                    .thin_svd()
                    .map_err(|e| Error::Kernel(format!("svd: {e:?}")))?;
                let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
                let k = s.nrows();
                let mut order: Vec<usize> = (0..k).collect();
                order.sort_by(|&x, &y| s[y].re.partial_cmp(&s[x].re).unwrap_or(std::cmp::Ordering::Equal));
                let sv = order.iter().map(|&i| s[i].re.max(0.0)).collect();
                let u = CMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
                let vh = CMatrix::from_fn(k, v.nrows(), |i, j| v[(j, order[i])].conj());
                Ok(SvdFactors { u, s: sv, vh })
            }

            fn thin_qr(a: &CMatrix<Self>) -> (CMatrix<Self>, CMatrix<Self>) {
                let m = to_faer(a);
                let qr = m.qr();
                let q = qr.compute_thin_Q();
                let r = qr.thin_R();
                let k = q.ncols();
                let mut q = CMatrix::from_fn(q.nrows(), k, |i, j| q[(i, j)]);
                let mut r = CMatrix::from_fn(k, r.ncols(), |i, j| r[(i, j)]);
                for d in 0..k {
                    let diag = r[(d, d)];
                    let mag = diag.norm();
                    if mag > 0.0 {
                        let phase = diag / mag;
                        for i in 0..q.rows() {
                            q[(i, d)] = q[(i, d)] * phase;
                        }
                        let conj = phase.conj();
                        for j in 0..r.cols() {
                            r[(d, j)] = r[(d, j)] * conj;
                        }
                    }
                }
                (q, r)
            }
        }
    };
}

faer_real!(f64, 1e-10);
faer_real!(f32, 1e-4);
