//! Matrix-product states for qubit chains.
//!
//! A state is a chain of rank-3 site tensors `A[l, s, r]` (left bond,
//! physical index, right bond) in mixed-canonical form: sites left of the
//! orthogonality center are left-normalized, sites right of it are
//! right-normalized, and the center tensor itself always has unit Frobenius
//! norm. The overall amplitude is tracked separately as `ln |norm|`, so the
//! norm of heavily truncated non-normalized states does not underflow.
//!
//! Sites are indexed from 0. Bond `k` sits between sites `k` and `k + 1`.

mod gates;
mod measure;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, CMatrix};
use crate::scalar::Real;

pub use measure::ZERO_PROBABILITY_THRESHOLD;

/// Default relative singular-value cutoff applied on top of the bond cap.
pub const DEFAULT_CUTOFF: f64 = 1e-12;

/// Whether truncation loss is folded back into the state norm.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMode {
    /// Retained Schmidt weights are rescaled to the pre-truncation norm.
    Normalized,
    /// Retained Schmidt weights are kept as they are; the norm shrinks.
    #[default]
    NonNormalized,
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Normalized => "normalized",
            NormMode::NonNormalized => "non-normalized",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normalized" => Ok(NormMode::Normalized),
            "non-normalized" | "nonnormalized" => Ok(NormMode::NonNormalized),
            other => Err(Error::schema("mode", format!("unknown normalization mode {other:?}"))),
        }
    }
}

/// One bond-truncation event produced by a two-qubit gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationReport {
    pub gate_index: usize,
    pub bond_index: usize,
    pub kept_rank: usize,
    /// Dropped squared Schmidt weight over total squared weight.
    pub discarded_weight: f64,
}

/// Rank-3 tensor `A[l, s, r]` stored row-major with the physical index in
/// the middle.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteTensor<T> {
    left: usize,
    right: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> SiteTensor<T> {
    pub fn new(left: usize, right: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::InvalidSize("bond dimensions must be positive".into()));
        }
        if data.len() != left * 2 * right {
            return Err(Error::Dimension {
                expected: left * 2 * right,
                got: data.len(),
            });
        }
        Ok(Self { left, right, data })
    }

    /// Bond-dimension-1 tensor holding a single-qubit amplitude pair.
    pub fn product(amp0: Complex<T>, amp1: Complex<T>) -> Self {
        Self {
            left: 1,
            right: 1,
            data: vec![amp0, amp1],
        }
    }

    pub fn left_dim(&self) -> usize {
        self.left
    }

    pub fn right_dim(&self) -> usize {
        self.right
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn get(&self, l: usize, s: usize, r: usize) -> Complex<T> {
        self.data[(l * 2 + s) * self.right + r]
    }

    /// Rows `(l, s)`, columns `r`.
    pub(crate) fn left_matrix(&self) -> CMatrix<T> {
        CMatrix::from_vec(2 * self.left, self.right, self.data.clone())
    }

    /// Rows `l`, columns `(s, r)`.
    pub(crate) fn right_matrix(&self) -> CMatrix<T> {
        CMatrix::from_vec(self.left, 2 * self.right, self.data.clone())
    }

    pub(crate) fn from_left_matrix(m: CMatrix<T>) -> Self {
        let (rows, right) = (m.rows(), m.cols());
        debug_assert_eq!(rows % 2, 0);
        Self {
            left: rows / 2,
            right,
            data: m.into_data(),
        }
    }

    pub(crate) fn from_right_matrix(m: CMatrix<T>) -> Self {
        let (left, cols) = (m.rows(), m.cols());
        debug_assert_eq!(cols % 2, 0);
        Self {
            left,
            right: cols / 2,
            data: m.into_data(),
        }
    }

    pub(crate) fn frobenius_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn scale(&mut self, factor: Complex<T>) {
        for z in &mut self.data {
            *z = *z * factor;
        }
    }

    /// Max-entry deviation of `sum_s A^s (A^s)^dagger` from the identity.
    pub fn right_normalization_error(&self) -> T {
        self.right_matrix().adjoint().unitarity_deviation()
    }

    /// Max-entry deviation of `sum_s (A^s)^dagger A^s` from the identity.
    pub fn left_normalization_error(&self) -> T {
        self.left_matrix().unitarity_deviation()
    }

    /// The same tensor read right-to-left (bond indices exchanged).
    fn mirrored(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.right {
            for s in 0..2 {
                for l in 0..self.left {
                    data.push(self.get(l, s, r));
                }
            }
        }
        Self {
            left: self.right,
            right: self.left,
            data,
        }
    }
}

/// Matrix-product state of an `n`-qubit register.
#[derive(Clone, Debug)]
pub struct MpsState<T> {
    sites: Vec<SiteTensor<T>>,
    center: usize,
    log_norm: T,
    bond_cap: usize,
    cutoff: T,
    mode: NormMode,
    cum_discarded: T,
    gates_applied: usize,
}

impl<T: Real> MpsState<T> {
    fn from_parts(sites: Vec<SiteTensor<T>>, center: usize, log_norm: T) -> Self {
        Self {
            sites,
            center,
            log_norm,
            bond_cap: usize::MAX,
            cutoff: T::lit(DEFAULT_CUTOFF),
            mode: NormMode::default(),
            cum_discarded: T::zero(),
            gates_applied: 0,
        }
    }

    /// `|+>^n`, with every bond of dimension 1.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("qubit count must be at least 1".into()));
        }
        let h = Complex::new(T::FRAC_1_SQRT_2(), T::zero());
        Ok(Self::from_parts(vec![SiteTensor::product(h, h); n], 0, T::zero()))
    }

    pub fn basis_state(bits: &Bitstring) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidSize("qubit count must be at least 1".into()));
        }
        let sites = bits
            .bits()
            .iter()
            .map(|&b| {
                if b == 0 {
                    SiteTensor::product(Complex::one(), Complex::zero())
                } else {
                    SiteTensor::product(Complex::zero(), Complex::one())
                }
            })
            .collect();
        Ok(Self::from_parts(sites, 0, T::zero()))
    }

    /// Product state from per-qubit amplitude pairs (need not be normalized).
    pub fn product_state(amplitudes: &[[Complex<T>; 2]]) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidSize("qubit count must be at least 1".into()));
        }
        let mut log_norm = T::zero();
        let mut sites = Vec::with_capacity(amplitudes.len());
        for [a, b] in amplitudes {
            let nrm = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if nrm <= T::zero() {
                return Err(Error::DegenerateState("zero single-qubit factor"));
            }
            log_norm = log_norm + nrm.ln();
            let inv = Complex::new(nrm.recip(), T::zero());
            sites.push(SiteTensor::product(*a * inv, *b * inv));
        }
        Ok(Self::from_parts(sites, 0, log_norm))
    }

    /// Exact MPS of a dense big-endian amplitude vector of length `2^n`.
    pub fn from_statevector(amplitudes: &[Complex<T>]) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!("statevector length {len} is not 2^n with n >= 1")));
        }
        let n = len.trailing_zeros() as usize;
        let total: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if total <= T::zero() {
            return Err(Error::DegenerateState("zero statevector"));
        }
        let mut sites = Vec::with_capacity(n);
        let mut rest = CMatrix::from_vec(1, len, amplitudes.to_vec());
        for _ in 0..n - 1 {
            let left = rest.rows();
            let cols = rest.cols() / 2;
            let m = rest.reshape(left * 2, cols);
            let svd = truncated_svd(&m, usize::MAX, T::zero())?;
            let s: Vec<Complex<T>> = svd.singular_values.iter().map(|&x| Complex::new(x, T::zero())).collect();
            sites.push(SiteTensor::from_left_matrix(svd.u));
            rest = CMatrix::diagonal(&s).matmul(&svd.vh);
        }
        let left = rest.rows();
        sites.push(SiteTensor::from_left_matrix(rest.reshape(left * 2, 1)));
        let mut state = Self::from_parts(sites, n - 1, T::zero());
        state.normalize_center();
        state.move_center(0);
        Ok(state)
    }

    /// Arbitrary chain of site tensors; the result is brought to canonical
    /// form with the center on site 0.
    pub fn from_sites(sites: Vec<SiteTensor<T>>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidSize("qubit count must be at least 1".into()));
        }
        if sites[0].left != 1 || sites[sites.len() - 1].right != 1 {
            return Err(Error::InvalidSize("outer bonds must have dimension 1".into()));
        }
        for (k, w) in sites.windows(2).enumerate() {
            if w[0].right != w[1].left {
                return Err(Error::InvalidSize(format!(
                    "bond {k}: left tensor has {} columns, right tensor has {} rows",
                    w[0].right, w[1].left
                )));
            }
        }
        let mut state = Self::from_parts(sites, 0, T::zero());
        state.canonicalize(0);
        if !state.log_norm.is_finite() {
            return Err(Error::DegenerateState("zero state"));
        }
        Ok(state)
    }

    /// Normalized random state with bond dimensions
    /// `min(max_bond, 2^k, 2^(n-k))`.
    pub fn random<R: Rng + ?Sized>(n: usize, max_bond: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || max_bond == 0 {
            return Err(Error::InvalidSize("qubit count and bond must be positive".into()));
        }
        let bond = |k: usize| -> usize {
            // bond k sits after site k-1; outer bonds are 1
            if k == 0 || k == n {
                1
            } else {
                let cap = |e: usize| if e >= 63 { usize::MAX } else { 1usize << e };
                max_bond.min(cap(k)).min(cap(n - k))
            }
        };
        let sites = (0..n)
            .map(|k| {
                let (l, r) = (bond(k), bond(k + 1));
                let data = (0..l * 2 * r)
                    .map(|_| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
                    .collect();
                SiteTensor { left: l, right: r, data }
            })
            .collect();
        let mut state = Self::from_sites(sites)?;
        state.log_norm = T::zero();
        Ok(state)
    }

    pub fn with_bond_cap(mut self, cap: usize) -> Self {
        self.bond_cap = cap;
        self
    }

    pub fn with_cutoff(mut self, cutoff: T) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_mode(mut self, mode: NormMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn set_bond_cap(&mut self, cap: usize) {
        self.bond_cap = cap;
    }

    pub fn n(&self) -> usize {
        self.sites.len()
    }

    pub fn sites(&self) -> &[SiteTensor<T>] {
        &self.sites
    }

    pub fn site(&self, k: usize) -> &SiteTensor<T> {
        &self.sites[k]
    }

    /// `d_1 .. d_{n-1}`; empty for a single qubit.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.n() - 1].iter().map(|s| s.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn center(&self) -> usize {
        self.center
    }

    pub fn bond_cap(&self) -> usize {
        self.bond_cap
    }

    pub fn cutoff(&self) -> T {
        self.cutoff
    }

    pub fn mode(&self) -> NormMode {
        self.mode
    }

    pub fn cum_discarded(&self) -> T {
        self.cum_discarded
    }

    pub fn gates_applied(&self) -> usize {
        self.gates_applied
    }

    /// Natural log of the state norm.
    pub fn log_norm(&self) -> T {
        self.log_norm
    }

    pub fn norm(&self) -> T {
        self.log_norm.exp()
    }

    pub fn norm_sqr(&self) -> T {
        (self.log_norm + self.log_norm).exp()
    }

    /// Amplitude factor carried at the orthogonality center.
    pub fn norm_scalar(&self) -> Complex<T> {
        Complex::new(self.norm(), T::zero())
    }

    /// Multiplies the state by `factor`.
    pub fn scale(&mut self, factor: Complex<T>) -> Result<()> {
        let mag = factor.norm();
        if mag <= T::zero() || !mag.is_finite() {
            return Err(Error::DegenerateState("scaling by zero or non-finite factor"));
        }
        self.log_norm = self.log_norm + mag.ln();
        let phase = factor / mag;
        self.sites[self.center].scale(phase);
        Ok(())
    }

    /// Sets the norm to 1 without touching the tensors.
    pub fn normalize(&mut self) {
        self.log_norm = T::zero();
    }

    /// Folds the center tensor's norm into `log_norm` so the center has unit
    /// norm again.
    fn normalize_center(&mut self) {
        let w = self.sites[self.center].frobenius_sqr();
        if w > T::zero() {
            let nrm = w.sqrt();
            self.sites[self.center].scale(Complex::new(nrm.recip(), T::zero()));
            self.log_norm = self.log_norm + nrm.ln();
        } else {
            self.log_norm = T::neg_infinity();
        }
    }

    fn shift_center_right(&mut self) {
        let k = self.center;
        let (q, r) = T::thin_qr(&self.sites[k].left_matrix());
        let next = r.matmul(&self.sites[k + 1].right_matrix());
        self.sites[k] = SiteTensor::from_left_matrix(q);
        self.sites[k + 1] = SiteTensor::from_right_matrix(next);
        self.center = k + 1;
    }

    fn shift_center_left(&mut self) {
        let k = self.center;
        let (q, r) = T::thin_qr(&self.sites[k].right_matrix().adjoint());
        let prev = self.sites[k - 1].left_matrix().matmul(&r.adjoint());
        self.sites[k] = SiteTensor::from_right_matrix(q.adjoint());
        self.sites[k - 1] = SiteTensor::from_left_matrix(prev);
        self.center = k - 1;
    }

    /// Moves the orthogonality center, assuming the state is already in
    /// mixed-canonical form.
    pub fn move_center(&mut self, target: usize) {
        assert!(target < self.n(), "center target out of range");
        while self.center < target {
            self.shift_center_right();
        }
        while self.center > target {
            self.shift_center_left();
        }
    }

    /// Brings an arbitrary chain into mixed-canonical form around `center`;
    /// the global amplitude ends up in `log_norm` and the center phase.
    pub fn canonicalize(&mut self, center: usize) {
        assert!(center < self.n(), "center out of range");
        let n = self.n();
        self.center = 0;
        while self.center < center {
            self.shift_center_right();
        }
        self.center = n - 1;
        while self.center > center {
            self.shift_center_left();
        }
        self.normalize_center();
    }

    /// Largest isometry deviation over all off-center sites.
    pub fn canonical_error(&self) -> T {
        self.sites
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != self.center)
            .map(|(k, s)| {
                if k < self.center {
                    s.left_normalization_error()
                } else {
                    s.right_normalization_error()
                }
            })
            .fold(T::zero(), T::max)
    }

    /// Relabels qubit `k` as `n - 1 - k` without applying any gate.
    pub fn reverse(&mut self) {
        let n = self.n();
        self.sites = self.sites.iter().rev().map(SiteTensor::mirrored).collect();
        self.center = n - 1 - self.center;
    }
}
