use num_complex::Complex;
use num_traits::{One, Zero};

use super::{MpsState, NormMode, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::problems::IsingModel;
use crate::scalar::Real;

/// Projections with a smaller outcome probability are rejected.
pub const ZERO_PROBABILITY_THRESHOLD: f64 = 1e-14;

/// Largest register converted to a dense vector.
pub const STATEVECTOR_LIMIT: usize = 20;

/// `E' = sum_s (bra^s)^dagger E ket^s`, optionally weighting each physical
/// index by a diagonal operator entry.
fn transfer<T: Real>(
    env: &CMatrix<T>,
    bra: &SiteTensor<T>,
    ket: &SiteTensor<T>,
    diag: Option<[T; 2]>,
) -> CMatrix<T> {
    let f = weighted(env, ket, diag);
    bra.left_matrix().adjoint().matmul(&f)
}

/// `E ket` reshaped to rows `(l_bra, s)`, with the diagonal weight applied.
fn weighted<T: Real>(env: &CMatrix<T>, ket: &SiteTensor<T>, diag: Option<[T; 2]>) -> CMatrix<T> {
    let rows = env.rows();
    let mut f = env.matmul(&ket.right_matrix()).reshape(2 * rows, ket.right);
    if let Some(d) = diag {
        for i in 0..f.rows() {
            let w = d[i % 2];
            if w != T::one() {
                for j in 0..f.cols() {
                    f[(i, j)] = f[(i, j)] * w;
                }
            }
        }
    }
    f
}

/// `Tr(bra^dagger F)` without forming the product.
fn closing_trace<T: Real>(bra: &SiteTensor<T>, f: &CMatrix<T>) -> Complex<T> {
    bra.data
        .iter()
        .zip(f.data())
        .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
}

const Z_DIAG: [f64; 2] = [1.0, -1.0];

fn z_diag<T: Real>() -> [T; 2] {
    [T::lit(Z_DIAG[0]), T::lit(Z_DIAG[1])]
}

impl<T: Real> MpsState<T> {
    fn check_same_size(&self, other: &Self) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: other.n(),
            });
        }
        Ok(())
    }

    /// Copy with the orthogonality center on site 0.
    fn left_centered(&self) -> Self {
        let mut s = self.clone();
        s.move_center(0);
        s
    }

    /// Dense big-endian amplitudes including the norm scalar.
    pub fn to_statevector(&self) -> Result<Vec<Complex<T>>> {
        let n = self.n();
        if n > STATEVECTOR_LIMIT {
            return Err(Error::SizeLimit {
                what: "qubits for dense conversion",
                got: n,
                limit: STATEVECTOR_LIMIT,
            });
        }
        let mut acc = CMatrix::from_vec(1, 1, vec![Complex::one()]);
        for site in &self.sites {
            let rows = acc.rows();
            acc = acc.matmul(&site.right_matrix()).reshape(rows * 2, site.right);
        }
        let scale = Complex::new(self.norm(), T::zero());
        Ok(acc.into_data().into_iter().map(|z| z * scale).collect())
    }

    /// `<self|other>` of the tensor chains alone, without norm scalars.
    fn raw_inner(&self, other: &Self) -> Complex<T> {
        let mut env = CMatrix::from_vec(1, 1, vec![Complex::one()]);
        for (a, b) in self.sites.iter().zip(&other.sites) {
            env = transfer(&env, a, b, None);
        }
        env[(0, 0)]
    }

    /// `<self|other>` including both norm scalars.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same_size(other)?;
        let scale = (self.log_norm + other.log_norm).exp();
        Ok(self.raw_inner(other) * scale)
    }

    /// `|<a|b>|^2 / (<a|a><b|b>)`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        self.check_same_size(other)?;
        if !self.log_norm.is_finite() || !other.log_norm.is_finite() {
            return Err(Error::DegenerateState("fidelity of a zero-norm state"));
        }
        let ab = self.raw_inner(other).norm_sqr();
        let aa = self.raw_inner(self).re;
        let bb = other.raw_inner(other).re;
        if aa <= T::zero() || bb <= T::zero() {
            return Err(Error::DegenerateState("fidelity of a zero-norm state"));
        }
        Ok((ab / (aa * bb)).min(T::one()))
    }

    /// Expectation of a product of diagonal single-site operators at
    /// strictly increasing sites, divided by `<psi|psi>`.
    fn diagonal_product(&self, ops: &[(usize, [T; 2])]) -> T {
        let s = self.left_centered();
        let norm = s.sites[0].frobenius_sqr();
        let Some(&(last, last_op)) = ops.last() else {
            return T::one();
        };
        let mut env = CMatrix::from_vec(1, 1, vec![Complex::one()]);
        let mut next = 0;
        for k in 0..last {
            let op = if next < ops.len() && ops[next].0 == k {
                next += 1;
                Some(ops[next - 1].1)
            } else {
                None
            };
            env = transfer(&env, &s.sites[k], &s.sites[k], op);
        }
        let f = weighted(&env, &s.sites[last], Some(last_op));
        closing_trace(&s.sites[last], &f).re / norm
    }

    /// `<Z_i>`, normalization-insensitive.
    pub fn expect_z(&self, i: usize) -> Result<T> {
        self.check_site_index(i)?;
        Ok(self.diagonal_product(&[(i, z_diag())]))
    }

    /// `<Z_i Z_j>` for any two distinct sites, normalization-insensitive.
    pub fn expect_zz(&self, i: usize, j: usize) -> Result<T> {
        self.check_site_index(i)?;
        self.check_site_index(j)?;
        if i == j {
            return Err(Error::Index {
                what: "second ZZ site (must differ from the first)",
                index: j,
                len: self.n(),
            });
        }
        let (a, b) = (i.min(j), i.max(j));
        Ok(self.diagonal_product(&[(a, z_diag()), (b, z_diag())]))
    }

    fn check_site_index(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::Index {
                what: "site",
                index: k,
                len: self.n(),
            });
        }
        Ok(())
    }

    /// All `<Z_i>` and the `<Z_i Z_j>` (i < j) selected by `wanted`, each
    /// divided by `<psi|psi>`. Entries not requested are left at zero.
    pub fn z_correlations(&self, wanted: impl Fn(usize, usize) -> bool) -> (Vec<T>, Vec<Vec<T>>) {
        let n = self.n();
        let s = self.left_centered();
        let norm = s.sites[0].frobenius_sqr();
        let z = z_diag::<T>();

        let mut prefix = Vec::with_capacity(n);
        let mut env = CMatrix::from_vec(1, 1, vec![Complex::one()]);
        for site in &s.sites {
            prefix.push(env.clone());
            env = transfer(&env, site, site, None);
        }

        let mut singles = vec![T::zero(); n];
        let mut pairs = vec![vec![T::zero(); n]; n];
        for i in 0..n {
            let f = weighted(&prefix[i], &s.sites[i], Some(z));
            singles[i] = closing_trace(&s.sites[i], &f).re / norm;
            let Some(last) = (i + 1..n).rev().find(|&j| wanted(i, j)) else {
                continue;
            };
            let mut e = s.sites[i].left_matrix().adjoint().matmul(&f);
            for j in i + 1..=last {
                let g = weighted(&e, &s.sites[j], None);
                if wanted(i, j) {
                    let mut signed = g.clone();
                    for r in (1..signed.rows()).step_by(2) {
                        for c in 0..signed.cols() {
                            signed[(r, c)] = -signed[(r, c)];
                        }
                    }
                    pairs[i][j] = closing_trace(&s.sites[j], &signed).re / norm;
                }
                if j < last {
                    e = s.sites[j].left_matrix().adjoint().matmul(&g);
                }
            }
        }
        (singles, pairs)
    }

    /// `<H>` for a diagonal Ising Hamiltonian. The spin of qubit `i` is the
    /// operator `-Z_i` (bit 1 is spin +1).
    ///
    /// `Normalized` divides the expectations by `<psi|psi>`; `NonNormalized`
    /// uses the raw bilinear forms. The constant offset is added as is in
    /// both modes, so a lossy state drifts towards the constant rather than
    /// towards zero.
    pub fn expect_ising(&self, model: &IsingModel, mode: NormMode) -> Result<T> {
        if model.n() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: model.n(),
            });
        }
        let (z, zz) = self.z_correlations(|i, j| model.coupling(i, j) != 0.0);
        let mut e = T::zero();
        for (i, &h) in model.fields().iter().enumerate() {
            if h != 0.0 {
                e = e - T::lit(h) * z[i];
            }
        }
        for ((i, j), jij) in model.couplings() {
            e = e + T::lit(jij) * zz[i][j];
        }
        let e = match mode {
            NormMode::Normalized => e,
            NormMode::NonNormalized => e * self.norm_sqr(),
        };
        Ok(e + T::lit(model.constant()))
    }

    /// Schmidt coefficients across bond `k`, normalized to unit total weight.
    pub fn schmidt_values(&self, k: usize) -> Result<Vec<T>> {
        if k + 1 >= self.n() {
            return Err(Error::Index {
                what: "bond",
                index: k,
                len: self.n().saturating_sub(1),
            });
        }
        let mut s = self.clone();
        s.move_center(k);
        let f = T::thin_svd(&s.sites[k].left_matrix())?;
        let total: T = f.s.iter().map(|&x| x * x).sum();
        if total <= T::zero() {
            return Err(Error::DegenerateState("zero state has no Schmidt values"));
        }
        let inv = total.sqrt().recip();
        Ok(f.s.into_iter().map(|x| x * inv).collect())
    }

    /// Von Neumann entropy (base 2) across bond `k`.
    pub fn entanglement_entropy(&self, k: usize) -> Result<T> {
        let lambdas = self.schmidt_values(k)?;
        Ok(lambdas
            .into_iter()
            .map(|l| l * l)
            .filter(|&w| w > T::zero())
            .map(|w| -w * w.log2())
            .sum::<T>()
            .max(T::zero()))
    }

    /// `(P(0), P(1))` for qubit `k` from its single-site reduced density
    /// matrix. Moves the center to `k`.
    pub fn local_probabilities(&mut self, k: usize) -> Result<[T; 2]> {
        self.check_site_index(k)?;
        self.move_center(k);
        let site = &self.sites[k];
        let mut w = [T::zero(); 2];
        for l in 0..site.left {
            for (s, ws) in w.iter_mut().enumerate() {
                for r in 0..site.right {
                    *ws = *ws + site.get(l, s, r).norm_sqr();
                }
            }
        }
        let total = w[0] + w[1];
        if total <= T::zero() {
            return Err(Error::DegenerateState("zero state has no outcome probabilities"));
        }
        Ok([w[0] / total, w[1] / total])
    }

    /// Projects qubit `k` onto `outcome` and renormalizes to unit norm.
    /// Returns the outcome probability.
    pub fn project(&mut self, k: usize, outcome: u8) -> Result<T> {
        if outcome > 1 {
            return Err(Error::contract("projection outcome must be 0 or 1"));
        }
        let probs = self.local_probabilities(k)?;
        let p = probs[outcome as usize];
        if p.as_f64() < ZERO_PROBABILITY_THRESHOLD {
            return Err(Error::ZeroProbability {
                site: k,
                outcome,
                probability: p.as_f64(),
            });
        }
        let site = &mut self.sites[k];
        let right = site.right;
        let drop = 1 - outcome as usize;
        for l in 0..site.left {
            for r in 0..right {
                site.data[(l * 2 + drop) * right + r] = Complex::zero();
            }
        }
        self.normalize_center();
        self.log_norm = T::zero();
        Ok(p)
    }

    /// Non-mutating form of [`MpsState::project`].
    pub fn projected(&self, k: usize, outcome: u8) -> Result<(Self, T)> {
        let mut s = self.clone();
        let p = s.project(k, outcome)?;
        Ok((s, p))
    }

    /// `<s|psi>` for one basis state, including the norm scalar.
    pub fn amplitude(&self, bits: &crate::bits::Bitstring) -> Result<Complex<T>> {
        if bits.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                got: bits.len(),
            });
        }
        let mut row = vec![Complex::<T>::one()];
        for (site, &b) in self.sites.iter().zip(bits.bits()) {
            let mut next = vec![Complex::zero(); site.right];
            for (l, &x) in row.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                for (r, v) in next.iter_mut().enumerate() {
                    *v = *v + x * site.get(l, b as usize, r);
                }
            }
            row = next;
        }
        Ok(row[0] * Complex::new(self.norm(), T::zero()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bitstring;
    use num_complex::Complex64;

    fn basis(s: &str) -> MpsState<f64> {
        MpsState::basis_state(&s.parse::<Bitstring>().unwrap()).unwrap()
    }

    fn bell() -> MpsState<f64> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        MpsState::from_statevector(&[Complex64::new(h, 0.0), z, z, Complex64::new(h, 0.0)]).unwrap()
    }

    #[test]
    fn statevector_examples() {
        let v = MpsState::<f64>::plus_state(2).unwrap().to_statevector().unwrap();
        assert!(v.iter().all(|z| (z.re - 0.5).abs() < 1e-15 && z.im == 0.0));
        let v = basis("01").to_statevector().unwrap();
        assert_eq!(v[1], Complex64::new(1.0, 0.0));
        let big = MpsState::<f64>::plus_state(21).unwrap();
        assert!(matches!(big.to_statevector(), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn inner_and_fidelity_basics() {
        let p = MpsState::<f64>::plus_state(5).unwrap();
        assert!((p.inner(&p).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(basis("0").inner(&basis("1")).unwrap().norm() < 1e-15);
        assert!(basis("01").fidelity(&basis("10")).unwrap() < 1e-15);
        assert!((p.fidelity(&p).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(p.inner(&basis("01")), Err(Error::Dimension { .. })));
    }

    #[test]
    fn z_expectations() {
        let p = MpsState::<f64>::plus_state(4).unwrap();
        assert!(p.expect_zz(0, 3).unwrap().abs() < 1e-15);
        assert!((basis("00").expect_zz(0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((basis("1").expect_z(0).unwrap() + 1.0).abs() < 1e-15);
        assert!((bell().expect_zz(0, 1).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(p.expect_zz(2, 2), Err(Error::Index { .. })));
    }

    #[test]
    fn entropy_examples() {
        let p = MpsState::<f64>::plus_state(4).unwrap();
        for k in 0..3 {
            assert!(p.entanglement_entropy(k).unwrap().abs() < 1e-14);
        }
        assert!((bell().entanglement_entropy(0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projection_examples() {
        let mut p = MpsState::<f64>::plus_state(1).unwrap();
        let prob = p.project(0, 0).unwrap();
        assert!((prob - 0.5).abs() < 1e-15);
        let mut one = basis("1");
        assert!(matches!(one.project(0, 0), Err(Error::ZeroProbability { .. })));
    }

    #[test]
    fn appendix_two_qubit_marginal() {
        // squared amplitudes 0.32, 0.28, 0.05, 0.35
        let amps: Vec<Complex64> = [0.32f64, 0.28, 0.05, 0.35]
            .iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect();
        let s = MpsState::from_statevector(&amps).unwrap();
        let (_, p) = s.projected(0, 0).unwrap();
        assert!((p - 0.60).abs() < 1e-12);
    }

    #[test]
    fn amplitude_matches_statevector() {
        let b = bell();
        let v = b.to_statevector().unwrap();
        for i in 0..4 {
            let a = b.amplitude(&Bitstring::from_index(i, 2)).unwrap();
            assert!((a - v[i]).norm() < 1e-14);
        }
    }
}
