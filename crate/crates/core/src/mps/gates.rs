use num_complex::Complex;
use num_traits::Zero;

use super::{MpsState, NormMode, SiteTensor, TruncationReport};
use crate::error::{Error, Result};
use crate::linalg::{truncated_svd, CMatrix};
use crate::scalar::Real;

fn check_gate<T: Real>(g: &CMatrix<T>, dim: usize) -> Result<()> {
    if g.rows() != dim || g.cols() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: g.rows().max(g.cols()),
        });
    }
    let dev = g.unitarity_deviation();
    if !(dev.as_f64() <= T::CHECK_TOL) {
        return Err(Error::NotUnitary(dev.as_f64()));
    }
    Ok(())
}

fn apply_local<T: Real>(site: &mut SiteTensor<T>, u: &CMatrix<T>) {
    let right = site.right;
    for l in 0..site.left {
        for r in 0..right {
            let a0 = site.data[(l * 2) * right + r];
            let a1 = site.data[(l * 2 + 1) * right + r];
            site.data[(l * 2) * right + r] = u[(0, 0)] * a0 + u[(0, 1)] * a1;
            site.data[(l * 2 + 1) * right + r] = u[(1, 0)] * a0 + u[(1, 1)] * a1;
        }
    }
}

impl<T: Real> MpsState<T> {
    fn check_site(&self, k: usize) -> Result<()> {
        if k >= self.n() {
            return Err(Error::Index {
                what: "site",
                index: k,
                len: self.n(),
            });
        }
        Ok(())
    }

    /// Applies a unitary 2x2 gate to site `k`. Bond dimensions, the norm and
    /// the canonical form are all unchanged.
    pub fn apply_1q(&mut self, u: &CMatrix<T>, k: usize) -> Result<()> {
        self.check_site(k)?;
        check_gate(u, 2)?;
        apply_local(&mut self.sites[k], u);
        Ok(())
    }

    /// Applies an arbitrary 2x2 operator to site `k`. The center is moved to
    /// `k` first and the change of norm is folded into `log_norm`.
    pub fn apply_1q_nonunitary(&mut self, u: &CMatrix<T>, k: usize) -> Result<()> {
        self.check_site(k)?;
        if u.rows() != 2 || u.cols() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: u.rows().max(u.cols()),
            });
        }
        self.move_center(k);
        apply_local(&mut self.sites[k], u);
        self.normalize_center();
        if !self.log_norm.is_finite() {
            return Err(Error::DegenerateState("operator annihilated the state"));
        }
        Ok(())
    }

    /// Applies a unitary 4x4 gate to sites `(j, j + 1)` and truncates the
    /// shared bond to the state's cap and cutoff.
    ///
    /// The gate's row/column index is `2 * s_j + s_{j+1}`.
    pub fn apply_2q(&mut self, g: &CMatrix<T>, j: usize) -> Result<TruncationReport> {
        if j + 1 >= self.n() {
            return Err(Error::Index {
                what: "two-qubit gate left site",
                index: j,
                len: self.n().saturating_sub(1),
            });
        }
        check_gate(g, 4)?;
        self.apply_2q_unchecked(g, j, None)
    }

    /// Two-qubit gate without validation. `center_right` chooses which of
    /// the two sites holds the center afterwards; by default it ends on the
    /// far side of the bond from where it came in.
    pub(crate) fn apply_2q_unchecked(
        &mut self,
        g: &CMatrix<T>,
        j: usize,
        center_right: Option<bool>,
    ) -> Result<TruncationReport> {
        if self.center < j {
            self.move_center(j);
        } else if self.center > j + 1 {
            self.move_center(j + 1);
        }
        let center_right = center_right.unwrap_or(self.center == j);

        let left = self.sites[j].left;
        let right = self.sites[j + 1].right;
        let pair = self.sites[j].left_matrix().matmul(&self.sites[j + 1].right_matrix());
        let mut theta = CMatrix::zeros(2 * left, 2 * right);
        for l in 0..left {
            for r in 0..right {
                let v = [
                    pair[(2 * l, r)],
                    pair[(2 * l, right + r)],
                    pair[(2 * l + 1, r)],
                    pair[(2 * l + 1, right + r)],
                ];
                for t1 in 0..2 {
                    for t2 in 0..2 {
                        let row = 2 * t1 + t2;
                        let mut acc = Complex::zero();
                        for (col, &x) in v.iter().enumerate() {
                            acc = acc + g[(row, col)] * x;
                        }
                        theta[(2 * l + t1, t2 * right + r)] = acc;
                    }
                }
            }
        }

        let svd = truncated_svd(&theta, self.bond_cap, self.cutoff)?;
        let kept_rank = svd.singular_values.len();
        let inv = svd.kept_weight.sqrt().recip();
        let weights: Vec<Complex<T>> = svd
            .singular_values
            .iter()
            .map(|&s| Complex::new(s * inv, T::zero()))
            .collect();
        let s = CMatrix::diagonal(&weights);
        if center_right {
            self.sites[j] = SiteTensor::from_left_matrix(svd.u);
            self.sites[j + 1] = SiteTensor::from_right_matrix(s.matmul(&svd.vh));
            self.center = j + 1;
        } else {
            self.sites[j] = SiteTensor::from_left_matrix(svd.u.matmul(&s));
            self.sites[j + 1] = SiteTensor::from_right_matrix(svd.vh);
            self.center = j;
        }
        if self.mode == NormMode::NonNormalized {
            self.log_norm = self.log_norm + svd.kept_weight.ln() / T::lit(2.0);
        }
        self.cum_discarded = self.cum_discarded + svd.discarded_weight;
        let report = TruncationReport {
            gate_index: self.gates_applied,
            bond_index: j,
            kept_rank,
            discarded_weight: svd.discarded_weight.as_f64(),
        };
        self.gates_applied += 1;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::NormMode;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cz() -> CMatrix<f64> {
        CMatrix::diagonal(&[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
    }

    #[test]
    fn cz_on_plus_plus_full_bond() {
        let mut s = MpsState::<f64>::plus_state(2).unwrap().with_bond_cap(2);
        let rep = s.apply_2q(&cz(), 0).unwrap();
        assert_eq!(s.bond_dims(), vec![2]);
        assert_eq!(rep.kept_rank, 2);
        assert!(rep.discarded_weight < 1e-15);
    }

    #[test]
    fn cz_on_plus_plus_cap_one_halves_norm() {
        let mut s = MpsState::<f64>::plus_state(2)
            .unwrap()
            .with_bond_cap(1)
            .with_mode(NormMode::NonNormalized);
        let rep = s.apply_2q(&cz(), 0).unwrap();
        assert!((rep.discarded_weight - 0.5).abs() < 1e-12);
        assert!((s.norm_sqr() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn normalized_mode_keeps_unit_norm() {
        let mut s = MpsState::<f64>::plus_state(2)
            .unwrap()
            .with_bond_cap(1)
            .with_mode(NormMode::Normalized);
        s.apply_2q(&cz(), 0).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!((s.cum_discarded() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_gates_and_indices() {
        let mut s = MpsState::<f64>::plus_state(3).unwrap();
        let not_unitary = CMatrix::diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(matches!(s.apply_1q(&not_unitary, 0), Err(Error::NotUnitary(_))));
        assert!(matches!(s.apply_1q(&CMatrix::identity(2), 3), Err(Error::Index { .. })));
        assert!(matches!(s.apply_2q(&cz(), 2), Err(Error::Index { .. })));
        assert!(s.apply_1q_nonunitary(&not_unitary, 1).is_ok());
        assert!((s.norm_sqr() - 2.5).abs() < 1e-12);
    }
}
