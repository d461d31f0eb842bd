//! Deterministic sequential sampling.
//!
//! Qubits are fixed left to right. Each one takes its locally more probable
//! outcome given the outcomes already fixed; ties go to 1. The result is a
//! greedy-local choice, not the global argmax, but its probability is always
//! at least `2^-n`.

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::mps::MpsState;
use crate::scalar::Real;

/// `P(0)` must beat `P(1)` by more than this to pick 0; closer calls are
/// ties and pick 1.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub bits: Bitstring,
    /// `|<s|psi>|^2 / <psi|psi>`.
    pub probability: f64,
    /// Probability of each chosen outcome given the earlier ones.
    pub conditionals: Vec<f64>,
}

/// Samples one bitstring from `state` (normalizing it first if needed).
pub fn deterministic_sample<T: Real>(state: &MpsState<T>) -> Result<SampleOutcome> {
    if !state.log_norm().is_finite() {
        return Err(Error::DegenerateState("cannot sample a zero-norm state"));
    }
    let mut s = state.clone();
    s.normalize();
    let tol = T::lit(TIE_TOLERANCE).max(T::epsilon() * T::lit(8.0));
    let n = s.n();
    let mut bits = Vec::with_capacity(n);
    let mut conditionals = Vec::with_capacity(n);
    let mut probability = 1.0;
    for k in 0..n {
        let [p0, p1] = s.local_probabilities(k)?;
        let outcome = u8::from(p0 - p1 <= tol);
        let p = if k + 1 < n {
            s.project(k, outcome)?
        } else if outcome == 0 {
            p0
        } else {
            p1
        };
        bits.push(outcome);
        conditionals.push(p.as_f64());
        probability *= p.as_f64();
    }
    Ok(SampleOutcome {
        bits: Bitstring::new(bits)?,
        probability,
        conditionals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn two_qubit_greedy_example() {
        let amps: Vec<Complex64> = [0.32f64, 0.28, 0.05, 0.35]
            .iter()
            .map(|p| Complex64::new(p.sqrt(), 0.0))
            .collect();
        let s = MpsState::from_statevector(&amps).unwrap();
        let out = deterministic_sample(&s).unwrap();
        assert_eq!(out.bits.to_string(), "00");
        assert!((out.probability - 0.32).abs() < 1e-12);
    }

    #[test]
    fn plus_state_ties_to_ones() {
        let s = MpsState::<f64>::plus_state(5).unwrap();
        let out = deterministic_sample(&s).unwrap();
        assert_eq!(out.bits, Bitstring::ones(5));
        assert!((out.probability - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn basis_state_is_returned() {
        let b: Bitstring = "010".parse().unwrap();
        let out = deterministic_sample(&MpsState::<f64>::basis_state(&b).unwrap()).unwrap();
        assert_eq!(out.bits, b);
        assert!((out.probability - 1.0).abs() < 1e-15);
    }
}
