//! Problem instances, their Ising encodings, and exact classical oracles.
//!
//! Spins follow `z_i = 2 s_i - 1`: bit 1 is spin +1 everywhere in the crate.

mod ec3;
mod heuristic;
mod ising;
mod maxcut;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

pub use ec3::{ec3_satisfied, ec3_to_ising, gen_ec3, gen_ec3_traced, solve_exact_cover, Ec3Generation, Ec3Instance};
pub use heuristic::best_found;
pub use ising::{GroundStates, IsingModel, BRUTE_FORCE_LIMIT};
pub use maxcut::{gen_maxcut_er, maxcut_to_ising, MaxCutInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    MaxCut,
    Ec3,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::Ec3 => "ec3",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "maxcut" => Ok(ProblemKind::MaxCut),
            "ec3" => Ok(ProblemKind::Ec3),
            other => Err(Error::schema("kind", format!("expected maxcut or ec3, got {other:?}"))),
        }
    }
}

/// Known low-energy assignment. `exact` marks a proven optimum; otherwise
/// the energy is only the best found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub energy: f64,
    pub witness: Bitstring,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Problem {
    MaxCut(MaxCutInstance),
    Ec3(Ec3Instance),
}

/// A problem together with an optional optimum certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(flatten)]
    pub problem: Problem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

impl From<MaxCutInstance> for ProblemInstance {
    fn from(m: MaxCutInstance) -> Self {
        Self {
            problem: Problem::MaxCut(m),
            certificate: None,
        }
    }
}

impl From<Ec3Instance> for ProblemInstance {
    fn from(e: Ec3Instance) -> Self {
        Self {
            problem: Problem::Ec3(e),
            certificate: None,
        }
    }
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self.problem {
            Problem::MaxCut(_) => ProblemKind::MaxCut,
            Problem::Ec3(_) => ProblemKind::Ec3,
        }
    }

    pub fn n(&self) -> usize {
        match &self.problem {
            Problem::MaxCut(m) => m.n,
            Problem::Ec3(e) => e.n,
        }
    }

    pub fn seed(&self) -> u64 {
        match &self.problem {
            Problem::MaxCut(m) => m.seed,
            Problem::Ec3(e) => e.seed,
        }
    }

    /// Stable identifier derived from kind, size and seed.
    pub fn id(&self) -> String {
        format!("{}-n{}-{:016x}", self.kind(), self.n(), self.seed())
    }

    pub fn to_ising(&self) -> IsingModel {
        match &self.problem {
            Problem::MaxCut(m) => m.to_ising(),
            Problem::Ec3(e) => e.to_ising(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.problem {
            Problem::MaxCut(m) => m.validate()?,
            Problem::Ec3(e) => e.validate()?,
        }
        if let Some(c) = &self.certificate {
            if c.witness.len() != self.n() {
                return Err(Error::schema("certificate.witness", "length differs from n"));
            }
            let e = self.to_ising().classical_energy(&c.witness)?;
            if (e - c.energy).abs() > 1e-9 * (1.0 + e.abs()) {
                return Err(Error::schema(
                    "certificate.energy",
                    format!("witness has energy {e}, certificate claims {}", c.energy),
                ));
            }
        }
        Ok(())
    }

    /// Exact certificate by enumeration (`n <= 24`).
    pub fn exact_certificate(&self) -> Result<Certificate> {
        let g = self.to_ising().brute_force_ground()?;
        let witness = g.bitstrings().next().expect("at least one minimizer");
        Ok(Certificate {
            energy: g.energy,
            witness,
            exact: true,
        })
    }

    /// Exact certificate when enumeration is allowed, otherwise the best
    /// found by annealing.
    pub fn certify(&self, seed: u64) -> Result<Certificate> {
        if self.n() <= BRUTE_FORCE_LIMIT {
            return self.exact_certificate();
        }
        if let Problem::Ec3(e) = &self.problem {
            if let Some(w) = e.solve() {
                return Ok(Certificate {
                    energy: 0.0,
                    witness: w,
                    exact: true,
                });
            }
        }
        let (energy, witness) = best_found(&self.to_ising(), 32, 2000, seed);
        Ok(Certificate {
            energy,
            witness,
            exact: false,
        })
    }

    pub fn with_certificate(mut self, c: Certificate) -> Self {
        self.certificate = Some(c);
        self
    }

    /// Whether `s` solves the instance outright: a satisfying assignment
    /// for EC3, a certified-optimal cut for MaxCut.
    pub fn is_solution(&self, s: &Bitstring) -> Option<bool> {
        match &self.problem {
            Problem::Ec3(e) => Some(e.satisfied(s)),
            Problem::MaxCut(_) => {
                let c = self.certificate.as_ref()?;
                let e = self.to_ising().classical_energy(s).ok()?;
                Some(e <= c.energy + 1e-9)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instance_json_round_trip() {
        let m: ProblemInstance = gen_maxcut_er(6, 0.4, 9).unwrap().into();
        let cert = m.exact_certificate().unwrap();
        let m = m.with_certificate(cert);
        m.validate().unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"kind\":\"maxcut\""));
        assert_eq!(serde_json::from_str::<ProblemInstance>(&text).unwrap(), m);

        let e: ProblemInstance = gen_ec3(7, 2).unwrap().into();
        let text = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<ProblemInstance>(&text).unwrap(), e);
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("MaxCut".parse::<ProblemKind>().unwrap(), ProblemKind::MaxCut);
        assert!("sat".parse::<ProblemKind>().is_err());
    }

    #[test]
    fn bad_certificate_is_reported() {
        let m: ProblemInstance = MaxCutInstance::from_edges(3, &[(0, 1)]).unwrap().into();
        let m = m.with_certificate(Certificate {
            energy: -4.0,
            witness: "010".parse().unwrap(),
            exact: true,
        });
        assert!(matches!(m.validate(), Err(Error::Schema { .. })));
    }
}
