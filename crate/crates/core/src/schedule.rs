use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a schedule was produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grid,
    Extrapolated,
    Refined,
    Shared,
    Multistart,
    File,
    #[default]
    Manual,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Grid => "grid",
            Method::Extrapolated => "extrapolated",
            Method::Refined => "refined",
            Method::Shared => "shared",
            Method::Multistart => "multistart",
            Method::File => "file",
            Method::Manual => "manual",
        };
        f.write_str(s)
    }
}

/// Metadata recorded alongside every schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: Method,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub bond_dim: Option<usize>,
    /// `(initial points, total evaluations)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Provenance {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// QAOA angles `(gamma_j, beta_j)` for `j = 1..p`, in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSchedule {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl AngleSchedule {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        let s = Self {
            gamma,
            beta,
            provenance: Provenance::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn empty() -> Self {
        Self {
            gamma: Vec::new(),
            beta: Vec::new(),
            provenance: Provenance::default(),
        }
    }

    /// Single-layer schedule.
    pub fn p1(gamma: f64, beta: f64) -> Self {
        Self {
            gamma: vec![gamma],
            beta: vec![beta],
            provenance: Provenance::default(),
        }
    }

    /// `p` layers of zero angles.
    pub fn zeros(p: usize) -> Self {
        Self {
            gamma: vec![0.0; p],
            beta: vec![0.0; p],
            provenance: Provenance::default(),
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma.len() != self.beta.len() {
            return Err(Error::schema(
                "beta",
                format!("length {} differs from gamma length {}", self.beta.len(), self.gamma.len()),
            ));
        }
        if self.gamma.iter().chain(&self.beta).any(|x| !x.is_finite()) {
            return Err(Error::schema("gamma/beta", "angles must be finite"));
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.gamma.len()
    }

    /// The first `p` layers.
    pub fn prefix(&self, p: usize) -> Result<Self> {
        if p > self.p() {
            return Err(Error::contract(format!(
                "requested depth {p} exceeds schedule depth {}",
                self.p()
            )));
        }
        Ok(Self {
            gamma: self.gamma[..p].to_vec(),
            beta: self.beta[..p].to_vec(),
            provenance: self.provenance.clone(),
        })
    }

    /// Interleaved `(gamma_1, beta_1, gamma_2, ...)`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gamma.iter().zip(&self.beta).flat_map(|(&g, &b)| [g, b]).collect()
    }

    pub fn from_flat(x: &[f64]) -> Self {
        Self {
            gamma: x.iter().step_by(2).copied().collect(),
            beta: x.iter().skip(1).step_by(2).copied().collect(),
            provenance: Provenance::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_and_flat_round_trip() {
        let s = AngleSchedule::new(vec![0.1, 0.2, 0.3], vec![0.6, 0.5, 0.4]).unwrap();
        let p2 = s.prefix(2).unwrap();
        assert_eq!(p2.gamma, vec![0.1, 0.2]);
        assert!(s.prefix(4).is_err());
        assert_eq!(AngleSchedule::from_flat(&s.to_flat()).gamma, s.gamma);
        assert!(AngleSchedule::new(vec![0.1], vec![]).is_err());
    }
}
