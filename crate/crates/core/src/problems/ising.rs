use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};

/// Largest register for exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Diagonal Ising cost `constant + sum h_i z_i + sum_{i<j} J_ij z_i z_j`
/// with `z_i = 2 s_i - 1` (bit 1 is spin +1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    n: usize,
    fields: Vec<f64>,
    #[serde(with = "pair_map")]
    couplings: BTreeMap<(usize, usize), f64>,
    constant: f64,
}

impl IsingModel {
    /// The zero model on `n` spins.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            fields: vec![0.0; n],
            couplings: BTreeMap::new(),
            constant: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Nonzero couplings as `((i, j), J_ij)` with `i < j`.
    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.couplings.iter().map(|(&k, &v)| (k, v))
    }

    pub fn coupling_count(&self) -> usize {
        self.couplings.len()
    }

    /// `J_ij` in either index order; zero when absent or `i == j`.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = (i.min(j), i.max(j));
        self.couplings.get(&key).copied().unwrap_or(0.0)
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_field(&mut self, i: usize, h: f64) -> Result<()> {
        if i >= self.n {
            return Err(Error::Index {
                what: "field spin",
                index: i,
                len: self.n,
            });
        }
        self.fields[i] += h;
        Ok(())
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        for k in [i, j] {
            if k >= self.n {
                return Err(Error::Index {
                    what: "coupling spin",
                    index: k,
                    len: self.n,
                });
            }
        }
        if i == j {
            return Err(Error::contract("coupling endpoints must differ"));
        }
        let key = (i.min(j), i.max(j));
        let entry = self.couplings.entry(key).or_insert(0.0);
        *entry += value;
        if *entry == 0.0 {
            self.couplings.remove(&key);
        }
        Ok(())
    }

    /// Every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut m = self.clone();
        m.constant *= factor;
        m.fields.iter_mut().for_each(|h| *h *= factor);
        m.couplings.values_mut().for_each(|j| *j *= factor);
        m.couplings.retain(|_, j| *j != 0.0);
        m
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&h| h != 0.0)
    }

    /// True when every field and coupling is an integer.
    pub fn has_integer_coefficients(&self) -> bool {
        self.fields
            .iter()
            .chain(self.couplings.values())
            .all(|&x| x.fract() == 0.0)
    }

    pub fn energy_of_spins(&self, z: &[f64]) -> f64 {
        let mut e = self.constant;
        for (h, zi) in self.fields.iter().zip(z) {
            e += h * zi;
        }
        for (&(i, j), &jij) in &self.couplings {
            e += jij * z[i] * z[j];
        }
        e
    }

    pub fn classical_energy(&self, s: &Bitstring) -> Result<f64> {
        if s.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: s.len(),
            });
        }
        let z: Vec<f64> = (0..self.n).map(|k| s.spin(k)).collect();
        Ok(self.energy_of_spins(&z))
    }

    /// Neighbor lists `(j, J_ij)` for every spin.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &v) in &self.couplings {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    /// Exact minimum over all `2^n` bitstrings with every minimizer.
    pub fn brute_force_ground(&self) -> Result<GroundStates> {
        let n = self.n;
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::SizeLimit {
                what: "spins for brute-force enumeration",
                got: n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        if n == 0 {
            return Err(Error::InvalidSize("model has no spins".into()));
        }
        let adj = self.adjacency();
        // all bits 0: every spin is -1
        let mut z = vec![-1.0f64; n];
        let mut local: Vec<f64> = (0..n)
            .map(|k| self.fields[k] + adj[k].iter().map(|&(j, v)| v * z[j]).sum::<f64>())
            .collect();
        let mut energy = self.energy_of_spins(&z);
        let scale = 1.0
            + self.constant.abs()
            + self.fields.iter().map(|h| h.abs()).sum::<f64>()
            + self.couplings.values().map(|j| j.abs()).sum::<f64>();
        let slack = 1e-9 * scale;

        let mut best = energy;
        let mut candidates: Vec<u64> = vec![0];
        let mut gray: u64 = 0;
        for step in 1u64..(1u64 << n) {
            let bit = step.trailing_zeros() as usize;
            gray ^= 1 << bit;
            let k = n - 1 - bit;
            let old = z[k];
            energy -= 2.0 * old * local[k];
            z[k] = -old;
            for &(j, v) in &adj[k] {
                local[j] -= 2.0 * v * old;
            }
            if energy < best - slack {
                best = energy;
                candidates.clear();
                candidates.push(gray);
            } else if energy <= best + slack {
                best = best.min(energy);
                candidates.push(gray);
            }
        }

        // Re-evaluate survivors exactly to shed incremental roundoff.
        let exact: Vec<(u64, f64)> = candidates
            .into_iter()
            .map(|idx| {
                let s = Bitstring::from_index(idx as usize, n);
                (idx, self.classical_energy(&s).expect("length matches"))
            })
            .collect();
        let min = exact.iter().map(|&(_, e)| e).fold(f64::INFINITY, f64::min);
        let tol = 1e-12 * scale;
        let mut minimizers: Vec<u64> = exact
            .into_iter()
            .filter(|&(_, e)| e <= min + tol)
            .map(|(i, _)| i)
            .collect();
        minimizers.sort_unstable();
        Ok(GroundStates {
            n,
            energy: min,
            minimizers,
        })
    }
}

/// Exact ground energy and the complete minimizer set.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundStates {
    n: usize,
    pub energy: f64,
    /// Big-endian basis indices, ascending.
    pub minimizers: Vec<u64>,
}

impl GroundStates {
    pub fn count(&self) -> usize {
        self.minimizers.len()
    }

    pub fn bitstrings(&self) -> impl Iterator<Item = Bitstring> + '_ {
        self.minimizers
            .iter()
            .map(move |&i| Bitstring::from_index(i as usize, self.n))
    }

    pub fn contains(&self, s: &Bitstring) -> bool {
        s.len() == self.n && self.minimizers.binary_search(&(s.to_index() as u64)).is_ok()
    }
}

mod pair_map {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Term {
        i: usize,
        j: usize,
        value: f64,
    }

    pub fn serialize<S: Serializer>(m: &BTreeMap<(usize, usize), f64>, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<Term> = m.iter().map(|(&(i, j), &value)| Term { i, j, value }).collect();
        terms.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(usize, usize), f64>, D::Error> {
        let terms = Vec::<Term>::deserialize(d)?;
        let mut m = BTreeMap::new();
        for t in terms {
            if t.i >= t.j {
                return Err(serde::de::Error::custom("coupling keys must satisfy i < j"));
            }
            m.insert((t.i, t.j), t.value);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> IsingModel {
        let mut m = IsingModel::new(3);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            m.add_constant(-1.0);
            m.add_coupling(i, j, 1.0).unwrap();
        }
        m
    }

    #[test]
    fn zero_model_energy() {
        let m = IsingModel::new(4);
        assert_eq!(m.classical_energy(&"0110".parse().unwrap()).unwrap(), 0.0);
        let g = m.brute_force_ground().unwrap();
        assert_eq!(g.count(), 16);
    }

    #[test]
    fn triangle_ground() {
        let g = triangle().brute_force_ground().unwrap();
        assert_eq!(g.energy, -4.0);
        assert_eq!(g.count(), 6);
        assert!(!g.contains(&"000".parse().unwrap()));
        assert!(!g.contains(&"111".parse().unwrap()));
        assert_eq!(triangle().classical_energy(&"001".parse().unwrap()).unwrap(), -4.0);
    }

    #[test]
    fn coupling_is_symmetric_and_cancels() {
        let mut m = IsingModel::new(3);
        m.add_coupling(2, 0, 1.5).unwrap();
        assert_eq!(m.coupling(0, 2), 1.5);
        m.add_coupling(0, 2, -1.5).unwrap();
        assert_eq!(m.coupling_count(), 0);
        assert!(m.add_coupling(1, 1, 1.0).is_err());
        assert!(m.add_field(3, 1.0).is_err());
    }

    #[test]
    fn size_limit() {
        assert!(matches!(
            IsingModel::new(25).brute_force_ground(),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let mut m = triangle();
        m.add_field(1, 0.3).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: IsingModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
    }
}
