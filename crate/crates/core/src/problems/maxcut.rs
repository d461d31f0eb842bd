use rand::Rng;
use serde::{Deserialize, Serialize};

use super::IsingModel;
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::seeds;

/// Unweighted MaxCut instance on an Erdős–Rényi graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxCutInstance {
    pub n: usize,
    pub seed: u64,
    pub edge_prob: f64,
    /// Symmetric 0/1 matrix with zero diagonal.
    pub adjacency: Vec<Vec<u8>>,
}

impl MaxCutInstance {
    /// Builds an instance from an edge list (for hand-made graphs).
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![vec![0u8; n]; n];
        for &(i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::contract(format!("invalid edge ({i}, {j}) for n = {n}")));
            }
            adjacency[i][j] = 1;
            adjacency[j][i] = 1;
        }
        Ok(Self {
            n,
            seed: 0,
            edge_prob: 0.0,
            adjacency,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.adjacency.len() != self.n || self.adjacency.iter().any(|r| r.len() != self.n) {
            return Err(Error::schema("adjacency", format!("must be a {0}x{0} matrix", self.n)));
        }
        for i in 0..self.n {
            if self.adjacency[i][i] != 0 {
                return Err(Error::schema("adjacency", "diagonal must be zero"));
            }
            for j in 0..self.n {
                let a = self.adjacency[i][j];
                if a > 1 || a != self.adjacency[j][i] {
                    return Err(Error::schema("adjacency", "must be a symmetric 0/1 matrix"));
                }
            }
        }
        Ok(())
    }

    /// Unordered edges `(i, j)` with `i < j`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adjacency[i][j] == 1 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn cut_size(&self, s: &Bitstring) -> usize {
        self.edges().into_iter().filter(|&(i, j)| s.get(i) != s.get(j)).count()
    }

    /// Per edge: constant `-1` and coupling `+1`, so the energy of `s` is
    /// `-2 * cut(s)`.
    pub fn to_ising(&self) -> IsingModel {
        let mut m = IsingModel::new(self.n);
        for (i, j) in self.edges() {
            m.add_constant(-1.0);
            m.add_coupling(i, j, 1.0).expect("edge endpoints valid");
        }
        m
    }
}

/// G(n, w): each unordered pair is an edge independently with probability
/// `w`, drawn in lexicographic pair order from the seeded generator.
pub fn gen_maxcut_er(n: usize, w: f64, seed: u64) -> Result<MaxCutInstance> {
    if n < 2 {
        return Err(Error::InvalidSize("MaxCut needs at least 2 vertices".into()));
    }
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::contract("edge probability must lie in (0, 1)"));
    }
    let mut rng = seeds::rng(seed);
    let mut adjacency = vec![vec![0u8; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < w {
                adjacency[i][j] = 1;
                adjacency[j][i] = 1;
            }
        }
    }
    Ok(MaxCutInstance {
        n,
        seed,
        edge_prob: w,
        adjacency,
    })
}

pub fn maxcut_to_ising(inst: &MaxCutInstance) -> IsingModel {
    inst.to_ising()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_symmetric() {
        let a = gen_maxcut_er(9, 0.5, 42).unwrap();
        let b = gen_maxcut_er(9, 0.5, 42).unwrap();
        assert_eq!(a, b);
        a.validate().unwrap();
        let two = gen_maxcut_er(2, 0.5, 1).unwrap();
        assert_eq!(two.adjacency[0][1], two.adjacency[1][0]);
        assert_eq!(two.adjacency[0][0], 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gen_maxcut_er(1, 0.5, 0).is_err());
        assert!(gen_maxcut_er(5, 0.0, 0).is_err());
        assert!(gen_maxcut_er(5, 1.0, 0).is_err());
    }

    #[test]
    fn path_energy() {
        let path = MaxCutInstance::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let m = path.to_ising();
        assert_eq!(m.classical_energy(&"010".parse().unwrap()).unwrap(), -4.0);
        let empty = MaxCutInstance::from_edges(3, &[]).unwrap().to_ising();
        assert_eq!(empty.classical_energy(&"101".parse().unwrap()).unwrap(), 0.0);
    }
}
