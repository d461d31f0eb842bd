use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::IsingModel;
use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::seeds;

/// Exact Cover 3: every clause needs exactly one of its three bits set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ec3Instance {
    pub n: usize,
    pub seed: u64,
    /// Strictly increasing index triples.
    pub clauses: Vec<[usize; 3]>,
}

impl Ec3Instance {
    pub fn new(n: usize, clauses: Vec<[usize; 3]>) -> Result<Self> {
        let inst = Self { n, seed: 0, clauses };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.clauses {
            if !(c[0] < c[1] && c[1] < c[2]) {
                return Err(Error::schema("clauses", format!("{c:?} is not strictly increasing")));
            }
            if c[2] >= self.n {
                return Err(Error::schema("clauses", format!("{c:?} has an index >= n = {}", self.n)));
            }
        }
        Ok(())
    }

    /// True iff every clause has exactly one set bit.
    pub fn satisfied(&self, s: &Bitstring) -> bool {
        s.len() == self.n
            && self
                .clauses
                .iter()
                .all(|c| c.iter().map(|&k| s.get(k) as usize).sum::<usize>() == 1)
    }

    /// Per clause `(x_a + x_b + x_c - 1)^2` written in spins:
    /// constant `+1`, fields `+1/2`, couplings `+1/2`.
    pub fn to_ising(&self) -> IsingModel {
        let mut m = IsingModel::new(self.n);
        for &[a, b, c] in &self.clauses {
            m.add_constant(1.0);
            for k in [a, b, c] {
                m.add_field(k, 0.5).expect("clause index valid");
            }
            for (i, j) in [(a, b), (a, c), (b, c)] {
                m.add_coupling(i, j, 0.5).expect("clause index valid");
            }
        }
        m
    }

    /// A satisfying assignment, if one exists.
    pub fn solve(&self) -> Option<Bitstring> {
        solve_exact_cover(self.n, &self.clauses)
    }
}

pub fn ec3_to_ising(inst: &Ec3Instance) -> IsingModel {
    inst.to_ising()
}

pub fn ec3_satisfied(inst: &Ec3Instance, s: &Bitstring) -> bool {
    inst.satisfied(s)
}

/// Output of [`gen_ec3_traced`].
#[derive(Clone, Debug)]
pub struct Ec3Generation {
    pub instance: Ec3Instance,
    /// The clause whose addition first made the set unsatisfiable; `None`
    /// when every triple was used up first.
    pub rejected: Option<[usize; 3]>,
    /// Satisfying assignment found for the returned clause set.
    pub witness: Bitstring,
}

/// Adds uniformly drawn, duplicate-free clauses until the next one would
/// make the instance unsatisfiable.
pub fn gen_ec3(n: usize, seed: u64) -> Result<Ec3Instance> {
    gen_ec3_traced(n, seed).map(|g| g.instance)
}

pub fn gen_ec3_traced(n: usize, seed: u64) -> Result<Ec3Generation> {
    if n < 3 {
        return Err(Error::InvalidSize("EC3 needs at least 3 variables".into()));
    }
    let mut rng = seeds::rng(seed);
    let total = n * (n - 1) * (n - 2) / 6;
    let mut used = BTreeSet::new();
    let mut clauses: Vec<[usize; 3]> = Vec::new();
    let mut witness = Bitstring::zeros(n);
    while used.len() < total {
        let clause = loop {
            let mut idx = [0usize; 3];
            idx[0] = rng.gen_range(0..n);
            idx[1] = loop {
                let b = rng.gen_range(0..n);
                if b != idx[0] {
                    break b;
                }
            };
            idx[2] = loop {
                let c = rng.gen_range(0..n);
                if c != idx[0] && c != idx[1] {
                    break c;
                }
            };
            idx.sort_unstable();
            if !used.contains(&idx) {
                break idx;
            }
        };
        used.insert(clause);
        clauses.push(clause);
        match solve_exact_cover(n, &clauses) {
            Some(s) => witness = s,
            None => {
                clauses.pop();
                return Ok(Ec3Generation {
                    instance: Ec3Instance { n, seed, clauses },
                    rejected: Some(clause),
                    witness,
                });
            }
        }
    }
    Ok(Ec3Generation {
        instance: Ec3Instance { n, seed, clauses },
        rejected: None,
        witness,
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Val {
    Free,
    Zero,
    One,
}

struct Cover<'a> {
    clauses: &'a [[usize; 3]],
    by_var: Vec<Vec<usize>>,
}

impl Cover<'_> {
    /// Sets `v` to one and propagates. Returns false on conflict.
    fn assign_one(&self, vals: &mut [Val], v: usize, queue: &mut Vec<(usize, Val)>) -> bool {
        queue.clear();
        queue.push((v, Val::One));
        while let Some((x, val)) = queue.pop() {
            match (vals[x], val) {
                (Val::Free, _) => vals[x] = val,
                (a, b) if a == b => continue,
                _ => return false,
            }
            for &ci in &self.by_var[x] {
                let c = self.clauses[ci];
                if val == Val::One {
                    for &y in &c {
                        if y != x {
                            queue.push((y, Val::Zero));
                        }
                    }
                } else {
                    let ones = c.iter().filter(|&&y| vals[y] == Val::One).count();
                    if ones > 0 {
                        continue;
                    }
                    let free: Vec<usize> = c.iter().copied().filter(|&y| vals[y] == Val::Free).collect();
                    match free.len() {
                        0 => return false,
                        1 => queue.push((free[0], Val::One)),
                        _ => {}
                    }
                }
            }
        }
        true
    }

    fn search(&self, vals: &mut Vec<Val>, queue: &mut Vec<(usize, Val)>) -> bool {
        // Branch on the open clause with the fewest free variables.
        let mut pick: Option<(usize, usize)> = None;
        for (ci, c) in self.clauses.iter().enumerate() {
            if c.iter().any(|&y| vals[y] == Val::One) {
                continue;
            }
            let free = c.iter().filter(|&&y| vals[y] == Val::Free).count();
            if free == 0 {
                return false;
            }
            if pick.is_none_or(|(_, f)| free < f) {
                pick = Some((ci, free));
            }
        }
        let Some((ci, _)) = pick else {
            return true;
        };
        for &v in &self.clauses[ci] {
            if vals[v] != Val::Free {
                continue;
            }
            let saved = vals.clone();
            if self.assign_one(vals, v, queue) && self.search(vals, queue) {
                return true;
            }
            *vals = saved;
        }
        false
    }
}

/// Depth-first exact-cover search with unit propagation. Variables outside
/// every clause are set to 0.
pub fn solve_exact_cover(n: usize, clauses: &[[usize; 3]]) -> Option<Bitstring> {
    let mut by_var = vec![Vec::new(); n];
    for (ci, c) in clauses.iter().enumerate() {
        for &v in c {
            by_var[v].push(ci);
        }
    }
    let cover = Cover { clauses, by_var };
    let mut vals = vec![Val::Free; n];
    let mut queue = Vec::new();
    if !cover.search(&mut vals, &mut queue) {
        return None;
    }
    let bits = vals.iter().map(|&v| u8::from(v == Val::One)).collect();
    Some(Bitstring::new(bits).expect("bits are 0/1"))
}
