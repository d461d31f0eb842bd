//! QAOA layers compiled to nearest-neighbor gates on a qubit chain.
//!
//! A cost layer is an odd-even transposition network of `n` rounds. Round
//! `r` acts on physical pairs `(0,1), (2,3), ...` when `r` is even and
//! `(1,2), (3,4), ...` when `r` is odd; every gate swaps its two qubits, so
//! each unordered logical pair is adjacent exactly once and the chain ends up
//! reversed. The Ising phase of a pair is fused into its SWAP.
//!
//! Permutations map logical qubit to physical site: `perm[i]` is where
//! logical qubit `i` currently sits.

use std::fmt::Write as _;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::problems::IsingModel;
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GateLabel {
    CostFusedSwap,
    FieldRotation,
    Mixer,
}

impl GateLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GateLabel::CostFusedSwap => "cost-fused-swap",
            GateLabel::FieldRotation => "field-rotation",
            GateLabel::Mixer => "mixer",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GateSites {
    One(usize),
    /// Left site of an adjacent pair.
    Two(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateOp<T> {
    pub sites: GateSites,
    pub matrix: CMatrix<T>,
    pub label: GateLabel,
    /// Logical qubits the gate acts on, left to right.
    pub logical: (usize, Option<usize>),
}

/// One QAOA step: the cost layer followed by the mixer.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer<T> {
    pub cost: Vec<GateOp<T>>,
    pub mixer: Vec<GateOp<T>>,
    /// Logical-to-physical map after this step.
    pub perm: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompiledCircuit<T> {
    pub n: usize,
    pub layers: Vec<Layer<T>>,
}

impl<T: Real> CompiledCircuit<T> {
    pub fn p(&self) -> usize {
        self.layers.len()
    }

    pub fn final_perm(&self) -> Vec<usize> {
        self.layers
            .last()
            .map_or_else(|| identity_perm(self.n), |l| l.perm.clone())
    }

    /// All gates in execution order.
    pub fn gates(&self) -> impl Iterator<Item = &GateOp<T>> {
        self.layers.iter().flat_map(|l| l.cost.iter().chain(&l.mixer))
    }

    pub fn two_qubit_count(&self) -> usize {
        self.gates().filter(|g| matches!(g.sites, GateSites::Two(_))).count()
    }

    /// Human-readable gate listing for debugging.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "circuit n={} p={}", self.n, self.p());
        for (j, layer) in self.layers.iter().enumerate() {
            let _ = writeln!(out, "layer {}", j + 1);
            for g in layer.cost.iter().chain(&layer.mixer) {
                let _ = match (g.sites, g.logical) {
                    (GateSites::One(k), (a, _)) => writeln!(out, "  {:<16} site {k} (logical {a})", g.label.as_str()),
                    (GateSites::Two(k), (a, b)) => writeln!(
                        out,
                        "  {:<16} sites {k},{} (logical {a},{})",
                        g.label.as_str(),
                        k + 1,
                        b.unwrap_or(usize::MAX)
                    ),
                };
            }
            let _ = writeln!(out, "  perm {:?}", layer.perm);
        }
        out
    }
}

pub fn identity_perm(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn cis<T: Real>(theta: f64) -> Complex<T> {
    Complex::new(T::lit(theta.cos()), T::lit(theta.sin()))
}

/// `exp(-i gamma J Z Z)` followed by SWAP, indexed by `2 s_left + s_right`.
pub fn fused_cost_gate<T: Real>(gamma: f64, coupling: f64) -> CMatrix<T> {
    let same = cis::<T>(-gamma * coupling);
    let diff = cis::<T>(gamma * coupling);
    let mut g = CMatrix::zeros(4, 4);
    g[(0, 0)] = same;
    g[(1, 2)] = diff;
    g[(2, 1)] = diff;
    g[(3, 3)] = same;
    g
}

/// `exp(-i gamma h S)` for the spin operator `S = -Z` (bit 1 is spin +1).
pub fn field_rotation<T: Real>(gamma: f64, field: f64) -> CMatrix<T> {
    CMatrix::diagonal(&[cis(gamma * field), cis(-gamma * field)])
}

/// `exp(-i beta X)`.
pub fn mixer_gate<T: Real>(beta: f64) -> CMatrix<T> {
    let c = Complex::new(T::lit(beta.cos()), T::zero());
    let s = Complex::new(T::zero(), T::lit(-beta.sin()));
    CMatrix::from_vec(2, 2, vec![c, s, s, c])
}

/// Pairs of physical sites touched in round `r` of an `n`-site network, in
/// the order the compiler emits them.
pub fn round_pairs(n: usize, r: usize) -> Vec<usize> {
    let mut js: Vec<usize> = (r % 2..n.saturating_sub(1)).step_by(2).collect();
    if r % 2 == 1 {
        js.reverse();
    }
    js
}

fn check_perm(perm: &[usize], n: usize) -> Result<Vec<usize>> {
    if perm.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: perm.len(),
        });
    }
    let mut at = vec![usize::MAX; n];
    for (logical, &phys) in perm.iter().enumerate() {
        if phys >= n || at[phys] != usize::MAX {
            return Err(Error::contract("permutation is not a bijection"));
        }
        at[phys] = logical;
    }
    Ok(at)
}

/// One `exp(-i gamma H_C)` layer as field rotations (at the start) followed
/// by the fused SWAP network. Returns the gates and the outgoing permutation.
pub fn compile_cost_layer<T: Real>(
    model: &IsingModel,
    gamma: f64,
    perm_in: &[usize],
) -> Result<(Vec<GateOp<T>>, Vec<usize>)> {
    let n = model.n();
    if n == 0 {
        return Err(Error::InvalidSize("model has no qubits".into()));
    }
    let mut at = check_perm(perm_in, n)?;
    let mut gates = Vec::with_capacity(n * (n - 1) / 2 + n);
    for (i, &h) in model.fields().iter().enumerate() {
        if h != 0.0 {
            gates.push(GateOp {
                sites: GateSites::One(perm_in[i]),
                matrix: field_rotation(gamma, h),
                label: GateLabel::FieldRotation,
                logical: (i, None),
            });
        }
    }
    for r in 0..n {
        for j in round_pairs(n, r) {
            let (a, b) = (at[j], at[j + 1]);
            gates.push(GateOp {
                sites: GateSites::Two(j),
                matrix: fused_cost_gate(gamma, model.coupling(a, b)),
                label: GateLabel::CostFusedSwap,
                logical: (a, Some(b)),
            });
            at.swap(j, j + 1);
        }
    }
    let mut perm_out = vec![0; n];
    for (phys, &logical) in at.iter().enumerate() {
        perm_out[logical] = phys;
    }
    Ok((gates, perm_out))
}

pub fn compile_mixer_layer<T: Real>(n: usize, beta: f64) -> Vec<GateOp<T>> {
    compile_mixer_layer_at(n, beta, &identity_perm(n))
}

fn compile_mixer_layer_at<T: Real>(n: usize, beta: f64, perm: &[usize]) -> Vec<GateOp<T>> {
    let g = mixer_gate::<T>(beta);
    let mut at = vec![0; n];
    for (logical, &phys) in perm.iter().enumerate() {
        at[phys] = logical;
    }
    (0..n)
        .map(|k| GateOp {
            sites: GateSites::One(k),
            matrix: g.clone(),
            label: GateLabel::Mixer,
            logical: (at[k], None),
        })
        .collect()
}

/// Alternating cost and mixer layers for every step of `schedule`.
pub fn compile_qaoa<T: Real>(model: &IsingModel, schedule: &AngleSchedule) -> Result<CompiledCircuit<T>> {
    schedule.validate()?;
    let n = model.n();
    let mut perm = identity_perm(n);
    let mut layers = Vec::with_capacity(schedule.p());
    for (&gamma, &beta) in schedule.gamma.iter().zip(&schedule.beta) {
        let (cost, next) = compile_cost_layer(model, gamma, &perm)?;
        perm = next;
        let mixer = compile_mixer_layer_at(n, beta, &perm);
        layers.push(Layer {
            cost,
            mixer,
            perm: perm.clone(),
        });
    }
    Ok(CompiledCircuit { n, layers })
}
