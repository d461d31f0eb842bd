//! Dense statevector oracles shared by the integration tests. Nothing here
//! goes through the MPS code: amplitudes live in a plain `Vec`, Schmidt
//! weights come from nalgebra eigendecompositions.

#![allow(dead_code)]

pub mod props;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qaoa_mps::compiler::GateSites;
use qaoa_mps::{compile_qaoa, AngleSchedule, Bitstring, IsingModel, NormMode};

pub type Amps = Vec<Complex64>;

/// Bit of site `k` (0 = leftmost, most significant) in basis index `i`.
pub fn bit(i: usize, k: usize, n: usize) -> usize {
    (i >> (n - 1 - k)) & 1
}

/// Energy from the Ising definition with spin `+1` for bit 1.
pub fn energy(model: &IsingModel, i: usize) -> f64 {
    let n = model.n();
    let z = |k: usize| if bit(i, k, n) == 1 { 1.0 } else { -1.0 };
    let mut e = model.constant();
    for (k, h) in model.fields().iter().enumerate() {
        e += h * z(k);
    }
    for ((a, b), j) in model.couplings() {
        e += j * z(a) * z(b);
    }
    e
}

pub fn plus_state(n: usize) -> Amps {
    let a = (1.0 / (1u64 << n) as f64).sqrt();
    vec![Complex64::new(a, 0.0); 1 << n]
}

/// `exp(-i beta X)` on every qubit.
pub fn apply_mixer(psi: &mut Amps, n: usize, beta: f64) {
    let (c, s) = (beta.cos(), beta.sin());
    for k in 0..n {
        let mask = 1 << (n - 1 - k);
        for i in 0..psi.len() {
            if i & mask == 0 {
                let (a, b) = (psi[i], psi[i | mask]);
                psi[i] = a * c + b * Complex64::new(0.0, -s);
                psi[i | mask] = b * c + a * Complex64::new(0.0, -s);
            }
        }
    }
}

/// Exact QAOA state built from the cost diagonal.
pub fn dense_qaoa(model: &IsingModel, schedule: &AngleSchedule) -> Amps {
    let n = model.n();
    let diag: Vec<f64> = (0..1 << n).map(|i| energy(model, i)).collect();
    let mut psi = plus_state(n);
    for (&g, &b) in schedule.gamma.iter().zip(&schedule.beta) {
        for (a, e) in psi.iter_mut().zip(&diag) {
            *a *= Complex64::from_polar(1.0, -g * e);
        }
        apply_mixer(&mut psi, n, b);
    }
    psi
}

pub fn norm_sqr(psi: &Amps) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Constant offset plus `<psi|H - c|psi>`, the latter divided by
/// `<psi|psi>` when `normalized`.
pub fn dense_cost(model: &IsingModel, psi: &Amps, normalized: bool) -> f64 {
    let c = model.constant();
    let raw: f64 = psi.iter().enumerate().map(|(i, a)| a.norm_sqr() * (energy(model, i) - c)).sum();
    c + if normalized { raw / norm_sqr(psi) } else { raw }
}

pub fn fidelity(a: &Amps, b: &Amps) -> f64 {
    let ov: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ov.norm_sqr() / (norm_sqr(a) * norm_sqr(b))
}

/// Greedy qubit-by-qubit projection on the dense vector; ties (within
/// `tol`) go to 1.
pub fn dense_sample(psi: &Amps, n: usize, tol: f64) -> (Bitstring, f64) {
    let total = norm_sqr(psi);
    let mut prefix = 0usize;
    for k in 0..n {
        let mut p = [0.0; 2];
        for (i, a) in psi.iter().enumerate() {
            if k > 0 && (i >> (n - k)) != prefix {
                continue;
            }
            p[bit(i, k, n)] += a.norm_sqr();
        }
        let s = if p[0] - p[1] > tol * (p[0] + p[1]) { 0 } else { 1 };
        prefix = (prefix << 1) | s;
    }
    (Bitstring::from_index(prefix, n), psi[prefix].norm_sqr() / total)
}

fn apply_one(psi: &mut Amps, n: usize, k: usize, u: &[[Complex64; 2]; 2]) {
    let mask = 1 << (n - 1 - k);
    for i in 0..psi.len() {
        if i & mask == 0 {
            let (a, b) = (psi[i], psi[i | mask]);
            psi[i] = u[0][0] * a + u[0][1] * b;
            psi[i | mask] = u[1][0] * a + u[1][1] * b;
        }
    }
}

fn apply_two(psi: &mut Amps, n: usize, j: usize, g: &[[Complex64; 4]; 4]) {
    let hi = 1 << (n - 1 - j);
    let lo = 1 << (n - 2 - j);
    for i in 0..psi.len() {
        if i & (hi | lo) == 0 {
            let idx = [i, i | lo, i | hi, i | hi | lo];
            let v: Vec<Complex64> = idx.iter().map(|&x| psi[x]).collect();
            for (r, &x) in idx.iter().enumerate() {
                psi[x] = (0..4).map(|c| g[r][c] * v[c]).sum();
            }
        }
    }
}

/// Keeps the leading Schmidt values across the cut after site `j`, the same
/// rule as the MPS truncation: at most `cap` values, each with squared
/// weight above `cutoff` times the total, at least one. The Schmidt vectors
/// come from the Hermitian eigenproblem of the smaller reduced Gram matrix,
/// and the state is projected onto the kept ones.
///
/// Returns the discarded fraction and whether the cut was ambiguous: a kept
/// and a non-negligible dropped weight that agree to `1e-8`, so either
/// choice is valid.
pub fn truncate_cut(psi: &mut Amps, n: usize, j: usize, cap: usize, cutoff: f64, mode: NormMode) -> (f64, bool) {
    let rows = 1 << (j + 1);
    let cols = 1 << (n - j - 1);
    let m = DMatrix::from_fn(rows, cols, |r, c| psi[r * cols + c]);
    let left = rows <= cols;
    let gram = if left { &m * m.adjoint() } else { m.adjoint() * &m };
    let eig = gram.symmetric_eigen();
    let weights: Vec<f64> = eig.eigenvalues.iter().map(|w| w.max(0.0)).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap());
    let total: f64 = weights.iter().sum();
    let keep = order
        .iter()
        .take(cap)
        .take_while(|&&k| weights[k] > cutoff * total)
        .count()
        .max(1);
    let ambiguous = order.len() > keep
        && weights[order[keep]] > 1e-10 * total
        && weights[order[keep - 1]] - weights[order[keep]] <= 1e-8 * total;
    let dim = weights.len();
    let mut proj = DMatrix::<Complex64>::zeros(dim, dim);
    let mut kept = 0.0;
    for &k in order.iter().take(keep) {
        let v = eig.eigenvectors.column(k);
        proj += &v * v.adjoint();
        kept += weights[k];
    }
    let mut out = if left { proj * &m } else { &m * proj };
    if mode == NormMode::Normalized {
        out *= Complex64::new((total / kept).sqrt(), 0.0);
    }
    for r in 0..rows {
        for c in 0..cols {
            psi[r * cols + c] = out[(r, c)];
        }
    }
    (1.0 - kept / total, ambiguous)
}

/// Replays the compiled gate sequence on a dense vector, truncating after
/// every two-qubit gate, and returns the state in logical order together
/// with the summed discarded weight, or `None` when some truncation was
/// ambiguous.
pub fn dense_replay(
    model: &IsingModel,
    schedule: &AngleSchedule,
    cap: usize,
    cutoff: f64,
    mode: NormMode,
) -> Option<(Amps, f64)> {
    let n = model.n();
    let circuit = compile_qaoa::<f64>(model, schedule).unwrap();
    let mut psi = plus_state(n);
    let mut discarded = 0.0;
    for g in circuit.gates() {
        match g.sites {
            GateSites::One(k) => {
                let u = [[g.matrix[(0, 0)], g.matrix[(0, 1)]], [g.matrix[(1, 0)], g.matrix[(1, 1)]]];
                apply_one(&mut psi, n, k, &u);
            }
            GateSites::Two(j) => {
                let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
                for (r, row) in m.iter_mut().enumerate() {
                    for (c, x) in row.iter_mut().enumerate() {
                        *x = g.matrix[(r, c)];
                    }
                }
                apply_two(&mut psi, n, j, &m);
                let (d, ambiguous) = truncate_cut(&mut psi, n, j, cap, cutoff, mode);
                if ambiguous {
                    return None;
                }
                discarded += d;
            }
        }
    }
    let perm = circuit.final_perm();
    let mut logical = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (i, a) in psi.iter().enumerate() {
        let mut li = 0;
        for (q, &site) in perm.iter().enumerate() {
            li |= bit(i, site, n) << (n - 1 - q);
        }
        logical[li] = *a;
    }
    Some((logical, discarded))
}

/// Overlap-based distance that ignores a global phase.
pub fn max_abs_diff_up_to_phase(a: &Amps, b: &Amps) -> f64 {
    let ov: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter().zip(b).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}
