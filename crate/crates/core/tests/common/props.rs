//! Property checks shared by the property suite and the acceptance run.
//! Each check takes plain inputs and reports a `TestCaseError` on failure.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};
use qaoa_mps::compiler::{compile_cost_layer, identity_perm, round_pairs, GateSites};
use qaoa_mps::problems::{gen_ec3, gen_maxcut_er};
use qaoa_mps::{Bitstring, CMatrix, IsingModel, MpsState, NormMode};
use rand::Rng;

use super::{fidelity, norm_sqr};

pub type Check = std::result::Result<(), TestCaseError>;

pub fn random_unitary(dim: usize, rng: &mut impl Rng) -> CMatrix<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let q = m.qr().q();
    CMatrix::from_fn(dim, dim, |r, c| q[(r, c)])
}

fn complete_graph_model(n: usize) -> IsingModel {
    let mut m = IsingModel::new(n);
    for i in 0..n {
        for j in i + 1..n {
            m.add_coupling(i, j, 1.0).unwrap();
        }
    }
    m
}

pub fn canonical_form(n: usize, bond: usize, center_frac: f64, seed: u64) -> Check {
    let mut rng = qaoa_mps::seeds::rng(seed);
    let mut s = MpsState::<f64>::random(n, bond, &mut rng).unwrap();
    let before = s.to_statevector().unwrap();
    let center = ((n as f64 * center_frac) as usize).min(n - 1);
    s.canonicalize(center);
    prop_assert_eq!(s.center(), center);
    prop_assert!(s.canonical_error() < 1e-10, "isometry error {}", s.canonical_error());
    let after = s.to_statevector().unwrap();
    prop_assert!((norm_sqr(&after) - norm_sqr(&before)).abs() < 1e-10 * norm_sqr(&before));
    prop_assert!(fidelity(&before, &after) > 1.0 - 1e-10);
    prop_assert!((s.norm_sqr() - norm_sqr(&after)).abs() < 1e-10 * norm_sqr(&after));
    Ok(())
}

pub fn bond_bounds(n: usize, cap: usize, gates: usize, seed: u64) -> Check {
    let mut rng = qaoa_mps::seeds::rng(seed);
    let mut s = MpsState::<f64>::plus_state(n).unwrap().with_bond_cap(cap);
    for _ in 0..gates {
        let j = rng.gen_range(0..n - 1);
        let rep = s.apply_2q(&random_unitary(4, &mut rng), j).unwrap();
        prop_assert!(rep.kept_rank <= cap);
        prop_assert!(s.canonical_error() < 1e-9);
    }
    for (k, &d) in s.bond_dims().iter().enumerate() {
        let exact = 1usize << (k + 1).min(n - k - 1);
        prop_assert!(d <= cap.min(exact), "bond {} is {} (cap {}, exact {})", k, d, cap, exact);
    }
    Ok(())
}

pub fn truncation_accounting(n: usize, cap: usize, gates: usize, seed: u64, normalized: bool) -> Check {
    let mode = if normalized { NormMode::Normalized } else { NormMode::NonNormalized };
    let mut rng = qaoa_mps::seeds::rng(seed);
    let mut s = MpsState::<f64>::plus_state(n).unwrap().with_bond_cap(cap).with_mode(mode);
    let (mut kept, mut summed) = (1.0f64, 0.0f64);
    for _ in 0..gates {
        let j = rng.gen_range(0..n - 1);
        let rep = s.apply_2q(&random_unitary(4, &mut rng), j).unwrap();
        prop_assert!((0.0..=1.0).contains(&rep.discarded_weight));
        kept *= 1.0 - rep.discarded_weight;
        summed += rep.discarded_weight;
    }
    prop_assert!((s.cum_discarded() - summed).abs() < 1e-12);
    let expected = if normalized { 1.0 } else { kept };
    prop_assert!((s.norm_sqr() - expected).abs() < 1e-10);
    prop_assert!((norm_sqr(&s.to_statevector().unwrap()) - expected).abs() < 1e-10);
    Ok(())
}

pub fn swap_network(n: usize, seed: u64) -> Check {
    let mut rng = qaoa_mps::seeds::rng(seed);
    let mut perm = identity_perm(n);
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let (gates, out) = compile_cost_layer::<f64>(&complete_graph_model(n), 0.3, &perm).unwrap();
    let mut seen = BTreeSet::new();
    for g in &gates {
        prop_assert!(matches!(g.sites, GateSites::Two(_)));
        let (a, b) = (g.logical.0, g.logical.1.unwrap());
        prop_assert!(seen.insert((a.min(b), a.max(b))), "pair ({}, {}) met twice", a, b);
    }
    prop_assert_eq!(seen.len(), n * (n - 1) / 2);
    for q in 0..n {
        prop_assert_eq!(out[q], n - 1 - perm[q]);
    }
    let pairs: usize = (0..n).map(|r| round_pairs(n, r).len()).sum();
    prop_assert_eq!(pairs, n * (n - 1) / 2);
    Ok(())
}

pub fn maxcut_energy(n: usize, w: f64, seed: u64, idx: usize) -> Check {
    let g = gen_maxcut_er(n, w, seed).unwrap();
    let s = Bitstring::from_index(idx % (1 << n), n);
    prop_assert_eq!(g.to_ising().classical_energy(&s).unwrap(), -2.0 * g.cut_size(&s) as f64);
    Ok(())
}

pub fn ec3_energy(n: usize, seed: u64, idx: usize) -> Check {
    let inst = gen_ec3(n, seed).unwrap();
    let s = Bitstring::from_index(idx % (1 << n), n);
    let expected: f64 = inst
        .clauses
        .iter()
        .map(|c| {
            let ones = c.iter().map(|&k| s.get(k) as i64).sum::<i64>();
            ((ones - 1) * (ones - 1)) as f64
        })
        .sum();
    prop_assert_eq!(inst.to_ising().classical_energy(&s).unwrap(), expected);
    prop_assert_eq!(expected == 0.0, inst.satisfied(&s));
    Ok(())
}

pub fn generator_determinism(n: usize, w: f64, seed: u64) -> Check {
    prop_assert_eq!(gen_maxcut_er(n, w, seed).unwrap(), gen_maxcut_er(n, w, seed).unwrap());
    prop_assert_eq!(gen_ec3(n, seed).unwrap(), gen_ec3(n, seed).unwrap());
    Ok(())
}

fn report<V: std::fmt::Debug>(r: std::result::Result<(), TestError<V>>) -> Option<String> {
    r.err().map(|e| format!("{e}"))
}

/// Runs every check through a fresh runner; returns `(name, failure)` pairs.
pub fn run_all(cases: u32) -> Vec<(&'static str, Option<String>)> {
    let runner = || TestRunner::new(Config { cases, ..Config::default() });
    vec![
        (
            "canonical form",
            report(runner().run(&(2usize..9, 1usize..6, 0.0f64..1.0, any::<u64>()), |(n, b, c, s)| {
                canonical_form(n, b, c, s)
            })),
        ),
        (
            "bond bounds",
            report(runner().run(&(3usize..9, 1usize..6, 1usize..30, any::<u64>()), |(n, c, g, s)| {
                bond_bounds(n, c, g, s)
            })),
        ),
        (
            "truncation accounting",
            report(runner().run(&(3usize..8, 1usize..4, 1usize..25, any::<u64>(), any::<bool>()), |(n, c, g, s, m)| {
                truncation_accounting(n, c, g, s, m)
            })),
        ),
        (
            "swap network",
            report(runner().run(&(2usize..13, any::<u64>()), |(n, s)| swap_network(n, s))),
        ),
        (
            "maxcut energy",
            report(runner().run(&(2usize..12, 0.0f64..1.0, any::<u64>(), any::<usize>()), |(n, w, s, i)| {
                maxcut_energy(n, w, s, i)
            })),
        ),
        (
            "ec3 energy",
            report(runner().run(&(4usize..12, any::<u64>(), any::<usize>()), |(n, s, i)| ec3_energy(n, s, i))),
        ),
        (
            "generator determinism",
            report(runner().run(&(4usize..14, 0.0f64..1.0, any::<u64>()), |(n, w, s)| generator_determinism(n, w, s))),
        ),
    ]
}
