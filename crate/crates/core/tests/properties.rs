mod common;

use common::props;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn canonicalization_gives_isometries_and_keeps_the_state(
        n in 2usize..9, bond in 1usize..6, center_frac in 0.0f64..1.0, seed: u64,
    ) {
        props::canonical_form(n, bond, center_frac, seed)?;
    }

    #[test]
    fn gates_respect_bond_bounds_and_keep_canonical_form(
        n in 3usize..9, cap in 1usize..6, gates in 1usize..30, seed: u64,
    ) {
        props::bond_bounds(n, cap, gates, seed)?;
    }

    #[test]
    fn discarded_weights_account_for_the_norm(
        n in 3usize..8, cap in 1usize..4, gates in 1usize..25, seed: u64, normalized: bool,
    ) {
        props::truncation_accounting(n, cap, gates, seed, normalized)?;
    }

    #[test]
    fn swap_network_meets_every_pair_once_and_reverses(n in 2usize..13, seed: u64) {
        props::swap_network(n, seed)?;
    }

    #[test]
    fn maxcut_energy_is_minus_twice_the_cut(n in 2usize..12, w in 0.0f64..1.0, seed: u64, idx: usize) {
        props::maxcut_energy(n, w, seed, idx)?;
    }

    #[test]
    fn ec3_energy_counts_clause_violations(n in 4usize..12, seed: u64, idx: usize) {
        props::ec3_energy(n, seed, idx)?;
    }

    #[test]
    fn generators_are_deterministic(n in 4usize..14, w in 0.0f64..1.0, seed: u64) {
        props::generator_determinism(n, w, seed)?;
    }
}
