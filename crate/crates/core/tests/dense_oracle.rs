mod common;

use common::*;
use qaoa_mps::engine::run_qaoa;
use qaoa_mps::problems::{gen_ec3, gen_maxcut_er};
use qaoa_mps::sampler::TIE_TOLERANCE;
use qaoa_mps::trainer::{grid_axis, landscape_p1, success_percentage_approx, CostEvaluator};
use qaoa_mps::{deterministic_sample, AngleSchedule, IsingModel, NormMode, SimOptions};
use rand::Rng;

fn random_schedule(p: usize, seed: u64) -> AngleSchedule {
    let mut rng = qaoa_mps::seeds::rng(seed);
    let gamma = (0..p).map(|_| rng.gen_range(0.0..std::f64::consts::PI)).collect();
    let beta = (0..p).map(|_| rng.gen_range(-1.5..1.5)).collect();
    AngleSchedule::new(gamma, beta).unwrap()
}

fn models(n: usize, count: u64) -> Vec<IsingModel> {
    (0..count)
        .map(|s| {
            if s % 2 == 0 {
                gen_maxcut_er(n, 0.5, s).unwrap().to_ising()
            } else {
                gen_ec3(n, s).unwrap().to_ising()
            }
        })
        .collect()
}

#[test]
fn exact_runs_match_the_statevector() {
    for (k, model) in models(7, 6).iter().enumerate() {
        let sched = random_schedule(3, k as u64);
        let (state, _) = run_qaoa::<f64>(model, &sched, &SimOptions::exact(7)).unwrap();
        let mps = state.to_statevector().unwrap();
        let dense = dense_qaoa(model, &sched);
        assert!(max_abs_diff_up_to_phase(&mps, &dense) < 1e-10);
        let eval = CostEvaluator::contracted(model);
        let c = eval.eval(&state, NormMode::NonNormalized).unwrap();
        assert!((c - dense_cost(model, &dense, false)).abs() < 1e-9);
    }
}

#[test]
fn truncated_runs_match_the_dense_replay() {
    let (mut checked, mut total) = (0, 0);
    for (k, model) in models(8, 4).iter().enumerate() {
        let sched = random_schedule(2, 100 + k as u64);
        for mode in [NormMode::NonNormalized, NormMode::Normalized] {
            for cap in [1, 2, 3] {
                let opts = SimOptions::new(cap).with_mode(mode);
                let (state, diag) = run_qaoa::<f64>(model, &sched, &opts).unwrap();
                total += 1;
                let Some((dense, discarded)) = dense_replay(model, &sched, cap, opts.cutoff, mode) else {
                    continue;
                };
                checked += 1;
                let mps = state.to_statevector().unwrap();
                assert!(
                    (norm_sqr(&mps) - norm_sqr(&dense)).abs() < 1e-9,
                    "{mode} cap {cap}: {} vs {}",
                    norm_sqr(&mps),
                    norm_sqr(&dense)
                );
                assert!(fidelity(&mps, &dense) > 1.0 - 1e-9, "{mode} cap {cap}");
                assert!((diag.cum_discarded - discarded).abs() < 1e-9);
                let eval = CostEvaluator::new(model);
                let normalized = mode == NormMode::Normalized;
                let c = eval.eval(&state, mode).unwrap();
                assert!((c - dense_cost(model, &dense, normalized)).abs() < 1e-8);
            }
        }
    }
    assert!(checked * 4 >= total * 3, "only {checked} of {total} runs had unambiguous truncations");
}

#[test]
fn samples_match_the_dense_pipeline() {
    for (k, model) in models(8, 6).iter().enumerate() {
        let sched = random_schedule(2, 200 + k as u64);
        let (state, _) = run_qaoa::<f64>(model, &sched, &SimOptions::exact(8)).unwrap();
        let s = deterministic_sample(&state).unwrap();
        let (bits, prob) = dense_sample(&dense_qaoa(model, &sched), 8, TIE_TOLERANCE);
        assert_eq!(s.bits, bits);
        assert!((s.probability - prob).abs() < 1e-10);
    }
}

#[test]
fn approximate_success_matches_the_dense_replay() {
    let model = gen_maxcut_er(8, 0.5, 11).unwrap().to_ising();
    let sols: Vec<_> = model.brute_force_ground().unwrap().bitstrings().collect();
    let sched = random_schedule(2, 5);
    let eta = success_percentage_approx::<f64>(&model, &sched, 2, 2, &sols).unwrap();
    let (dense, _) = dense_replay(&model, &sched, 2, 0.0, NormMode::Normalized).expect("unambiguous truncations");
    let mass: f64 = sols.iter().map(|s| dense[s.to_index()].norm_sqr()).sum();
    assert!((eta - mass / norm_sqr(&dense) * 100.0).abs() < 1e-8);
}

#[test]
fn exact_landscape_argmin_matches_the_dense_one() {
    let model = gen_maxcut_er(8, 0.5, 21).unwrap().to_ising();
    let gammas = grid_axis(std::f64::consts::PI, 12);
    let betas = grid_axis(std::f64::consts::FRAC_PI_2, 12);
    let land = landscape_p1::<f64>(&model, 16, &gammas, &betas, NormMode::NonNormalized).unwrap();
    let mut dense = vec![vec![0.0; betas.len()]; gammas.len()];
    for (i, &g) in gammas.iter().enumerate() {
        for (k, &b) in betas.iter().enumerate() {
            let v = dense_cost(&model, &dense_qaoa(&model, &AngleSchedule::p1(g, b)), false);
            assert!((v - land.values[i][k]).abs() < 1e-9);
            dense[i][k] = v;
        }
    }
    // Symmetric cells can tie, so compare the minimum rather than the index.
    let best = dense.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let (i, k) = land.argmin;
    assert!((dense[i][k] - best).abs() < 1e-9);
}

#[test]
fn single_precision_tracks_double() {
    let model = gen_ec3(8, 3).unwrap().to_ising();
    let sched = random_schedule(3, 9);
    let (s32, _) = run_qaoa::<f32>(&model, &sched, &SimOptions::new(4)).unwrap();
    let (s64, _) = run_qaoa::<f64>(&model, &sched, &SimOptions::new(4)).unwrap();
    let a: Vec<_> = s32.to_statevector().unwrap();
    let b = s64.to_statevector().unwrap();
    let diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| ((f64::from(x.re) - y.re).powi(2) + (f64::from(x.im) - y.im).powi(2)).sqrt())
        .fold(0.0, f64::max);
    assert!(diff < 1e-4, "{diff}");
}
