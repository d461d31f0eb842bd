use rand::Rng;

use super::IsingModel;
use crate::bits::Bitstring;
use crate::seeds;

/// Best-found low-energy assignment from seeded simulated annealing with a
/// greedy single-flip descent at the end of every restart. Carries no
/// optimality guarantee.
pub fn best_found(model: &IsingModel, restarts: usize, sweeps: usize, seed: u64) -> (f64, Bitstring) {
    let n = model.n();
    let adj = model.adjacency();
    let h = model.fields();
    let mut best: Option<(f64, Vec<f64>)> = None;

    for restart in 0..restarts.max(1) {
        let mut rng = seeds::rng(seeds::derive(seed, &[restart as u64]));
        let mut z: Vec<f64> = (0..n).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut local: Vec<f64> = (0..n)
            .map(|k| h[k] + adj[k].iter().map(|&(j, v)| v * z[j]).sum::<f64>())
            .collect();
        let flip = |k: usize, z: &mut Vec<f64>, local: &mut Vec<f64>| {
            let old = z[k];
            z[k] = -old;
            for &(j, v) in &adj[k] {
                local[j] -= 2.0 * v * old;
            }
        };

        let scale = adj
            .iter()
            .zip(h)
            .map(|(row, hk)| hk.abs() + row.iter().map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1e-12);
        let (t_hot, t_cold) = (2.0 * scale, 0.02 * scale);
        let steps = sweeps.max(1);
        for sweep in 0..steps {
            let frac = sweep as f64 / steps as f64;
            let temp = t_hot * (t_cold / t_hot).powf(frac);
            for k in 0..n {
                let delta = -2.0 * z[k] * local[k];
                if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                    flip(k, &mut z, &mut local);
                }
            }
        }
        loop {
            let mut improved = false;
            for k in 0..n {
                if -2.0 * z[k] * local[k] < -1e-12 {
                    flip(k, &mut z, &mut local);
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        let e = model.energy_of_spins(&z);
        if best.as_ref().is_none_or(|(b, _)| e < *b) {
            best = Some((e, z));
        }
    }
    let (e, z) = best.expect("at least one restart");
    let bits = z.iter().map(|&x| u8::from(x > 0.0)).collect();
    (e, Bitstring::new(bits).expect("0/1 bits"))
}
