use crate::bits::Bitstring;
use crate::engine::{full_bond, run_qaoa, SimOptions};
use crate::error::{Error, Result};
use crate::mps::{MpsState, NormMode};
use crate::problems::IsingModel;
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

/// Probability mass of `solutions` in the normalized `state`, in percent.
pub fn success_percentage_of_state<T: Real>(state: &MpsState<T>, solutions: &[Bitstring]) -> Result<f64> {
    if solutions.is_empty() {
        return Err(Error::contract("solution set is empty"));
    }
    let mut unique: Vec<&Bitstring> = solutions.iter().collect();
    unique.sort();
    unique.dedup();
    let weight = state.norm_sqr().as_f64();
    if weight <= 0.0 {
        return Err(Error::DegenerateState("state has zero norm"));
    }
    let mut mass = 0.0;
    for s in unique {
        mass += state.amplitude(s)?.norm_sqr().as_f64();
    }
    Ok((mass / weight * 100.0).clamp(0.0, 100.0))
}

fn simulate<T: Real>(model: &IsingModel, schedule: &AngleSchedule, j: usize, bond_dim: usize) -> Result<MpsState<T>> {
    if j > schedule.p() {
        return Err(Error::contract(format!("depth {j} exceeds schedule depth {}", schedule.p())));
    }
    let opts = SimOptions::new(bond_dim).with_cutoff(0.0).with_mode(NormMode::Normalized);
    Ok(run_qaoa::<T>(model, &schedule.prefix(j)?, &opts)?.0)
}

/// Success percentage of the exact QAOA state built from the first `j`
/// angle pairs.
pub fn success_percentage_exact<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    j: usize,
    solutions: &[Bitstring],
) -> Result<f64> {
    if solutions.is_empty() {
        return Err(Error::contract("solution set is empty"));
    }
    let state = simulate::<T>(model, schedule, j, full_bond(model.n()))?;
    success_percentage_of_state(&state, solutions)
}

/// Success percentage of the renormalized bond-capped state.
pub fn success_percentage_approx<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    j: usize,
    bond_dim: usize,
    solutions: &[Bitstring],
) -> Result<f64> {
    if solutions.is_empty() {
        return Err(Error::contract("solution set is empty"));
    }
    let state = simulate::<T>(model, schedule, j, bond_dim)?;
    success_percentage_of_state(&state, solutions)
}

/// `candidate / reference * 100`; may exceed 100.
pub fn normalized_success(candidate: f64, reference: f64) -> Result<f64> {
    if reference <= 0.0 || !reference.is_finite() {
        return Err(Error::contract("reference success percentage must be positive"));
    }
    Ok(candidate / reference * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::MaxCutInstance;
    use num_complex::Complex;

    fn ring(n: usize) -> IsingModel {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        MaxCutInstance::from_edges(n, &edges).unwrap().to_ising()
    }

    #[test]
    fn zero_angles_give_the_random_baseline() {
        let model = ring(12);
        let ground = model.brute_force_ground().unwrap();
        assert_eq!(ground.count(), 2);
        let eta = success_percentage_exact::<f64>(&model, &AngleSchedule::zeros(3), 3, &ground.bitstrings().collect::<Vec<_>>()).unwrap();
        assert!((eta - 2.0 / 4096.0 * 100.0).abs() < 1e-10);
        assert!((eta - 0.0488).abs() < 1e-4);
    }

    #[test]
    fn solution_superposition_is_certain() {
        let sols = [Bitstring::from_index(5, 4), Bitstring::from_index(10, 4)];
        let mut amps = vec![Complex::new(0.0, 0.0); 16];
        amps[5] = Complex::new(0.6, 0.0);
        amps[10] = Complex::new(0.0, 0.8);
        let state = MpsState::<f64>::from_statevector(&amps).unwrap();
        let eta = success_percentage_of_state(&state, &sols).unwrap();
        assert!((eta - 100.0).abs() < 1e-10);
        assert!(success_percentage_of_state(&state, &[]).is_err());
    }

    #[test]
    fn full_bond_matches_exact_and_product_schedules_ignore_the_cap() {
        let model = ring(8);
        let sols = model.brute_force_ground().unwrap().bitstrings().collect::<Vec<_>>();
        let sched = AngleSchedule::new(vec![0.4, 0.7], vec![0.5, 0.3]).unwrap();
        let exact = success_percentage_exact::<f64>(&model, &sched, 2, &sols).unwrap();
        let full = success_percentage_approx::<f64>(&model, &sched, 2, 16, &sols).unwrap();
        assert!((exact - full).abs() < 1e-10);
        let flat = AngleSchedule::new(vec![0.0, 0.0], vec![0.5, 0.3]).unwrap();
        let a = success_percentage_exact::<f64>(&model, &flat, 2, &sols).unwrap();
        let b = success_percentage_approx::<f64>(&model, &flat, 2, 1, &sols).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!(success_percentage_exact::<f64>(&model, &sched, 3, &sols).is_err());
    }

    #[test]
    fn normalized_ratio() {
        assert_eq!(normalized_success(50.0, 100.0).unwrap(), 50.0);
        assert!((normalized_success(1.2, 1.0).unwrap() - 120.0).abs() < 1e-12);
        assert!(normalized_success(1.0, 0.0).is_err());
    }
}
