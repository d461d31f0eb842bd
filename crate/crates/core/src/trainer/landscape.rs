use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnglePeriods, CostEvaluator};
use crate::compiler::{compile_cost_layer, identity_perm, mixer_gate};
use crate::engine::{apply_gates, SimOptions};
use crate::error::{Error, Result};
use crate::mps::{MpsState, NormMode};
use crate::problems::IsingModel;
use crate::scalar::Real;
use crate::schedule::{AngleSchedule, Method, Provenance};

/// p = 1 cost values on a `gamma x beta` grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub gamma: Vec<f64>,
    pub beta: Vec<f64>,
    /// `values[i][k]` is the cost at `(gamma[i], beta[k])`.
    pub values: Vec<Vec<f64>>,
    pub bond_dim: usize,
    pub mode: NormMode,
    /// Grid indices of the smallest value; ties go to the smallest `gamma`,
    /// then the smallest `beta`.
    pub argmin: (usize, usize),
}

impl Landscape {
    pub fn min_value(&self) -> f64 {
        self.values[self.argmin.0][self.argmin.1]
    }

    pub fn argmin_angles(&self) -> (f64, f64) {
        (self.gamma[self.argmin.0], self.beta[self.argmin.1])
    }

    pub fn max_abs_diff(&self, other: &Landscape) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Rows `gamma, beta, value`, one per grid cell.
    pub fn write_csv<W: Write>(&self, out: W, comment: &[String]) -> Result<()> {
        let mut out = out;
        for line in comment {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gamma", "beta", "value"])?;
        for (i, g) in self.gamma.iter().enumerate() {
            for (k, b) in self.beta.iter().enumerate() {
                w.write_record([g.to_string(), b.to_string(), self.values[i][k].to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn argmin(values: &[Vec<f64>]) -> (usize, usize) {
    let mut best = (0, 0);
    let mut best_v = f64::INFINITY;
    for (i, row) in values.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v < best_v {
                best_v = v;
                best = (i, k);
            }
        }
    }
    best
}

/// `resolution` evenly spaced points on `[0, width)`.
pub fn grid_axis(width: f64, resolution: usize) -> Vec<f64> {
    (0..resolution).map(|k| width * k as f64 / resolution as f64).collect()
}

/// Evaluates the p = 1 cost on every grid cell. The cost layer is simulated
/// once per `gamma` row; only the mixer is redone per `beta`.
pub fn landscape_p1<T: Real>(
    model: &IsingModel,
    bond_dim: usize,
    gamma_grid: &[f64],
    beta_grid: &[f64],
    mode: NormMode,
) -> Result<Landscape> {
    if gamma_grid.is_empty() || beta_grid.is_empty() {
        return Err(Error::contract("landscape grids must be non-empty"));
    }
    if bond_dim == 0 {
        return Err(Error::InvalidSize("bond cap must be at least 1".into()));
    }
    let n = model.n();
    let opts = SimOptions::new(bond_dim).with_mode(mode);
    let evaluator = CostEvaluator::new(model);
    let rows: Vec<Result<Vec<f64>>> = gamma_grid
        .par_iter()
        .map(|&gamma| {
            let (gates, _) = compile_cost_layer::<T>(model, gamma, &identity_perm(n))?;
            let mut state = MpsState::<T>::plus_state(n)?
                .with_bond_cap(opts.bond_cap)
                .with_cutoff(T::lit(opts.cutoff))
                .with_mode(mode);
            apply_gates(&mut state, &gates, |_| {})?;
            state.reverse();
            beta_grid
                .iter()
                .map(|&beta| {
                    let u = mixer_gate::<T>(beta);
                    let mut s = state.clone();
                    for k in 0..n {
                        s.apply_1q(&u, k)?;
                    }
                    evaluator.eval(&s, mode)
                })
                .collect()
        })
        .collect();
    let values = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let argmin = argmin(&values);
    Ok(Landscape {
        gamma: gamma_grid.to_vec(),
        beta: beta_grid.to_vec(),
        values,
        bond_dim,
        mode,
        argmin,
    })
}

/// Best cell of a `resolution x resolution` landscape over the symmetry
/// box of the model.
pub fn grid_search_p1<T: Real>(
    model: &IsingModel,
    bond_dim: usize,
    resolution: usize,
    mode: NormMode,
) -> Result<(AngleSchedule, Landscape)> {
    if resolution < 8 {
        return Err(Error::contract("grid resolution must be at least 8 per axis"));
    }
    let periods = AnglePeriods::of(model);
    let gammas = grid_axis(periods.gamma_box(), resolution);
    let betas = grid_axis(periods.beta, resolution);
    let land = landscape_p1::<T>(model, bond_dim, &gammas, &betas, mode)?;
    let (g, b) = land.argmin_angles();
    let sched = AngleSchedule::p1(g, b).with_provenance(Provenance {
        method: Method::Grid,
        bond_dim: Some(bond_dim),
        note: Some(format!("{resolution}x{resolution} grid, {mode}")),
        ..Provenance::default()
    });
    Ok((sched, land))
}
