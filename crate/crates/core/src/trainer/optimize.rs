use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{extrapolate_schedule, grid_search_p1, ramp, AnglePeriods, CostEvaluator};
use crate::engine::SimOptions;
use crate::error::{Error, Result};
use crate::mps::NormMode;
use crate::problems::{IsingModel, ProblemInstance};
use crate::scalar::Real;
use crate::schedule::{AngleSchedule, Method, Provenance};
use crate::seeds;

/// `(initial points, total evaluations)` pairs used as the optimizer budget
/// vocabulary.
pub const APPENDIX_BUDGETS: [(usize, usize); 5] = [(125, 300), (150, 400), (200, 500), (250, 600), (300, 700)];

/// Result of a Nelder–Mead run.
#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Best value seen after each evaluation.
    pub trace: Vec<f64>,
}

struct Counted<F> {
    f: F,
    cap: usize,
    best: f64,
    best_x: Vec<f64>,
    trace: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Counted<F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.trace.len() >= self.cap {
            return Ok(None);
        }
        let v = (self.f)(x)?;
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.best {
            self.best = v;
            self.best_x = x.to_vec();
        }
        self.trace.push(self.best);
        Ok(Some(v))
    }
}

/// Nelder–Mead simplex descent from `x0` with per-axis initial steps,
/// stopping after `max_evals` evaluations or when the simplex values agree
/// within `ftol`. The returned point is the best ever evaluated.
pub fn nelder_mead<F>(f: F, x0: &[f64], step: &[f64], max_evals: usize, ftol: f64) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    if step.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            got: step.len(),
        });
    }
    let mut c = Counted {
        f,
        cap: max_evals,
        best: f64::INFINITY,
        best_x: x0.to_vec(),
        trace: Vec::new(),
    };
    let finish = |c: Counted<F>| Minimum {
        x: c.best_x,
        value: c.best,
        evals: c.trace.len(),
        trace: c.trace,
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    for i in 0..=dim {
        let mut x = x0.to_vec();
        if i > 0 {
            x[i - 1] += step[i - 1];
        }
        match c.eval(&x)? {
            Some(v) => simplex.push((x, v)),
            None => return Ok(finish(c)),
        }
    }
    let order = |a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)| a.1.partial_cmp(&b.1).unwrap_or(Ordering::Equal);
    let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
        from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
    };

    loop {
        simplex.sort_by(order);
        let spread = simplex[dim].1 - simplex[0].1;
        if spread.abs() <= ftol || dim == 0 {
            return Ok(finish(c));
        }
        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (cj, xj) in centroid.iter_mut().zip(x) {
                *cj += xj / dim as f64;
            }
        }
        let worst = simplex[dim].clone();
        let xr = along(&centroid, &worst.0, -REFLECT);
        let Some(fr) = c.eval(&xr)? else {
            return Ok(finish(c));
        };
        if fr < simplex[0].1 {
            let xe = along(&centroid, &xr, EXPAND);
            let Some(fe) = c.eval(&xe)? else {
                return Ok(finish(c));
            };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, outside) = if fr < worst.1 {
            (along(&centroid, &xr, CONTRACT), true)
        } else {
            (along(&centroid, &worst.0, CONTRACT), false)
        };
        let Some(fc) = c.eval(&xc)? else {
            return Ok(finish(c));
        };
        if (outside && fc <= fr) || (!outside && fc < worst.1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = along(&best, &vertex.0, SHRINK);
            let Some(v) = c.eval(&x)? else {
                return Ok(finish(c));
            };
            *vertex = (x, v);
        }
    }
}

/// Latin hypercube design of `count` points in `[0, widths[d])` per axis.
pub fn lhs_design<R: Rng + ?Sized>(count: usize, widths: &[f64], rng: &mut R) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; widths.len()]; count];
    for (d, &w) in widths.iter().enumerate() {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        for (point, s) in points.iter_mut().zip(strata) {
            point[d] = w * (s as f64 + rng.gen::<f64>()) / count as f64;
        }
    }
    points
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub schedule: AngleSchedule,
    pub cost: f64,
    pub evals: usize,
    /// Incumbent cost after each evaluation.
    pub trace: Vec<f64>,
}

/// Latin-hypercube initial design followed by Nelder–Mead restarts from the
/// best design points, all within `budget = (init_points, total_evals)`.
///
/// Restarts have a fixed cap and run from the design points in rank order,
/// so a larger `total_evals` (same seed and `init_points`) replays the
/// smaller run as a prefix and never ends with a worse incumbent.
pub fn global_optimize<T: Real>(
    model: &IsingModel,
    p: usize,
    bond_dim: usize,
    budget: (usize, usize),
    seed: u64,
    mode: NormMode,
) -> Result<OptimizeResult> {
    let (init, total) = budget;
    let dim = 2 * p;
    if p == 0 || init < dim.max(2) || total <= init {
        return Err(Error::contract(format!(
            "budget ({init}, {total}) invalid for depth {p}: need total > init >= 2p"
        )));
    }
    let periods = AnglePeriods::of(model);
    let widths: Vec<f64> = (0..dim)
        .map(|d| if d % 2 == 0 { periods.gamma_box() } else { periods.beta })
        .collect();
    let opts = SimOptions::new(bond_dim).with_mode(mode);
    let evaluator = CostEvaluator::new(model);
    let cost = |x: &[f64]| evaluator.schedule_cost::<T>(&AngleSchedule::from_flat(x), &opts);

    let mut rng = seeds::rng(seeds::derive(seed, &[0]));
    let design = lhs_design(init, &widths, &mut rng);
    let values = design.par_iter().map(|x| cost(x)).collect::<Result<Vec<f64>>>()?;
    let mut ranked: Vec<usize> = (0..init).collect();
    ranked.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));

    let per_restart = (20 * (dim + 1)).max(30);
    let remaining = total - init;
    let mut caps = Vec::new();
    let mut left = remaining;
    while left > 0 && caps.len() < init {
        let cap = if caps.len() + 1 == init { left } else { per_restart.min(left) };
        caps.push(cap);
        left -= cap;
    }
    let step: Vec<f64> = widths.iter().map(|w| 0.1 * w).collect();
    let restarts = caps
        .par_iter()
        .enumerate()
        .map(|(k, &cap)| nelder_mead(cost, &design[ranked[k]], &step, cap, 1e-10))
        .collect::<Result<Vec<Minimum>>>()?;

    let mut trace = Vec::with_capacity(total);
    let mut best_v = f64::INFINITY;
    let mut best_x = design[ranked[0]].clone();
    for (x, &v) in design.iter().zip(&values) {
        if v < best_v {
            best_v = v;
            best_x = x.clone();
        }
        trace.push(best_v);
    }
    for m in &restarts {
        for &t in &m.trace {
            trace.push(best_v.min(t));
        }
        if m.value < best_v {
            best_v = m.value;
            best_x = m.x.clone();
        }
        if let Some(last) = trace.last_mut() {
            *last = best_v;
        }
    }
    let schedule = AngleSchedule::from_flat(&best_x).with_provenance(Provenance {
        method: Method::Multistart,
        bond_dim: Some(bond_dim),
        budget: Some(budget),
        seed: Some(seed),
        note: Some(format!("LHS + Nelder-Mead, {mode}")),
    });
    Ok(OptimizeResult {
        schedule,
        cost: best_v,
        evals: trace.len(),
        trace,
    })
}

/// Which parameters the local refinement of an extrapolated schedule moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefineMode {
    /// The two ramp endpoints.
    #[default]
    Ramp,
    /// Every angle independently.
    Full,
}

/// Local Nelder–Mead refinement. The result is never worse than the input.
/// Returns the refined schedule with its cost and the input cost.
pub fn refine_schedule<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    bond_dim: usize,
    mode: NormMode,
    refine: RefineMode,
    max_evals: usize,
) -> Result<(AngleSchedule, f64, f64)> {
    let opts = SimOptions::new(bond_dim).with_mode(mode);
    let evaluator = CostEvaluator::new(model);
    let before = evaluator.schedule_cost::<T>(schedule, &opts)?;
    if max_evals == 0 || schedule.p() == 0 {
        return Ok((schedule.clone(), before, before));
    }
    let periods = AnglePeriods::of(model);
    let p = schedule.p();
    let (x0, step, build): (Vec<f64>, Vec<f64>, Box<dyn Fn(&[f64]) -> AngleSchedule + Sync>) = match refine {
        RefineMode::Ramp => {
            let g = schedule.gamma[p - 1];
            let b = schedule.beta[0];
            (
                vec![g, b],
                vec![0.05 * periods.gamma_box(), 0.05 * periods.beta],
                Box::new(move |x: &[f64]| ramp(x[0], x[1], p)),
            )
        }
        RefineMode::Full => {
            let step = (0..2 * p)
                .map(|d| 0.02 * if d % 2 == 0 { periods.gamma_box() } else { periods.beta })
                .collect();
            (schedule.to_flat(), step, Box::new(AngleSchedule::from_flat))
        }
    };
    let m = nelder_mead(
        |x| evaluator.schedule_cost::<T>(&build(x), &opts),
        &x0,
        &step,
        max_evals,
        1e-10,
    )?;
    if m.value < before {
        let mut refined = build(&m.x);
        refined.provenance = Provenance {
            method: Method::Refined,
            bond_dim: Some(bond_dim),
            note: Some(format!("Nelder-Mead {refine:?}, {} evals", m.evals)),
            ..schedule.provenance.clone()
        };
        Ok((refined, m.value, before))
    } else {
        Ok((schedule.clone(), before, before))
    }
}

/// Settings of [`shared_angle_set`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedOptions {
    pub resolution: usize,
    pub refine: RefineMode,
    pub refine_evals: usize,
    pub mode: NormMode,
}

impl Default for SharedOptions {
    fn default() -> Self {
        Self {
            resolution: 40,
            refine: RefineMode::Ramp,
            refine_evals: 40,
            mode: NormMode::NonNormalized,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SharedAngles {
    pub schedule: AngleSchedule,
    pub per_instance: Vec<AngleSchedule>,
    /// `(before, after)` refinement cost per instance.
    pub costs: Vec<(f64, f64)>,
}

/// Per instance: p = 1 grid search, ramp extrapolation to `p_max`, local
/// refinement; then the component-wise mean over instances.
pub fn shared_angle_set<T: Real>(
    instances: &[ProblemInstance],
    bond_dim: usize,
    p_max: usize,
    options: &SharedOptions,
) -> Result<SharedAngles> {
    let Some(first) = instances.first() else {
        return Err(Error::contract("shared angle set needs at least one instance"));
    };
    if instances.iter().any(|i| i.kind() != first.kind()) {
        return Err(Error::contract("shared angle set instances must share a problem kind"));
    }
    let per: Vec<(AngleSchedule, f64, f64)> = instances
        .par_iter()
        .map(|inst| {
            let model = inst.to_ising();
            let (p1, _) = grid_search_p1::<T>(&model, bond_dim, options.resolution, options.mode)?;
            let ext = extrapolate_schedule(&model, &p1, p_max)?;
            let (refined, after, before) =
                refine_schedule::<T>(&model, &ext, bond_dim, options.mode, options.refine, options.refine_evals)?;
            Ok((refined, before, after))
        })
        .collect::<Result<Vec<_>>>()?;
    let count = per.len() as f64;
    let mut gamma = vec![0.0; p_max];
    let mut beta = vec![0.0; p_max];
    for (s, _, _) in &per {
        for j in 0..p_max {
            gamma[j] += s.gamma[j] / count;
            beta[j] += s.beta[j] / count;
        }
    }
    let schedule = if per.len() == 1 {
        per[0].0.clone()
    } else {
        AngleSchedule {
            gamma,
            beta,
            provenance: Provenance {
                method: Method::Shared,
                bond_dim: Some(bond_dim),
                note: Some(format!("mean of {} refined schedules", per.len())),
                ..Provenance::default()
            },
        }
    };
    Ok(SharedAngles {
        schedule,
        costs: per.iter().map(|(_, b, a)| (*b, *a)).collect(),
        per_instance: per.into_iter().map(|(s, _, _)| s).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_maxcut_er;

    #[test]
    fn nelder_mead_finds_a_quadratic_minimum() {
        let f = |x: &[f64]| Ok((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 0.5).powi(2));
        let m = nelder_mead(f, &[0.0, 0.0], &[0.3, 0.3], 400, 1e-14).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] + 0.5).abs() < 1e-4);
        assert!(m.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(m.evals <= 400);
    }

    #[test]
    fn nelder_mead_respects_budget_and_prefix() {
        let f = |x: &[f64]| Ok(x.iter().map(|v| v.sin() + 0.1 * v * v).sum::<f64>());
        let short = nelder_mead(f, &[2.0, 1.0, 0.5], &[0.2; 3], 17, 0.0).unwrap();
        let long = nelder_mead(f, &[2.0, 1.0, 0.5], &[0.2; 3], 60, 0.0).unwrap();
        assert_eq!(short.evals, 17);
        assert_eq!(&long.trace[..17], &short.trace[..]);
    }

    #[test]
    fn lhs_stratifies_each_axis() {
        let mut rng = seeds::rng(1);
        let pts = lhs_design(10, &[1.0, 2.0], &mut rng);
        for (d, w) in [(0usize, 1.0f64), (1, 2.0)] {
            let mut strata: Vec<usize> = pts.iter().map(|p| (p[d] / w * 10.0) as usize).collect();
            strata.sort_unstable();
            assert_eq!(strata, (0..10).collect::<Vec<_>>());
        }
    }

    #[test]
    fn global_optimize_contract_and_determinism() {
        let model = gen_maxcut_er(5, 0.5, 6).unwrap().to_ising();
        assert!(global_optimize::<f64>(&model, 2, 4, (3, 10), 0, NormMode::Normalized).is_err());
        let a = global_optimize::<f64>(&model, 1, 4, (10, 40), 3, NormMode::Normalized).unwrap();
        let b = global_optimize::<f64>(&model, 1, 4, (10, 40), 3, NormMode::Normalized).unwrap();
        assert_eq!(a, b);
        assert!(a.evals <= 40);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    }
}
