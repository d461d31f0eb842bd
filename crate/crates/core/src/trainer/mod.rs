//! Classical training of QAOA angles on exact and bond-capped states.
//!
//! Costs are `<H>` of the simulated state. In non-normalized mode (the
//! default) the raw bilinear form `<psi|H|psi>` of the truncated state is
//! used, so truncation loss shrinks the landscape instead of being hidden by
//! renormalization.

mod landscape;
mod optimize;
mod success;

use std::f64::consts::PI;

use crate::bits::Bitstring;
use crate::engine::{run_qaoa, SimOptions};
use crate::error::Result;
use crate::mps::{MpsState, NormMode};
use crate::problems::IsingModel;
use crate::scalar::Real;
use crate::schedule::{AngleSchedule, Method, Provenance};

pub use landscape::{grid_axis, grid_search_p1, landscape_p1, Landscape};
pub use optimize::{
    global_optimize, lhs_design, nelder_mead, refine_schedule, shared_angle_set, Minimum, OptimizeResult, RefineMode,
    SharedAngles, SharedOptions, APPENDIX_BUDGETS,
};
pub use success::{normalized_success, success_percentage_approx, success_percentage_exact, success_percentage_of_state};

/// Registers up to this size evaluate costs through the dense amplitude
/// vector; larger ones contract correlations directly on the MPS.
pub const DENSE_COST_LIMIT: usize = 16;

/// Periods of the p = 1 cost landscape in `gamma` and `beta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnglePeriods {
    /// `None` when the coefficients admit no common period.
    pub gamma: Option<f64>,
    pub beta: f64,
}

impl AnglePeriods {
    pub fn of(model: &IsingModel) -> Self {
        let coeffs = || model.fields().iter().copied().chain(model.couplings().map(|(_, j)| j));
        let gamma = if coeffs().all(|x| x.fract() == 0.0) {
            Some(PI)
        } else if coeffs().all(|x| (2.0 * x).fract() == 0.0) {
            Some(2.0 * PI)
        } else {
            None
        };
        // Without fields the cost is invariant under a global spin flip,
        // which halves the mixer period.
        let beta = if model.has_fields() { PI } else { PI / 2.0 };
        Self { gamma, beta }
    }

    /// Width of the `gamma` search box.
    pub fn gamma_box(&self) -> f64 {
        self.gamma.unwrap_or(2.0 * PI)
    }

    /// Equivalent `(gamma, beta)` with `gamma` in `[0, P/2]` and `beta` in
    /// `(-Pb/2, Pb/2]`, using periodicity and time reversal
    /// `(gamma, beta) -> (-gamma, -beta)`.
    pub fn centered(&self, gamma: f64, beta: f64) -> (f64, f64) {
        let wrap = |x: f64, period: f64| {
            let mut y = x.rem_euclid(period);
            if y > period / 2.0 {
                y -= period;
            }
            y
        };
        let mut g = self.gamma.map_or(gamma, |p| wrap(gamma, p));
        let mut b = wrap(beta, self.beta);
        if g < 0.0 {
            g = -g;
            b = wrap(-b, self.beta);
        }
        (g, b)
    }
}

/// Linear ramp anchored at the p = 1 optimum: `gamma_j = g* j / p` and
/// `beta_j = b* (1 - (j - 1) / p)` for `j = 1..p`, where `(g*, b*)` is the
/// centered representative of the optimum. Depth 1 returns the input.
pub fn extrapolate_schedule(model: &IsingModel, p1_opt: &AngleSchedule, p: usize) -> Result<AngleSchedule> {
    if p1_opt.p() != 1 {
        return Err(crate::error::Error::contract("extrapolation needs a depth-1 schedule"));
    }
    if p == 0 {
        return Err(crate::error::Error::contract("extrapolation depth must be at least 1"));
    }
    if p == 1 {
        return Ok(p1_opt.clone());
    }
    let (g, b) = AnglePeriods::of(model).centered(p1_opt.gamma[0], p1_opt.beta[0]);
    Ok(ramp(g, b, p).with_provenance(Provenance {
        method: Method::Extrapolated,
        note: Some(format!("linear ramp from centered p=1 optimum ({g:.6}, {b:.6})")),
        ..p1_opt.provenance.clone()
    }))
}

/// The ramp of [`extrapolate_schedule`] for explicit endpoints.
pub fn ramp(gamma: f64, beta: f64, p: usize) -> AngleSchedule {
    let pf = p as f64;
    AngleSchedule {
        gamma: (1..=p).map(|j| gamma * j as f64 / pf).collect(),
        beta: (1..=p).map(|j| beta * (1.0 - (j as f64 - 1.0) / pf)).collect(),
        provenance: Provenance::new(Method::Extrapolated),
    }
}

/// `<H>` of simulated states, through the dense amplitude vector for small
/// registers.
pub struct CostEvaluator<'a> {
    model: &'a IsingModel,
    diagonal: Option<Vec<f64>>,
}

impl<'a> CostEvaluator<'a> {
    pub fn new(model: &'a IsingModel) -> Self {
        let diagonal = (model.n() <= DENSE_COST_LIMIT).then(|| diagonal_energies(model));
        Self { model, diagonal }
    }

    /// Always contracts on the MPS.
    pub fn contracted(model: &'a IsingModel) -> Self {
        Self { model, diagonal: None }
    }

    pub fn model(&self) -> &IsingModel {
        self.model
    }

    pub fn eval<T: Real>(&self, state: &MpsState<T>, mode: NormMode) -> Result<f64> {
        let Some(diag) = &self.diagonal else {
            return Ok(state.expect_ising(self.model, mode)?.as_f64());
        };
        let amps = state.to_statevector()?;
        let c = self.model.constant();
        let mut raw = 0.0;
        let mut weight = 0.0;
        for (a, e) in amps.iter().zip(diag) {
            let w = a.norm_sqr().as_f64();
            raw += w * (e - c);
            weight += w;
        }
        Ok(c + match mode {
            NormMode::NonNormalized => raw,
            NormMode::Normalized => raw / weight,
        })
    }

    /// Cost of the QAOA state of `schedule` simulated with `opts`.
    pub fn schedule_cost<T: Real>(&self, schedule: &AngleSchedule, opts: &SimOptions) -> Result<f64> {
        let (state, _) = run_qaoa::<T>(self.model, schedule, opts)?;
        self.eval(&state, opts.mode)
    }
}

/// `E(s)` for every big-endian basis index.
pub fn diagonal_energies(model: &IsingModel) -> Vec<f64> {
    let n = model.n();
    (0..1usize << n)
        .map(|i| model.classical_energy(&Bitstring::from_index(i, n)).expect("length matches"))
        .collect()
}
