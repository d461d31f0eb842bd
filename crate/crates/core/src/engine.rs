//! Running compiled QAOA circuits on bond-capped MPS states, and sweeps over
//! bond caps and depths.
//!
//! Sweeps rely on the prefix property of schedules: the depth-`p` cell uses
//! the first `p` layers of one master schedule, so a single evolution per
//! `(instance, D)` produces every depth of the grid.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::compiler::{compile_qaoa, GateOp, GateSites, Layer};
use crate::error::{Error, Result};
use crate::mps::{MpsState, NormMode, TruncationReport, DEFAULT_CUTOFF};
use crate::problems::{IsingModel, ProblemInstance, ProblemKind, BRUTE_FORCE_LIMIT};
use crate::sampler::deterministic_sample;
use crate::scalar::Real;
use crate::schedule::AngleSchedule;

/// Largest register for which fidelities against an exact state are
/// computed.
pub const FIDELITY_LIMIT: usize = 20;

/// Bond cap, cutoff and normalization mode of a simulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub bond_cap: usize,
    pub cutoff: f64,
    pub mode: NormMode,
    /// How many of the most recent truncation reports to keep.
    pub report_capacity: usize,
}

impl SimOptions {
    pub fn new(bond_cap: usize) -> Self {
        Self {
            bond_cap,
            cutoff: DEFAULT_CUTOFF,
            mode: NormMode::default(),
            report_capacity: 0,
        }
    }

    /// No truncation at all for an `n`-qubit chain.
    pub fn exact(n: usize) -> Self {
        Self::new(full_bond(n)).with_cutoff(0.0)
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_mode(mut self, mode: NormMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_reports(mut self, capacity: usize) -> Self {
        self.report_capacity = capacity;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.bond_cap == 0 {
            return Err(Error::InvalidSize("bond cap must be at least 1".into()));
        }
        if !(self.cutoff >= 0.0 && self.cutoff.is_finite()) {
            return Err(Error::contract("cutoff must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// `2^floor(n/2)`, the largest bond an `n`-qubit chain can need.
pub fn full_bond(n: usize) -> usize {
    let half = n / 2;
    if half >= usize::BITS as usize - 1 {
        usize::MAX
    } else {
        1 << half
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub max_bond_reached: usize,
    pub cum_discarded: f64,
    pub final_norm: f64,
    pub two_qubit_gates: usize,
    pub wall_time: f64,
    /// Most recent truncation reports, oldest first.
    pub reports: Vec<TruncationReport>,
}

struct Evolution<T> {
    state: MpsState<T>,
    ring: VecDeque<TruncationReport>,
    capacity: usize,
    max_bond: usize,
    two_qubit_gates: usize,
    seconds: f64,
}

impl<T: Real> Evolution<T> {
    fn start(n: usize, opts: &SimOptions) -> Result<Self> {
        opts.validate()?;
        let state = MpsState::plus_state(n)?
            .with_bond_cap(opts.bond_cap)
            .with_cutoff(T::lit(opts.cutoff))
            .with_mode(opts.mode);
        Ok(Self {
            state,
            ring: VecDeque::new(),
            capacity: opts.report_capacity,
            max_bond: 1,
            two_qubit_gates: 0,
            seconds: 0.0,
        })
    }

    fn apply_layer(&mut self, layer: &Layer<T>) -> Result<()> {
        let clock = Instant::now();
        self.apply_gates(&layer.cost)?;
        self.apply_gates(&layer.mixer)?;
        self.seconds += clock.elapsed().as_secs_f64();
        Ok(())
    }

    fn apply_gates(&mut self, gates: &[GateOp<T>]) -> Result<()> {
        let Self {
            state,
            ring,
            capacity,
            max_bond,
            two_qubit_gates,
            ..
        } = self;
        apply_gates(state, gates, |rep| {
            *max_bond = (*max_bond).max(rep.kept_rank);
            *two_qubit_gates += 1;
            if *capacity > 0 {
                if ring.len() == *capacity {
                    ring.pop_front();
                }
                ring.push_back(rep);
            }
        })
    }

    /// The state in logical qubit order with its diagnostics.
    fn snapshot(&self, layers_applied: usize) -> (MpsState<T>, RunDiagnostics) {
        let mut s = self.state.clone();
        if layers_applied % 2 == 1 {
            s.reverse();
        }
        let diag = RunDiagnostics {
            max_bond_reached: self.max_bond,
            cum_discarded: self.state.cum_discarded().as_f64(),
            final_norm: self.state.norm().as_f64(),
            two_qubit_gates: self.two_qubit_gates,
            wall_time: self.seconds,
            reports: self.ring.iter().copied().collect(),
        };
        (s, diag)
    }
}

/// Applies a gate list in order, reporting every truncation.
pub(crate) fn apply_gates<T: Real>(
    state: &mut MpsState<T>,
    gates: &[GateOp<T>],
    mut on_report: impl FnMut(TruncationReport),
) -> Result<()> {
    // For each two-qubit gate, whether the next one sits further right; the
    // center is left on that side. The next layer starts at site 0.
    let mut hint = vec![false; gates.len()];
    let mut next: Option<usize> = None;
    for (idx, g) in gates.iter().enumerate().rev() {
        if let GateSites::Two(j) = g.sites {
            hint[idx] = next.is_some_and(|nj| nj > j);
            next = Some(j);
        }
    }
    for (idx, g) in gates.iter().enumerate() {
        match g.sites {
            GateSites::One(k) => state.apply_1q(&g.matrix, k)?,
            GateSites::Two(j) => on_report(state.apply_2q_unchecked(&g.matrix, j, Some(hint[idx]))?),
        }
    }
    Ok(())
}

/// Evolves `|+>^n` under the QAOA circuit of `schedule` with per-gate
/// truncation. The returned state is in logical qubit order.
pub fn run_qaoa<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    opts: &SimOptions,
) -> Result<(MpsState<T>, RunDiagnostics)> {
    let mut out = run_qaoa_checkpointed(model, schedule, opts, &[schedule.p()])?;
    let (_, state, diag) = out.pop().expect("one checkpoint");
    Ok((state, diag))
}

/// One evolution under `schedule`, with a snapshot after each depth in
/// `checkpoints` (all `<= schedule.p()`). Snapshots come back in ascending
/// depth order, duplicates removed.
pub fn run_qaoa_checkpointed<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    opts: &SimOptions,
    checkpoints: &[usize],
) -> Result<Vec<(usize, MpsState<T>, RunDiagnostics)>> {
    let depths: BTreeSet<usize> = checkpoints.iter().copied().collect();
    let p_max = depths.last().copied().unwrap_or(0);
    let circuit = compile_qaoa::<T>(model, &schedule.prefix(p_max)?)?;
    let mut evo = Evolution::start(model.n(), opts)?;
    let mut out = Vec::with_capacity(depths.len());
    if depths.contains(&0) {
        let (s, d) = evo.snapshot(0);
        out.push((0, s, d));
    }
    for (l, layer) in circuit.layers.iter().enumerate() {
        evo.apply_layer(layer)?;
        if depths.contains(&(l + 1)) {
            let (s, d) = evo.snapshot(l + 1);
            out.push((l + 1, s, d));
        }
    }
    Ok(out)
}

/// `r(s) = E(s) / C_min` for a minimization problem with negative optimum.
pub fn approximation_ratio(model: &IsingModel, s: &Bitstring, c_min: f64) -> Result<f64> {
    if !(c_min < 0.0) {
        return Err(Error::contract("approximation ratio needs a negative optimum"));
    }
    Ok(model.classical_energy(s)? / c_min + 0.0)
}

/// Settings of a `(D, p)` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub bond_dims: Vec<usize>,
    pub depths: Vec<usize>,
    pub cutoff: f64,
    pub mode: NormMode,
    /// Also compute fidelities against an untruncated run (`n <= 20`).
    pub fidelity: bool,
}

impl SweepSpec {
    pub fn new(bond_dims: Vec<usize>, depths: Vec<usize>) -> Self {
        Self {
            bond_dims,
            depths,
            cutoff: DEFAULT_CUTOFF,
            mode: NormMode::default(),
            fidelity: false,
        }
    }

    pub fn with_fidelity(mut self, on: bool) -> Self {
        self.fidelity = on;
        self
    }

    pub fn with_mode(mut self, mode: NormMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }
}

/// One `(instance, D, p)` cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub instance_id: String,
    pub kind: ProblemKind,
    pub n: usize,
    pub seed: u64,
    pub bond_dim: usize,
    pub p: usize,
    /// Approximation ratio (MaxCut with a known optimum).
    pub r: Option<f64>,
    /// 1 if the sample solves the instance (EC3), else 0.
    pub x: Option<f64>,
    pub fidelity: Option<f64>,
    pub sample: Option<Bitstring>,
    pub sample_prob: Option<f64>,
    pub energy: Option<f64>,
    pub norm: Option<f64>,
    pub cum_discarded: Option<f64>,
    pub seconds: f64,
    pub error: Option<String>,
}

/// Means over instances for one `(D, p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub bond_dim: usize,
    pub p: usize,
    pub r_mean: Option<f64>,
    pub x_mean: Option<f64>,
    pub f_mean: Option<f64>,
    pub cells: usize,
    pub incomputable: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub cells: Vec<CellResult>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl SweepResult {
    /// Per-`(D, p)` means, ordered by `D` then `p`.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut groups: BTreeMap<(usize, usize), Vec<&CellResult>> = BTreeMap::new();
        for c in &self.cells {
            groups.entry((c.bond_dim, c.p)).or_default().push(c);
        }
        groups
            .into_iter()
            .map(|((d, p), cells)| Aggregate {
                bond_dim: d,
                p,
                r_mean: mean(cells.iter().filter_map(|c| c.r)),
                x_mean: mean(cells.iter().filter_map(|c| c.x)),
                f_mean: mean(cells.iter().filter_map(|c| c.fidelity)),
                cells: cells.len(),
                incomputable: cells.iter().filter(|c| c.r.is_none() && c.x.is_none()).count(),
            })
            .collect()
    }

    pub fn aggregate(&self, bond_dim: usize, p: usize) -> Option<Aggregate> {
        self.aggregates().into_iter().find(|a| a.bond_dim == bond_dim && a.p == p)
    }

    /// One row per cell; `comment` lines are written first with a leading
    /// `#`. Wall-clock times are left out so reruns are byte-identical.
    pub fn write_csv<W: Write>(&self, out: W, comment: &[String]) -> Result<()> {
        let mut out = out;
        for line in comment {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "instance_id",
            "kind",
            "n",
            "seed",
            "D",
            "p",
            "r",
            "x",
            "F",
            "energy",
            "sample",
            "sample_prob",
            "norm",
            "cum_discarded",
            "error",
        ])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x}"));
        for c in &self.cells {
            w.write_record([
                c.instance_id.clone(),
                c.kind.to_string(),
                c.n.to_string(),
                c.seed.to_string(),
                c.bond_dim.to_string(),
                c.p.to_string(),
                opt(c.r),
                opt(c.x),
                opt(c.fidelity),
                opt(c.energy),
                c.sample.as_ref().map_or_else(String::new, Bitstring::to_string),
                opt(c.sample_prob),
                opt(c.norm),
                opt(c.cum_discarded),
                c.error.as_deref().unwrap_or("").replace('\n', " "),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Wall-clock seconds per cell.
    pub fn write_timings_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["instance_id", "D", "p", "seconds"])?;
        for c in &self.cells {
            w.write_record([c.instance_id.clone(), c.bond_dim.to_string(), c.p.to_string(), format!("{:.6}", c.seconds)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Aggregate table with columns `D, p, r_mean, x_mean, F_mean, cells,
    /// incomputable`.
    pub fn write_aggregates_csv<W: Write>(&self, out: W, comment: &[String]) -> Result<()> {
        let mut out = out;
        for line in comment {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["D", "p", "r_mean", "x_mean", "F_mean", "cells", "incomputable"])?;
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| format!("{x}"));
        for a in self.aggregates() {
            w.write_record([
                a.bond_dim.to_string(),
                a.p.to_string(),
                opt(a.r_mean),
                opt(a.x_mean),
                opt(a.f_mean),
                a.cells.to_string(),
                a.incomputable.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Optimum energy for MaxCut ratios: the certificate if present, otherwise
/// enumeration when the instance is small enough.
fn reference_optimum(inst: &ProblemInstance, model: &IsingModel) -> Option<f64> {
    if let Some(c) = &inst.certificate {
        return Some(c.energy);
    }
    if inst.n() <= BRUTE_FORCE_LIMIT {
        return model.brute_force_ground().ok().map(|g| g.energy);
    }
    None
}

fn failed_cell(inst: &ProblemInstance, d: usize, p: usize, err: &Error) -> CellResult {
    CellResult {
        instance_id: inst.id(),
        kind: inst.kind(),
        n: inst.n(),
        seed: inst.seed(),
        bond_dim: d,
        p,
        r: None,
        x: None,
        fidelity: None,
        sample: None,
        sample_prob: None,
        energy: None,
        norm: None,
        cum_discarded: None,
        seconds: 0.0,
        error: Some(err.to_string()),
    }
}

/// Runs every `(D, p)` cell of one instance. All caps advance layer by
/// layer in lockstep with the optional exact reference.
fn sweep_instance<T: Real>(inst: &ProblemInstance, schedule: &AngleSchedule, spec: &SweepSpec) -> Vec<CellResult> {
    let model = inst.to_ising();
    let depths: BTreeSet<usize> = spec.depths.iter().copied().collect();
    let p_max = depths.last().copied().unwrap_or(0);
    let setup = || -> Result<_> {
        let circuit = compile_qaoa::<T>(&model, &schedule.prefix(p_max)?)?;
        let mut evos = Vec::with_capacity(spec.bond_dims.len());
        for &d in &spec.bond_dims {
            let opts = SimOptions::new(d).with_cutoff(spec.cutoff).with_mode(spec.mode);
            evos.push(Evolution::<T>::start(inst.n(), &opts)?);
        }
        let reference = if spec.fidelity && inst.n() <= FIDELITY_LIMIT {
            Some(Evolution::<T>::start(inst.n(), &SimOptions::exact(inst.n()))?)
        } else {
            None
        };
        Ok((circuit, evos, reference))
    };
    let (circuit, mut evos, mut reference) = match setup() {
        Ok(x) => x,
        Err(e) => {
            return spec
                .bond_dims
                .iter()
                .flat_map(|&d| depths.iter().map(move |&p| (d, p)))
                .map(|(d, p)| failed_cell(inst, d, p, &e))
                .collect();
        }
    };
    let c_min = match inst.kind() {
        ProblemKind::MaxCut => reference_optimum(inst, &model),
        ProblemKind::Ec3 => None,
    };

    let mut cells: Vec<Vec<CellResult>> = vec![Vec::new(); spec.bond_dims.len()];
    let mut dead: Vec<Option<Error>> = (0..spec.bond_dims.len()).map(|_| None).collect();
    let mut reference_dead: Option<Error> = None;
    for layer_count in 0..=p_max {
        if layer_count > 0 {
            let layer = &circuit.layers[layer_count - 1];
            if let Some(r) = reference.as_mut() {
                if reference_dead.is_none() {
                    if let Err(e) = r.apply_layer(layer) {
                        reference_dead = Some(e);
                    }
                }
            }
            for (evo, slot) in evos.iter_mut().zip(dead.iter_mut()) {
                if slot.is_none() {
                    if let Err(e) = evo.apply_layer(layer) {
                        *slot = Some(e);
                    }
                }
            }
        }
        if !depths.contains(&layer_count) {
            continue;
        }
        let exact = match (&reference, &reference_dead) {
            (Some(r), None) => Some(r.snapshot(layer_count).0),
            _ => None,
        };
        for (k, evo) in evos.iter().enumerate() {
            let d = spec.bond_dims[k];
            if let Some(e) = &dead[k] {
                cells[k].push(failed_cell(inst, d, layer_count, e));
                continue;
            }
            let clock = Instant::now();
            let (state, diag) = evo.snapshot(layer_count);
            let cell = (|| -> Result<CellResult> {
                let sample = deterministic_sample(&state)?;
                let energy = model.classical_energy(&sample.bits)?;
                let (r, x) = match inst.kind() {
                    ProblemKind::MaxCut => (c_min.map(|c| if c < 0.0 { energy / c + 0.0 } else { 1.0 }), None),
                    ProblemKind::Ec3 => (None, inst.is_solution(&sample.bits).map(|ok| f64::from(u8::from(ok)))),
                };
                let fidelity = match &exact {
                    Some(ex) => Some(state.fidelity(ex)?.as_f64()),
                    None => None,
                };
                Ok(CellResult {
                    instance_id: inst.id(),
                    kind: inst.kind(),
                    n: inst.n(),
                    seed: inst.seed(),
                    bond_dim: d,
                    p: layer_count,
                    r,
                    x,
                    fidelity,
                    sample: Some(sample.bits),
                    sample_prob: Some(sample.probability),
                    energy: Some(energy),
                    norm: Some(diag.final_norm),
                    cum_discarded: Some(diag.cum_discarded),
                    seconds: diag.wall_time + clock.elapsed().as_secs_f64(),
                    error: None,
                })
            })();
            cells[k].push(cell.unwrap_or_else(|e| failed_cell(inst, d, layer_count, &e)));
        }
    }
    cells.into_iter().flatten().collect()
}

/// Runs all instances over the `(D, p)` grid. `schedules` holds either one
/// master schedule shared by every instance or one per instance; each depth
/// uses its prefix. Output order is instance, then `D`, then `p`, whatever
/// the thread count.
pub fn sweep<T: Real>(instances: &[ProblemInstance], schedules: &[AngleSchedule], spec: &SweepSpec) -> Result<SweepResult> {
    if schedules.len() != 1 && schedules.len() != instances.len() {
        return Err(Error::contract(format!(
            "need one shared schedule or one per instance, got {} for {} instances",
            schedules.len(),
            instances.len()
        )));
    }
    let p_max = spec.depths.iter().copied().max().unwrap_or(0);
    for s in schedules {
        s.validate()?;
        if s.p() < p_max {
            return Err(Error::contract(format!(
                "schedule depth {} is shorter than the largest requested depth {p_max}",
                s.p()
            )));
        }
    }
    let cells = instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let schedule = if schedules.len() == 1 { &schedules[0] } else { &schedules[i] };
            sweep_instance::<T>(inst, schedule, spec)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(SweepResult { cells })
}

/// `F(D, p)` of one model against the untruncated evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityCell {
    pub bond_dim: usize,
    pub p: usize,
    pub fidelity: f64,
}

pub fn fidelity_grid<T: Real>(
    model: &IsingModel,
    schedule: &AngleSchedule,
    bond_dims: &[usize],
    depths: &[usize],
    cutoff: f64,
    mode: NormMode,
) -> Result<Vec<FidelityCell>> {
    let n = model.n();
    if n > FIDELITY_LIMIT {
        return Err(Error::SizeLimit {
            what: "qubits for fidelity against the exact state",
            got: n,
            limit: FIDELITY_LIMIT,
        });
    }
    let reference = run_qaoa_checkpointed::<T>(model, schedule, &SimOptions::exact(n), depths)?;
    let mut out = Vec::new();
    for &d in bond_dims {
        let opts = SimOptions::new(d).with_cutoff(cutoff).with_mode(mode);
        let runs = run_qaoa_checkpointed::<T>(model, schedule, &opts, depths)?;
        for ((p, s, _), (_, ex, _)) in runs.iter().zip(&reference) {
            out.push(FidelityCell {
                bond_dim: d,
                p: *p,
                fidelity: s.fidelity(ex)?.as_f64(),
            });
        }
    }
    Ok(out)
}
