use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qaoa_mps::engine::{full_bond, run_qaoa_checkpointed};
use qaoa_mps::io::{read_instance, read_instances, write_instance, write_text, AngleFile};
use qaoa_mps::problems::{gen_ec3, gen_maxcut_er, BRUTE_FORCE_LIMIT};
use qaoa_mps::trainer::{
    global_optimize, grid_search_p1, normalized_success, shared_angle_set, success_percentage_of_state,
    CostEvaluator, RefineMode, SharedOptions,
};
use qaoa_mps::{
    deterministic_sample, seeds, sweep, AngleSchedule, Bitstring, NormMode, ProblemInstance, ProblemKind, Real,
    SimOptions, SweepSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::{
    Cli, Command, EncodeArgs, GenerateArgs, LandscapeArgs, OracleArgs, Precision, Refine, ReportArgs, RunArgs,
    SampleArgs, SimArgs, Strategy, SweepArgs, TrainArgs,
};

macro_rules! with_precision {
    ($p:expr, $f:ident($($arg:expr),*)) => {
        match $p {
            Precision::F64 => $f::<f64>($($arg),*),
            Precision::F32 => $f::<f32>($($arg),*),
        }
    };
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    let p = cli.precision;
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Encode(a) => encode(a),
        Command::Run(a) => with_precision!(p, run(a, p)),
        Command::Sweep(a) => with_precision!(p, sweep_cmd(a, p)),
        Command::Train(a) => with_precision!(p, train(a, p)),
        Command::Landscape(a) => with_precision!(p, landscape(a, p)),
        Command::Sample(a) => with_precision!(p, sample(a)),
        Command::Oracle(a) => oracle(a),
        Command::Report(a) => report(a),
    }
}

/// Header lines recording everything needed to regenerate an output file.
fn provenance_lines<A: Serialize>(command: &str, args: &A, precision: Option<Precision>) -> Result<Vec<String>> {
    let mut lines = vec![format!("qaoa-mps {} {command}", env!("CARGO_PKG_VERSION"))];
    lines.push(format!("config {}", serde_json::to_string(args)?));
    if let Some(p) = precision {
        lines.push(format!("precision {}", serde_json::to_string(&p)?.trim_matches('"')));
    }
    Ok(lines)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_instances(path: &Path) -> Result<Vec<ProblemInstance>> {
    let insts = read_instances(path).with_context(|| format!("reading instances from {}", path.display()))?;
    if insts.is_empty() {
        bail!("no instance files (*.json) in {}", path.display());
    }
    Ok(insts)
}

fn load_angles(path: &Path, kind: ProblemKind) -> Result<AngleSchedule> {
    let file = AngleFile::read(path).with_context(|| format!("reading angle file {}", path.display()))?;
    if file.kind != kind {
        bail!(
            "angle file {} is for {} but the instance is {}",
            path.display(),
            file.kind,
            kind
        );
    }
    Ok(file.schedule())
}

fn optimum(inst: &ProblemInstance) -> Option<f64> {
    if let Some(c) = &inst.certificate {
        return Some(c.energy);
    }
    (inst.n() <= BRUTE_FORCE_LIMIT).then(|| inst.to_ising().brute_force_ground().ok().map(|g| g.energy))?
}

fn bond_dims(sim: &SimArgs, n: usize) -> Vec<usize> {
    if sim.bond_dims.is_empty() {
        vec![full_bond(n)]
    } else {
        sim.bond_dims.clone()
    }
}

fn depths(sim: &SimArgs, schedule: &AngleSchedule) -> Vec<usize> {
    if sim.depths.is_empty() {
        vec![schedule.p()]
    } else {
        sim.depths.clone()
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let insts = (0..a.count)
        .into_par_iter()
        .map(|i| {
            let seed = seeds::derive(a.seed, &[i as u64]);
            let inst: ProblemInstance = match a.kind {
                ProblemKind::MaxCut => gen_maxcut_er(a.n, a.edge_prob, seed)?.into(),
                ProblemKind::Ec3 => gen_ec3(a.n, seed)?.into(),
            };
            let cert = inst.certify(seed)?;
            Ok(inst.with_certificate(cert))
        })
        .collect::<qaoa_mps::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for (i, inst) in insts.iter().enumerate() {
        let path = a.out.join(format!("{}-n{}-{i:04}.json", a.kind, a.n));
        write_instance(&path, inst).with_context(|| format!("cannot write {}", path.display()))?;
    }
    eprintln!("wrote {} instances to {}", insts.len(), a.out.display());
    Ok(())
}

fn encode(a: &EncodeArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let model = inst.to_ising();
    emit(a.out.as_ref(), &(serde_json::to_string_pretty(&model)? + "\n"))
}

#[derive(Serialize)]
struct RunRecord {
    instance_id: String,
    bond_dim: usize,
    p: usize,
    sample: Bitstring,
    sample_prob: f64,
    sample_energy: f64,
    r: Option<f64>,
    x: Option<f64>,
    expectation: f64,
    norm: f64,
    max_bond: usize,
    cum_discarded: f64,
    two_qubit_gates: usize,
}

fn run<T: Real>(a: &RunArgs, _p: Precision) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let schedule = load_angles(&a.angles, inst.kind())?;
    let model = inst.to_ising();
    let c_min = optimum(&inst);
    let eval = CostEvaluator::new(&model);
    let mut records = Vec::new();
    for d in bond_dims(&a.sim, inst.n()) {
        let opts = SimOptions::new(d).with_cutoff(a.sim.epsilon).with_mode(a.sim.mode);
        for (p, state, diag) in run_qaoa_checkpointed::<T>(&model, &schedule, &opts, &depths(&a.sim, &schedule))? {
            let s = deterministic_sample(&state)?;
            let energy = model.classical_energy(&s.bits)?;
            records.push(RunRecord {
                instance_id: inst.id(),
                bond_dim: d,
                p,
                r: match inst.kind() {
                    ProblemKind::MaxCut => c_min.filter(|c| *c < 0.0).map(|c| energy / c + 0.0),
                    ProblemKind::Ec3 => None,
                },
                x: match inst.kind() {
                    ProblemKind::Ec3 => inst.is_solution(&s.bits).map(|ok| if ok { 1.0 } else { 0.0 }),
                    ProblemKind::MaxCut => None,
                },
                sample: s.bits,
                sample_prob: s.probability,
                sample_energy: energy,
                expectation: eval.eval(&state, a.sim.mode)?,
                norm: diag.final_norm,
                max_bond: diag.max_bond_reached,
                cum_discarded: diag.cum_discarded,
                two_qubit_gates: diag.two_qubit_gates,
            });
        }
    }
    emit(a.out.as_ref(), &(serde_json::to_string_pretty(&records)? + "\n"))
}

fn sweep_cmd<T: Real>(a: &SweepArgs, p: Precision) -> Result<()> {
    let insts = load_instances(&a.instance)?;
    let schedules = if a.angles.is_dir() {
        insts
            .iter()
            .map(|i| load_angles(&a.angles.join(format!("{}.json", i.id())), i.kind()))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![load_angles(&a.angles, insts[0].kind())?]
    };
    let p_max = schedules.iter().map(AngleSchedule::p).min().unwrap_or(0);
    let depths = if a.sim.depths.is_empty() { vec![p_max] } else { a.sim.depths.clone() };
    let dims = if a.sim.bond_dims.is_empty() {
        vec![full_bond(insts.iter().map(ProblemInstance::n).max().unwrap_or(1))]
    } else {
        a.sim.bond_dims.clone()
    };
    let spec = SweepSpec::new(dims, depths)
        .with_cutoff(a.sim.epsilon)
        .with_mode(a.sim.mode)
        .with_fidelity(a.fidelity);
    let result = sweep::<T>(&insts, &schedules, &spec)?;
    let header = provenance_lines("sweep", a, Some(p))?;
    let mut w = create(&a.out.join("cells.csv"))?;
    result.write_csv(&mut w, &header)?;
    w.flush()?;
    let mut w = create(&a.out.join("aggregates.csv"))?;
    result.write_aggregates_csv(&mut w, &header)?;
    w.flush()?;
    let mut w = create(&a.out.join("timings.csv"))?;
    result.write_timings_csv(&mut w)?;
    w.flush()?;
    let failed = result.cells.iter().filter(|c| c.error.is_some()).count();
    eprintln!(
        "{} cells over {} instances written to {}{}",
        result.cells.len(),
        insts.len(),
        a.out.display(),
        if failed > 0 { format!(" ({failed} incomputable)") } else { String::new() }
    );
    Ok(())
}

fn write_angle_table(path: &Path, header: &[String], rows: &[(String, &AngleSchedule)]) -> Result<()> {
    let mut out = create(path)?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["schedule", "j", "gamma", "beta"])?;
    for (name, s) in rows {
        for (j, (g, b)) in s.gamma.iter().zip(&s.beta).enumerate() {
            w.write_record([name.clone(), (j + 1).to_string(), g.to_string(), b.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Exact and bond-capped success percentages of `schedule` after every depth.
fn success_rows<T: Real>(
    inst: &ProblemInstance,
    schedule: &AngleSchedule,
    bond_dim: usize,
) -> Result<Vec<[String; 5]>> {
    let model = inst.to_ising();
    let solutions: Vec<Bitstring> = model.brute_force_ground()?.bitstrings().collect();
    let checkpoints: Vec<usize> = (0..=schedule.p()).collect();
    let exact_opts = SimOptions::exact(inst.n()).with_mode(NormMode::Normalized);
    let capped_opts = SimOptions::new(bond_dim).with_cutoff(0.0).with_mode(NormMode::Normalized);
    let exact = run_qaoa_checkpointed::<T>(&model, schedule, &exact_opts, &checkpoints)?;
    let capped = run_qaoa_checkpointed::<T>(&model, schedule, &capped_opts, &checkpoints)?;
    let mut rows = Vec::new();
    for ((j, e, _), (_, c, _)) in exact.iter().zip(&capped) {
        let eta = success_percentage_of_state(e, &solutions)?;
        let eta_d = success_percentage_of_state(c, &solutions)?;
        let ratio = normalized_success(eta_d, eta).map_or_else(|_| String::new(), |r| r.to_string());
        rows.push([inst.id(), j.to_string(), eta.to_string(), eta_d.to_string(), ratio]);
    }
    Ok(rows)
}

fn write_success(path: &Path, header: &[String], rows: &[[String; 5]]) -> Result<()> {
    let mut out = create(path)?;
    for line in header {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance_id", "j", "eta_exact", "eta_D", "normalized"])?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn train<T: Real>(a: &TrainArgs, prec: Precision) -> Result<()> {
    let insts = load_instances(&a.instance)?;
    let kind = insts[0].kind();
    let header = provenance_lines("train", a, Some(prec))?;
    if a.success && insts.iter().any(|i| i.n() > BRUTE_FORCE_LIMIT) {
        bail!("success tables need instances of at most {BRUTE_FORCE_LIMIT} qubits");
    }
    for &d in &a.bond_dims {
        let dir = a.out.join(format!("D{d}"));
        let mut per_instance: Vec<(ProblemInstance, AngleSchedule)> = Vec::new();
        match a.strategy {
            Strategy::Shared => {
                let p_max = a.depths.iter().copied().max().unwrap_or(1);
                let opts = SharedOptions {
                    resolution: a.resolution,
                    refine: match a.refine {
                        Refine::Ramp => RefineMode::Ramp,
                        Refine::Full => RefineMode::Full,
                    },
                    refine_evals: a.refine_evals,
                    mode: a.mode,
                };
                let shared = shared_angle_set::<T>(&insts, d, p_max, &opts)?;
                AngleFile::new(kind, &shared.schedule).write(&dir.join("shared.json"))?;
                let mut rows = vec![("shared".to_string(), &shared.schedule)];
                for (inst, s) in insts.iter().zip(&shared.per_instance) {
                    AngleFile::new(kind, s).write(&dir.join("instances").join(format!("{}.json", inst.id())))?;
                    rows.push((inst.id(), s));
                }
                write_angle_table(&dir.join("angles.csv"), &header, &rows)?;
                let mut out = create(&dir.join("refine.csv"))?;
                writeln!(out, "instance_id,cost_before,cost_after")?;
                for (inst, (before, after)) in insts.iter().zip(&shared.costs) {
                    writeln!(out, "{},{before},{after}", inst.id())?;
                }
                out.flush()?;
                per_instance.extend(insts.iter().cloned().zip(shared.per_instance.iter().cloned()));
                eprintln!("D={d}: shared schedule of depth {p_max} written to {}", dir.display());
            }
            Strategy::Multistart => {
                for &p in &a.depths {
                    let pdir = dir.join(format!("p{p}"));
                    let mut traces = create(&pdir.join("traces.csv"))?;
                    writeln!(traces, "instance_id,eval,incumbent")?;
                    let mut rows = Vec::new();
                    for (i, inst) in insts.iter().enumerate() {
                        let seed = seeds::derive(a.seed, &[i as u64, d as u64, p as u64]);
                        let res = global_optimize::<T>(&inst.to_ising(), p, d, a.budget, seed, a.mode)?;
                        AngleFile::new(kind, &res.schedule).write(&pdir.join(format!("{}.json", inst.id())))?;
                        for (k, v) in res.trace.iter().enumerate() {
                            writeln!(traces, "{},{},{v}", inst.id(), k + 1)?;
                        }
                        rows.push((inst.id(), res.schedule.clone()));
                        per_instance.push((inst.clone(), res.schedule));
                    }
                    traces.flush()?;
                    let table: Vec<(String, &AngleSchedule)> = rows.iter().map(|(n, s)| (n.clone(), s)).collect();
                    write_angle_table(&pdir.join("angles.csv"), &header, &table)?;
                    eprintln!("D={d} p={p}: {} schedules written to {}", insts.len(), pdir.display());
                }
            }
        }
        if a.success {
            let rows = per_instance
                .par_iter()
                .map(|(inst, s)| success_rows::<T>(inst, s, d))
                .collect::<Result<Vec<_>>>()?;
            let rows: Vec<[String; 5]> = rows.into_iter().flatten().collect();
            write_success(&dir.join("success.csv"), &header, &rows)?;
        }
    }
    Ok(())
}

fn landscape<T: Real>(a: &LandscapeArgs, prec: Precision) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let model = inst.to_ising();
    let header = provenance_lines("landscape", a, Some(prec))?;
    for &d in &a.bond_dims {
        let (best, land) = grid_search_p1::<T>(&model, d, a.resolution, a.mode)?;
        let path = a.out.join(format!("landscape-D{d}.csv"));
        let mut lines = header.clone();
        lines.push(format!("instance {}", inst.id()));
        land.write_csv(create(&path)?, &lines)?;
        println!(
            "D={d}: argmin gamma={} beta={} value={}",
            best.gamma[0],
            best.beta[0],
            land.min_value()
        );
    }
    Ok(())
}

fn sample<T: Real>(a: &SampleArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let schedule = load_angles(&a.angles, inst.kind())?;
    let model = inst.to_ising();
    for d in bond_dims(&a.sim, inst.n()) {
        let opts = SimOptions::new(d).with_cutoff(a.sim.epsilon).with_mode(a.sim.mode);
        for (p, state, _) in run_qaoa_checkpointed::<T>(&model, &schedule, &opts, &depths(&a.sim, &schedule))? {
            let s = deterministic_sample(&state)?;
            let energy = model.classical_energy(&s.bits)?;
            println!("D={d} p={p} sample={} probability={} energy={energy}", s.bits, s.probability);
        }
    }
    Ok(())
}

fn oracle(a: &OracleArgs) -> Result<()> {
    let inst = read_instance(&a.instance)?;
    let cert = inst.certify(a.seed)?;
    println!("{}", serde_json::to_string_pretty(&cert)?);
    if let Some(out) = &a.out {
        write_instance(out, &inst.with_certificate(cert))?;
    }
    Ok(())
}

#[derive(Default)]
struct Sums {
    sum: f64,
    count: usize,
}

fn report(a: &ReportArgs) -> Result<()> {
    let file = File::open(&a.input).with_context(|| format!("cannot read {}", a.input.display()))?;
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("{}: missing column `{name}`", a.input.display()))
    };
    let (cd, cp) = (col("D")?, col("p")?);
    let metrics = ["r", "x", "F"];
    let mcols = metrics.iter().map(|m| col(m)).collect::<Result<Vec<_>>>()?;
    let mut table: BTreeMap<(&str, usize, usize), Sums> = BTreeMap::new();
    let mut dims = std::collections::BTreeSet::new();
    let mut ps = std::collections::BTreeSet::new();
    for rec in rdr.records() {
        let rec = rec?;
        let d: usize = rec[cd].parse().context("column D")?;
        let p: usize = rec[cp].parse().context("column p")?;
        dims.insert(d);
        ps.insert(p);
        for (m, &c) in metrics.iter().zip(&mcols) {
            if let Ok(v) = rec[c].parse::<f64>() {
                let e = table.entry((m, d, p)).or_default();
                e.sum += v;
                e.count += 1;
            }
        }
    }
    let mut text = String::new();
    for m in metrics {
        if !table.keys().any(|k| k.0 == m) {
            continue;
        }
        text.push_str(&format!("mean {m} (rows D, columns p)\nD"));
        for p in &ps {
            text.push_str(&format!(",{p}"));
        }
        text.push('\n');
        for d in &dims {
            text.push_str(&d.to_string());
            for p in &ps {
                match table.get(&(m, *d, *p)) {
                    Some(s) if s.count > 0 => text.push_str(&format!(",{:.4}", s.sum / s.count as f64)),
                    _ => text.push(','),
                }
            }
            text.push('\n');
        }
        text.push('\n');
    }
    emit(a.out.as_ref(), &text)
}
