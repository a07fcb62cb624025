//! The `route`, `ksp`, `multiscale` and `bench` commands.

use std::path::Path as FsPath;
use std::time::Instant;

use pylon_core::anglebf::mabf;
use pylon_core::graph::line_routing_baseline;
use pylon_core::ksp::{run_ksp, yau_hausdorff};
use pylon_core::multiscale::{run_multiscale, MultiScalePlan};
use pylon_core::solve::solve_on_graph;
use pylon_core::{synth, AngleCostFunction, DiversitySpec, KernelChoice, OpCounters, Path, RouteGraph};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::{feature_collection, render, PathReport, RouteReport, StageReport};
use crate::scenario_file::{KspSpec, LoadedScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub kernel: KernelChoice,
    /// Seed for generated instances.
    pub seed: u64,
    /// Include wall time in the report.
    pub timing: bool,
}

/// A command's document and a one-line summary for the terminal.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub summary: String,
}

fn report(command: &str, l: &LoadedScenario, paths: &[Path]) -> RouteReport {
    RouteReport {
        command: command.into(),
        kernel: l.scenario.kernel.name().into(),
        paths: paths.iter().map(PathReport::new).collect(),
        n: 0,
        m: 0,
        map_elements: 0,
        ops: OpCounters::default().into(),
        wall_time_ms: None,
        warning: None,
        stages: None,
    }
}

fn summarize(r: &RouteReport) -> String {
    let costs: Vec<String> = r.paths.iter().map(|p| format!("{:.3}", p.total_cost)).collect();
    let mut s = format!("{}: {} route(s), cost {}, n={} m={}", r.command, r.paths.len(), costs.join(" / "), r.n, r.m);
    if let Some(ms) = r.wall_time_ms {
        s.push_str(&format!(", {ms:.1} ms"));
    }
    if let Some(w) = &r.warning {
        s.push_str(&format!(" (warning: {w})"));
    }
    s
}

fn finish(paths: &[Path], mut r: RouteReport, started: Instant, timing: bool) -> CliResult<(Value, String)> {
    if timing {
        r.wall_time_ms = Some(started.elapsed().as_secs_f64() * 1e3);
    }
    let doc = feature_collection(paths, &r)?;
    Ok((doc, summarize(&r)))
}

/// Optimal route on a prebuilt graph.
pub fn route_document(l: &LoadedScenario, g: &RouteGraph) -> CliResult<(Vec<Path>, RouteReport)> {
    let sol = solve_on_graph(&l.raster, g, &l.scenario)?;
    let paths = vec![sol.path];
    let mut r = report("route", l, &paths);
    (r.n, r.m, r.map_elements, r.ops) = (sol.n, sol.m, sol.map_elements, sol.counters.into());
    Ok((paths, r))
}

/// Diverse routes on a prebuilt graph.
pub fn ksp_document(l: &LoadedScenario, g: &RouteGraph, spec: &DiversitySpec) -> CliResult<(Vec<Path>, RouteReport)> {
    let out = run_ksp(&l.raster, g, &l.scenario, spec)?;
    let mut r = report("ksp", l, &out.paths);
    let s = out.stats;
    (r.n, r.m, r.map_elements, r.ops) = (s.n, s.m, s.map_elements, s.counters.into());
    r.warning = out.warning;
    Ok((out.paths, r))
}

/// Coarse-to-fine route.
pub fn multiscale_document(l: &LoadedScenario, plan: &MultiScalePlan) -> CliResult<(Vec<Path>, RouteReport)> {
    let res = run_multiscale(&l.raster, &l.scenario, plan)?;
    let paths = vec![res.path];
    let mut r = report("multiscale", l, &paths);
    let last = res.stages.last().ok_or_else(|| CliError::Internal("multi-scale run produced no stage".into()))?;
    (r.n, r.m, r.map_elements) = (last.n, last.m, last.map_elements);
    let mut ops = OpCounters::default();
    for s in &res.stages {
        ops += s.counters;
    }
    r.ops = ops.into();
    r.stages = Some(res.stages.iter().map(StageReport::from).collect());
    Ok((paths, r))
}

fn load(path: &FsPath, opts: &RunOptions) -> CliResult<LoadedScenario> {
    LoadedScenario::from_path(path)?.with_kernel(opts.kernel)
}

fn emit(doc: (Value, String)) -> Output {
    Output { text: render(&doc.0), summary: doc.1 }
}

pub fn cmd_route(scenario: &FsPath, opts: &RunOptions) -> CliResult<Output> {
    let l = load(scenario, opts)?;
    let t = Instant::now();
    let g = RouteGraph::build(&l.raster, &l.scenario)?;
    let (paths, r) = route_document(&l, &g)?;
    Ok(emit(finish(&paths, r, t, opts.timing)?))
}

/// Command-line replacements for the scenario's `ksp` block.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KspArgs {
    pub k: Option<usize>,
    pub metric: Option<String>,
    pub theta: Option<f64>,
    pub method: Option<String>,
    pub penalty: Option<f64>,
}

impl KspArgs {
    pub fn resolve(&self, file: Option<&KspSpec>) -> CliResult<DiversitySpec> {
        let missing = |f: &str| CliError::invalid(format!("ksp.{f}"), "not given in the scenario or on the command line");
        let spec = KspSpec {
            k: self.k.or(file.map(|f| f.k)).ok_or_else(|| missing("k"))?,
            metric: self.metric.clone().or(file.map(|f| f.metric.clone())).unwrap_or_else(|| "yau_hausdorff".into()),
            theta: self.theta.or(file.map(|f| f.theta)).ok_or_else(|| missing("theta"))?,
            method: self.method.clone().or(file.map(|f| f.method.clone())).unwrap_or_else(|| "find_ksp_max".into()),
            penalty: self.penalty.or(file.and_then(|f| f.penalty)),
        };
        spec.to_spec()
    }
}

pub fn cmd_ksp(scenario: &FsPath, args: &KspArgs, opts: &RunOptions) -> CliResult<Output> {
    let l = load(scenario, opts)?;
    let spec = args.resolve(l.file.ksp.as_ref())?;
    let t = Instant::now();
    let g = RouteGraph::build(&l.raster, &l.scenario)?;
    let (paths, r) = ksp_document(&l, &g, &spec)?;
    Ok(emit(finish(&paths, r, t, opts.timing)?))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultiscaleArgs {
    pub scales: Option<Vec<usize>>,
    pub edge_budget: Option<usize>,
}

pub fn cmd_multiscale(scenario: &FsPath, args: &MultiscaleArgs, opts: &RunOptions) -> CliResult<Output> {
    let l = load(scenario, opts)?;
    let scales = args
        .scales
        .clone()
        .or_else(|| l.file.scales.clone())
        .ok_or_else(|| CliError::invalid("scales", "not given in the scenario or on the command line"))?;
    let plan = MultiScalePlan::new(scales, args.edge_budget.or(l.file.edge_budget).unwrap_or(usize::MAX));
    plan.validate()?;
    let t = Instant::now();
    let (paths, r) = multiscale_document(&l, &plan)?;
    Ok(emit(finish(&paths, r, t, opts.timing)?))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BenchArgs {
    /// Generated split rasters compared in addition to the scenario.
    pub synthetic: usize,
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Kernels that apply to `f`, naive first.
fn bench_kernels(f: &AngleCostFunction) -> Vec<KernelChoice> {
    let mut ks = vec![KernelChoice::Naive];
    match f {
        AngleCostFunction::Step { .. } => ks.push(KernelChoice::Step),
        AngleCostFunction::Convex { .. } => ks.push(KernelChoice::Convex),
        AngleCostFunction::Concave { .. } => {}
    }
    ks
}

/// Pylon spotting against the line routing baseline, followed by a blank
/// line and kernel operation counts on the scenario graph.
pub fn bench_csv(l: &LoadedScenario, args: &BenchArgs, opts: &RunOptions) -> CliResult<String> {
    let mut rows = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
    rows.write_record([
        "instance",
        "ps_cost",
        "ps_angle",
        "ps_pylons",
        "baseline_cost",
        "baseline_angle",
        "baseline_pylons",
        "d_y",
        "improvement_pct",
        "baseline_status",
    ])
    .map_err(csv_err)?;
    let mut instances = vec![("scenario".to_string(), l.raster.clone())];
    for i in 0..args.synthetic {
        let seed = opts.seed.wrapping_add(i as u64);
        instances.push((format!("split_{seed}"), synth::split_raster(l.raster.rows(), l.raster.cols(), seed)));
    }
    for (name, raster) in &instances {
        l.scenario.validate(raster)?;
        let g = RouteGraph::build(raster, &l.scenario)?;
        let ps = solve_on_graph(raster, &g, &l.scenario)?.path;
        let ps_cols = [fmt(ps.cost), fmt(ps.angle), ps.pylon_count().to_string()];
        let record: Vec<String> = match line_routing_baseline(raster, &l.scenario) {
            Ok(b) => {
                let bl = b.path;
                let d_y = yau_hausdorff(&ps.vertices, &bl.vertices)?;
                let gain = if bl.cost > 0.0 { 100.0 * (bl.cost - ps.cost) / bl.cost } else { 0.0 };
                let bl_cols = [fmt(bl.cost), fmt(bl.angle), bl.pylon_count().to_string(), fmt(d_y), fmt(gain), "ok".into()];
                std::iter::once(name.clone()).chain(ps_cols).chain(bl_cols).collect()
            }
            // pylon-forbidden cells the cable may cross block the grid route
            Err(e) if e.is_infeasible() => {
                let bl_cols = ["", "", "", "", ""].map(String::from);
                std::iter::once(name.clone()).chain(ps_cols).chain(bl_cols).chain(["infeasible".into()]).collect()
            }
            Err(e) => return Err(e.into()),
        };
        rows.write_record(&record).map_err(csv_err)?;
    }

    let mut ops = csv::Writer::from_writer(Vec::new());
    ops.write_record(["kernel", "optimum", "comparisons", "evaluations", "tree_ops", "fallbacks"]).map_err(csv_err)?;
    let g = RouteGraph::build(&l.raster, &l.scenario)?;
    let t = g.cell_index(g.target());
    for k in bench_kernels(&l.scenario.angle_cost) {
        let st = mabf(&g, &l.scenario.angle_cost, k, l.scenario.path_limit())?;
        let opt = st.best_into(&g, t).map(|e| st.dist[e]).unwrap_or(f64::INFINITY);
        let c = st.counters;
        ops.write_record([
            k.name().to_string(),
            fmt(opt),
            c.comparisons.to_string(),
            c.evaluations.to_string(),
            c.tree_ops.to_string(),
            c.fallbacks.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let into = |w: csv::Writer<Vec<u8>>| -> CliResult<String> {
        let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
    };
    Ok(format!("{}\n{}", into(rows)?, into(ops)?))
}

pub fn cmd_bench(scenario: &FsPath, args: &BenchArgs, opts: &RunOptions) -> CliResult<Output> {
    let l = load(scenario, opts)?;
    let text = bench_csv(&l, args, opts)?;
    let summary = format!("bench: {} instance(s)", args.synthetic + 1);
    Ok(Output { text, summary })
}
