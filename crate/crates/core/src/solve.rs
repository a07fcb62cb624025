//! Single-route solving on top of the graph and the angle-aware solver.

use crate::anglebf::{mabf, reconstruct_path, EdgeDistanceState, OpCounters, Schedule};
use crate::error::{Error, Result};
use crate::graph::RouteGraph;
use crate::path::Path;
use crate::raster::ResistanceRaster;
use crate::scenario::Scenario;

/// Optimal route plus solver statistics.
#[derive(Debug, Clone)]
pub struct RouteSolution {
    pub path: Path,
    pub n: usize,
    pub m: usize,
    /// Elements held in the distance and predecessor maps.
    pub map_elements: usize,
    pub counters: OpCounters,
    pub schedule: Schedule,
    pub sweeps: usize,
    pub path_limit: usize,
}

/// Builds the graph and solves it.
pub fn solve_route(raster: &ResistanceRaster, scenario: &Scenario) -> Result<RouteSolution> {
    let g = RouteGraph::build(raster, scenario)?;
    solve_on_graph(raster, &g, scenario)
}

/// Solves on a prebuilt graph for `scenario`.
pub fn solve_on_graph(raster: &ResistanceRaster, g: &RouteGraph, scenario: &Scenario) -> Result<RouteSolution> {
    let p = scenario.path_limit();
    let state = mabf(g, &scenario.angle_cost, scenario.kernel, p)?;
    let path = best_path(raster, g, scenario, &state)?;
    Ok(RouteSolution {
        path,
        n: g.n(),
        m: g.m(),
        map_elements: state.map_elements(),
        counters: state.counters,
        schedule: state.schedule,
        sweeps: state.sweeps,
        path_limit: p,
    })
}

/// Reconstructs and evaluates the cheapest walk into the target.
pub fn best_path(raster: &ResistanceRaster, g: &RouteGraph, scenario: &Scenario, state: &EdgeDistanceState) -> Result<Path> {
    let e = state.best_into(g, g.cell_index(g.target())).ok_or(Error::Unreachable)?;
    let verts = reconstruct_path(g, state, e)?;
    Path::evaluate(
        raster,
        scenario.params.w_c,
        &scenario.angle_cost,
        verts.into_iter().map(|v| g.cell(v)).collect(),
    )
}
