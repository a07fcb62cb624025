//! Two-stage line routing: a cell route on the 8-neighborhood first, then
//! pylons spotted only on cells of that route.

use crate::error::{Error, Result};
use crate::graph::{CellCoord, GraphParams};
use crate::path::Path;
use crate::raster::ResistanceRaster;
use crate::scenario::Scenario;
use crate::solve::solve_route;

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRoute {
    /// 8-connected cell route from source to target.
    pub route: Vec<CellCoord>,
    /// Pylons spotted along `route` under the scenario's span constraints.
    pub path: Path,
}

/// Line routing baseline for `scenario`.
///
/// The grid route uses the scenario's cone, widened to no cone when the cone
/// leaves the grid route infeasible, and the scenario's angle cost.
pub fn line_routing_baseline(raster: &ResistanceRaster, scenario: &Scenario) -> Result<BaselineRoute> {
    scenario.validate(raster)?;
    let grid = |theta: f64| {
        let mut sc = scenario.clone();
        sc.params = GraphParams {
            d_min: 1.0,
            d_max: 1.5,
            theta_alpha_deg: theta,
            w_c: scenario.params.w_c,
        };
        // a simple 8-connected route never needs more steps than cells
        sc.path_limit = Some(raster.len());
        solve_route(raster, &sc)
    };
    let route = match grid(scenario.params.theta_alpha_deg) {
        Ok(s) => s,
        Err(e) if scenario.params.theta_alpha_deg < 180.0 && (e.is_infeasible() || matches!(e, Error::EmptyRing { .. })) => {
            grid(180.0)?
        }
        Err(e) => return Err(e),
    }
    .path
    .vertices;

    let mut restricted = raster.clone();
    let mut on_route = vec![false; raster.len()];
    for c in &route {
        on_route[raster.index(c.x, c.y)] = true;
    }
    for (i, keep) in on_route.iter().enumerate() {
        if !keep {
            restricted.forbid_pylon(raster.coord(i));
        }
    }
    let spotted = solve_route(&restricted, scenario)?;
    let path = Path::evaluate(raster, scenario.params.w_c, &scenario.angle_cost, spotted.path.vertices)?;
    Ok(BaselineRoute { route, path })
}
