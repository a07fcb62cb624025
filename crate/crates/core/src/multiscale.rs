//! Coarse-to-fine routing: solve on a downsampled raster, keep a corridor
//! around the result and refine at the next scale.

use crate::anglebf::OpCounters;
use crate::error::{Error, Result};
use crate::graph::{ring_offsets, Bresenham, CellCoord, GraphParams, RouteGraph};
use crate::path::Path;
use crate::raster::{corridor_mask, downsample, squared_distance_field, ResistanceRaster};
use crate::scenario::Scenario;
use crate::solve::solve_on_graph;

#[derive(Debug, Clone, PartialEq)]
pub struct MultiScalePlan {
    /// Strictly decreasing, ending with 1.
    pub scale_factors: Vec<usize>,
    /// Maximum number of edges of any graph built.
    pub edge_budget: usize,
}

impl MultiScalePlan {
    pub fn new(scale_factors: Vec<usize>, edge_budget: usize) -> Self {
        Self { scale_factors, edge_budget }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidParameter { field: "scales", reason: reason.into() });
        match self.scale_factors.last() {
            None => return bad("at least one scale is required"),
            Some(&l) if l != 1 => return bad("the last scale must be 1"),
            _ => {}
        }
        if self.scale_factors.windows(2).any(|w| w[0] <= w[1]) {
            return bad("scales must be strictly decreasing");
        }
        if self.edge_budget == 0 {
            return Err(Error::InvalidParameter { field: "edge_budget", reason: "must be positive".into() });
        }
        Ok(())
    }
}

/// Upper bound on the edges of a graph over `corridor_cells` cells counted
/// at a resolution `scale_factor` times finer than the graph.
pub fn predict_edges(corridor_cells: usize, scale_factor: usize, ring_size: usize) -> usize {
    let f2 = scale_factor.max(1).pow(2);
    corridor_cells.div_ceil(f2).saturating_mul(ring_size)
}

/// Scenario for a raster downsampled by `r`.
pub fn scaled_scenario(scenario: &Scenario, r: usize) -> Scenario {
    if r == 1 {
        return scenario.clone();
    }
    let rf = r as f64;
    let d_min = (scenario.params.d_min / rf).round().max(1.0);
    let d_max = (scenario.params.d_max / rf).round().max(d_min);
    let mut s = scenario.clone();
    s.params = GraphParams { d_min, d_max, ..scenario.params };
    s.source = coarse(scenario.source, r);
    s.target = coarse(scenario.target, r);
    s.path_limit = None;
    s
}

fn coarse(c: CellCoord, r: usize) -> CellCoord {
    CellCoord::new(c.x / r, c.y / r)
}

/// Center cell of the fine block under a coarse cell.
fn block_center(c: CellCoord, r: usize, rows: usize, cols: usize) -> CellCoord {
    CellCoord::new((c.x * r + r / 2).min(cols - 1), (c.y * r + r / 2).min(rows - 1))
}

/// One stage of a multi-scale run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleStage {
    pub scale: usize,
    pub rows: usize,
    pub cols: usize,
    /// Corridor width in cells of this stage, `None` for the unrestricted first stage.
    pub corridor_width: Option<f64>,
    pub predicted_edges: usize,
    pub n: usize,
    pub m: usize,
    pub map_elements: usize,
    pub counters: OpCounters,
    /// Route cost on the stage raster.
    pub cost: f64,
}

#[derive(Debug, Clone)]
pub struct MultiScaleResult {
    /// Final route evaluated on the full-resolution raster.
    pub path: Path,
    pub stages: Vec<ScaleStage>,
}

impl MultiScaleResult {
    pub fn corridor_widths(&self) -> Vec<f64> {
        self.stages.iter().filter_map(|s| s.corridor_width).collect()
    }
}

/// Squared guide distances of the pylon-allowed cells, sorted.
struct CorridorProfile(Vec<f64>);

impl CorridorProfile {
    fn new(raster: &ResistanceRaster, guide: &[CellCoord]) -> Result<Self> {
        let d2 = squared_distance_field(raster.rows(), raster.cols(), guide.iter().copied())?;
        let mut v: Vec<f64> = d2.iter().zip(raster.pylon_mask()).filter(|(_, f)| !**f).map(|(d, _)| *d).collect();
        v.sort_unstable_by(f64::total_cmp);
        Ok(Self(v))
    }

    /// Pylon-allowed cells within `width` of the guide.
    fn count(&self, width: f64) -> usize {
        let w2 = width * width;
        self.0.partition_point(|&d| d <= w2)
    }
}

/// Widest integer corridor whose predicted edge count fits the budget. The
/// lower clamp is `d_max`; `Err` carries the prediction at the clamp.
fn widest_corridor(profile: &CorridorProfile, diag: usize, d_max: f64, ring: usize, budget: usize) -> std::result::Result<(f64, usize), usize> {
    let lo = d_max.ceil().max(1.0) as usize;
    let predict = |w: usize| predict_edges(profile.count(w as f64), 1, ring);
    let p_lo = predict(lo);
    if p_lo > budget {
        return Err(p_lo);
    }
    let (mut good, mut good_p) = (lo, p_lo);
    let mut hi = diag.max(lo) + 1;
    // invariant: good fits, hi does not or is past the diagonal
    while hi - good > 1 {
        let mid = good + (hi - good) / 2;
        let p = predict(mid);
        if p <= budget {
            (good, good_p) = (mid, p);
        } else {
            hi = mid;
        }
    }
    Ok((good as f64, good_p))
}

/// Guide cells at the resolution of scale `r` for full-resolution pylons:
/// every cell on the straight spans, mapped down.
fn guide_cells(pylons: &[CellCoord], r: usize) -> Vec<CellCoord> {
    let mut cells: Vec<CellCoord> = pylons.iter().map(|&c| coarse(c, r)).collect();
    for w in pylons.windows(2) {
        cells.extend(Bresenham::new(w[0].as_i64(), w[1].as_i64()).map(|(x, y)| coarse(CellCoord::new(x as usize, y as usize), r)));
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}

/// Runs the plan. Every graph built stays within the edge budget.
pub fn run_multiscale(raster: &ResistanceRaster, scenario: &Scenario, plan: &MultiScalePlan) -> Result<MultiScaleResult> {
    plan.validate()?;
    scenario.validate(raster)?;
    let mut stages = Vec::with_capacity(plan.scale_factors.len());
    let mut prev: Option<Vec<CellCoord>> = None;
    for &r in &plan.scale_factors {
        let sc = scaled_scenario(scenario, r);
        if sc.source == sc.target {
            // source and target share a block; nothing to route at this scale
            continue;
        }
        let base = downsample(raster, r)?;
        let direction = (sc.target.x as f64 - sc.source.x as f64, sc.target.y as f64 - sc.source.y as f64);
        let ring = ring_offsets(sc.params.d_min, sc.params.d_max, sc.params.theta_alpha_deg, direction)?.len();
        let (stage_raster, width, predicted) = match &prev {
            None => {
                let p = predict_edges(base.pylon_allowed_count(), 1, ring);
                (base, None, p)
            }
            Some(route) => {
                let guide = guide_cells(route, r);
                let profile = CorridorProfile::new(&base, &guide)?;
                let diag = ((base.rows().pow(2) + base.cols().pow(2)) as f64).sqrt().ceil() as usize;
                let (w, p) = widest_corridor(&profile, diag, sc.params.d_max, ring, plan.edge_budget)
                    .map_err(|edges| Error::BudgetExceeded { scale: r, edges, budget: plan.edge_budget })?;
                (corridor_mask(&base, guide.iter().copied(), w)?, Some(w), p)
            }
        };
        let infeasible = |e: Error| match e {
            e if e.is_infeasible() => Error::ScaleInfeasible { scale: r, reason: e.to_string() },
            e => e,
        };
        let g = RouteGraph::build(&stage_raster, &sc).map_err(infeasible)?;
        if g.m() > plan.edge_budget {
            return Err(Error::BudgetExceeded { scale: r, edges: g.m(), budget: plan.edge_budget });
        }
        let sol = solve_on_graph(&stage_raster, &g, &sc).map_err(infeasible)?;
        stages.push(ScaleStage {
            scale: r,
            rows: stage_raster.rows(),
            cols: stage_raster.cols(),
            corridor_width: width,
            predicted_edges: predicted,
            n: sol.n,
            m: sol.m,
            map_elements: sol.map_elements,
            counters: sol.counters,
            cost: sol.path.cost,
        });
        if r == 1 {
            let path = Path::evaluate(raster, scenario.params.w_c, &scenario.angle_cost, sol.path.vertices)?;
            return Ok(MultiScaleResult { path, stages });
        }
        let mut fine: Vec<CellCoord> = sol
            .path
            .vertices
            .iter()
            .map(|&c| block_center(c, r, raster.rows(), raster.cols()))
            .collect();
        let last = fine.len() - 1;
        fine[0] = scenario.source;
        fine[last] = scenario.target;
        prev = Some(fine);
    }
    unreachable!("validated plans end with scale 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anglebf::AngleCostFunction;
    use crate::solve::solve_route;

    fn scenario(size: usize) -> Scenario {
        Scenario::new(
            GraphParams { d_min: 2.0, d_max: 4.0, theta_alpha_deg: 60.0, w_c: 1.0 },
            CellCoord::new(1, size / 2),
            CellCoord::new(size - 2, size / 2),
            AngleCostFunction::Convex { a: 3.0, q: 2.0 },
        )
    }

    #[test]
    fn predict_examples() {
        assert_eq!(predict_edges(100, 1, 8), 800);
        assert_eq!(predict_edges(400, 2, 8), 800);
    }

    #[test]
    fn plan_validation() {
        assert!(MultiScalePlan::new(vec![3, 2, 1], 10).validate().is_ok());
        assert!(MultiScalePlan::new(vec![2, 2, 1], 10).validate().is_err());
        assert!(MultiScalePlan::new(vec![2], 10).validate().is_err());
        assert!(MultiScalePlan::new(vec![], 10).validate().is_err());
        assert!(MultiScalePlan::new(vec![1], 0).validate().is_err());
    }

    #[test]
    fn single_scale_is_direct_solve() {
        let r = ResistanceRaster::from_fn(20, 20, |x, y| ((x * 3 + y * 7) % 5) as f64, |x, _| (x % 3) as f64);
        let sc = scenario(20);
        let ms = run_multiscale(&r, &sc, &MultiScalePlan::new(vec![1], usize::MAX)).unwrap();
        let direct = solve_route(&r, &sc).unwrap();
        assert_eq!(ms.path, direct.path);
        assert!(ms.corridor_widths().is_empty());
    }

    #[test]
    fn uniform_two_scales_match_direct() {
        let r = ResistanceRaster::uniform(30, 30, 1.0, 1.0);
        let sc = scenario(30);
        let ms = run_multiscale(&r, &sc, &MultiScalePlan::new(vec![2, 1], 20_000)).unwrap();
        let direct = solve_route(&r, &sc).unwrap();
        assert!((ms.path.cost - direct.path.cost).abs() < 1e-9);
        assert!(ms.stages.iter().all(|s| s.m <= 20_000 && s.m <= s.predicted_edges));
        assert_eq!(ms.stages[1].corridor_width.map(|w| w >= 4.0), Some(true));
    }

    #[test]
    fn tight_budget_is_reported() {
        let r = ResistanceRaster::uniform(30, 30, 1.0, 1.0);
        let e = run_multiscale(&r, &scenario(30), &MultiScalePlan::new(vec![2, 1], 50)).unwrap_err();
        assert!(matches!(e, Error::BudgetExceeded { scale: 2, .. }));
    }

    #[test]
    fn scaled_parameters() {
        let mut sc = scenario(30);
        sc.params.d_min = 3.0;
        sc.params.d_max = 9.0;
        let s = scaled_scenario(&sc, 3);
        assert_eq!((s.params.d_min, s.params.d_max), (1.0, 3.0));
        assert_eq!(s.source, CellCoord::new(0, 5));
        assert_eq!(s.angle_cost, sc.angle_cost);
    }
}
