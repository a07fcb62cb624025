use super::metrics::DiversityMetric;
use super::{build_trees, CandidateRoute, RouteEnumerator, ShortestPathTrees};
use crate::anglebf::OpCounters;
use crate::error::{Error, Result};
use crate::graph::{CellCoord, RouteGraph};
use crate::path::Path;
use crate::raster::{corridor_cells, ResistanceRaster};
use crate::scenario::Scenario;
use crate::solve::solve_route;

/// Pool routes for dispersion may cost at most this factor times the optimum.
pub const DISPERSION_COST_FACTOR: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiversityMethod {
    FindKspMax,
    FindKspMean,
    GreedySet,
    KDispersion,
    CorridorPenalizing,
}

impl DiversityMethod {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "find_ksp_max" => Some(Self::FindKspMax),
            "find_ksp_mean" => Some(Self::FindKspMean),
            "greedy_set" => Some(Self::GreedySet),
            "k_dispersion" => Some(Self::KDispersion),
            "corridor_penalizing" => Some(Self::CorridorPenalizing),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FindKspMax => "find_ksp_max",
            Self::FindKspMean => "find_ksp_mean",
            Self::GreedySet => "greedy_set",
            Self::KDispersion => "k_dispersion",
            Self::CorridorPenalizing => "corridor_penalizing",
        }
    }

    /// Metric that `theta` is measured in. Only k-dispersion honours the
    /// requested metric; the others have their own.
    pub fn effective_metric(self, requested: DiversityMetric) -> DiversityMetric {
        match self {
            Self::FindKspMax | Self::CorridorPenalizing => DiversityMetric::YauHausdorff,
            Self::FindKspMean => DiversityMetric::MeanEuclidean,
            Self::GreedySet => DiversityMetric::Jaccard,
            Self::KDispersion => requested,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversitySpec {
    pub k: usize,
    pub metric: DiversityMetric,
    pub theta: f64,
    pub method: DiversityMethod,
    /// Corridor penalty; `None` means [`default_penalty`].
    pub penalty: Option<f64>,
}

impl DiversitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter { field: "k", reason: "k must be at least 1".into() });
        }
        if !(self.theta.is_finite() && self.theta >= 0.0) {
            return Err(Error::InvalidParameter {
                field: "theta",
                reason: format!("must be finite and nonnegative, got {}", self.theta),
            });
        }
        if self.method.effective_metric(self.metric) == DiversityMetric::Jaccard && self.theta > 1.0 {
            return Err(Error::InvalidParameter {
                field: "theta",
                reason: format!("Jaccard threshold must lie in [0, 1], got {}", self.theta),
            });
        }
        if let Some(p) = self.penalty {
            if !(p >= 0.0 && !p.is_nan()) {
                return Err(Error::InvalidParameter { field: "penalty", reason: format!("must be nonnegative, got {p}") });
            }
        }
        Ok(())
    }
}

/// Greedy selection by the continuous max-min rule: every new route passes
/// through an edge whose tail is farther than `theta` from all pylons chosen
/// so far, and is the cheapest such route.
pub fn find_ksp_max(trees: &ShortestPathTrees, g: &RouteGraph, k: usize, theta: f64) -> Result<(Vec<CandidateRoute>, bool)> {
    let smap = trees.s_map(g);
    let order = smap.sorted_edges();
    let Some(&first) = order.first() else {
        return Err(Error::Unreachable);
    };
    let mut near = vec![f64::INFINITY; g.cell_count()];
    let mut out: Vec<CandidateRoute> = Vec::with_capacity(k);
    let mut pick = Some(first);
    while let Some(e) = pick {
        let vertices = trees.route_through(g, e)?;
        for (i, d) in near.iter_mut().enumerate() {
            let c = g.cell(i);
            for v in &vertices {
                *d = d.min(c.dist(*v));
            }
        }
        out.push(CandidateRoute { vertices, s_value: smap.s[e], edge: e });
        if out.len() == k {
            return Ok((out, false));
        }
        pick = order.iter().copied().find(|&e| near[g.tail(e)] > theta);
    }
    Ok((out, true))
}

fn greedy_accept(
    trees: &ShortestPathTrees,
    g: &RouteGraph,
    k: usize,
    theta: f64,
    metric: DiversityMetric,
) -> Result<(Vec<CandidateRoute>, bool)> {
    let mut out: Vec<CandidateRoute> = Vec::with_capacity(k);
    'cand: for r in RouteEnumerator::new(trees, g) {
        let r = r?;
        for a in &out {
            if metric.distance(&r.vertices, &a.vertices)? <= theta {
                continue 'cand;
            }
        }
        out.push(r);
        if out.len() == k {
            return Ok((out, false));
        }
    }
    Ok((out, true))
}

/// Routes in cost order, kept when their mean Euclidean distance to every
/// kept route exceeds `theta`.
pub fn find_ksp_mean(trees: &ShortestPathTrees, g: &RouteGraph, k: usize, theta: f64) -> Result<(Vec<CandidateRoute>, bool)> {
    greedy_accept(trees, g, k, theta, DiversityMetric::MeanEuclidean)
}

/// As [`find_ksp_mean`] with the Jaccard distance.
pub fn greedy_set(trees: &ShortestPathTrees, g: &RouteGraph, k: usize, theta: f64) -> Result<(Vec<CandidateRoute>, bool)> {
    greedy_accept(trees, g, k, theta, DiversityMetric::Jaccard)
}

/// Greedy max-min selection of `k` candidates: the farthest pair first, then
/// repeatedly the candidate farthest from the chosen set. Returns indices in
/// selection order; ties go to lower indices.
pub fn k_dispersion(candidates: &[Vec<CellCoord>], k: usize, metric: DiversityMetric) -> Result<Vec<usize>> {
    let n = candidates.len();
    if k == 0 {
        return Err(Error::InvalidParameter { field: "k", reason: "k must be at least 1".into() });
    }
    if n < k {
        return Err(Error::TooFewCandidates { needed: k, got: n });
    }
    if k == n {
        return Ok((0..n).collect());
    }
    if k == 1 {
        return Ok(vec![0]);
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = metric.distance(&candidates[i], &candidates[j])?;
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    let (mut bi, mut bj) = (0, 1);
    for i in 0..n {
        for j in i + 1..n {
            if d[i * n + j] > d[bi * n + bj] {
                (bi, bj) = (i, j);
            }
        }
    }
    let mut chosen = vec![bi, bj];
    let mut gap: Vec<f64> = (0..n).map(|c| d[c * n + bi].min(d[c * n + bj])).collect();
    while chosen.len() < k {
        let mut best: Option<usize> = None;
        for c in 0..n {
            if chosen.contains(&c) {
                continue;
            }
            if best.is_none_or(|b| gap[c] > gap[b]) {
                best = Some(c);
            }
        }
        let b = best.expect("more candidates than chosen");
        chosen.push(b);
        for c in 0..n {
            gap[c] = gap[c].min(d[c * n + b]);
        }
    }
    Ok(chosen)
}

/// `2 *` mean pylon resistance over allowed cells.
pub fn default_penalty(raster: &ResistanceRaster) -> f64 {
    2.0 * raster.mean_pylon_cost()
}

/// Solves `k` times, adding `penalty` to the pylon resistance of every cell
/// within `theta` of each route found. Costs refer to the original raster.
pub fn corridor_penalizing(
    raster: &ResistanceRaster,
    scenario: &Scenario,
    k: usize,
    theta: f64,
    penalty: f64,
) -> Result<(Vec<Path>, SolveStats)> {
    let mut work = raster.clone();
    let mut out = Vec::with_capacity(k);
    let mut stats = SolveStats::default();
    for _ in 0..k {
        let sol = solve_route(&work, scenario)?;
        stats.n = sol.n;
        stats.m = sol.m;
        stats.map_elements = sol.map_elements;
        stats.counters += sol.counters;
        let inside = corridor_cells(raster.rows(), raster.cols(), sol.path.vertices.iter().copied(), theta)?;
        for (i, hit) in inside.iter().enumerate() {
            if *hit {
                let c = raster.coord(i);
                let v = work.pylon(c) + penalty;
                work.set_pylon(c, v.min(f64::MAX));
            }
        }
        out.push(Path::evaluate(raster, scenario.params.w_c, &scenario.angle_cost, sol.path.vertices)?);
    }
    Ok((out, stats))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub n: usize,
    pub m: usize,
    pub map_elements: usize,
    pub counters: OpCounters,
}

/// Result of a diverse-routes run.
#[derive(Debug, Clone)]
pub struct KspOutcome {
    /// By nondecreasing cost.
    pub paths: Vec<Path>,
    /// Set when fewer than `k` routes qualified.
    pub warning: Option<String>,
    pub stats: SolveStats,
}

/// Runs `spec` on a prebuilt graph for `scenario`.
pub fn run_ksp(raster: &ResistanceRaster, g: &RouteGraph, scenario: &Scenario, spec: &DiversitySpec) -> Result<KspOutcome> {
    spec.validate()?;
    let k = spec.k;
    if spec.method == DiversityMethod::CorridorPenalizing {
        let penalty = spec.penalty.unwrap_or_else(|| default_penalty(raster));
        let (mut paths, stats) = corridor_penalizing(raster, scenario, k, spec.theta, penalty)?;
        paths.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        return Ok(KspOutcome { paths, warning: None, stats });
    }
    let trees = build_trees(g, &scenario.angle_cost, scenario.kernel, scenario.path_limit())?;
    let mut counters = trees.forward.counters;
    counters += trees.backward.counters;
    let stats = SolveStats { n: g.n(), m: g.m(), map_elements: trees.map_elements(), counters };
    let (routes, short) = match spec.method {
        DiversityMethod::FindKspMax => find_ksp_max(&trees, g, k, spec.theta)?,
        DiversityMethod::FindKspMean => find_ksp_mean(&trees, g, k, spec.theta)?,
        DiversityMethod::GreedySet => greedy_set(&trees, g, k, spec.theta)?,
        DiversityMethod::KDispersion => {
            let pool_size = 50.max(10 * k);
            let mut pool: Vec<CandidateRoute> = Vec::with_capacity(pool_size);
            let mut cap = f64::INFINITY;
            for r in RouteEnumerator::new(&trees, g) {
                let r = r?;
                if pool.is_empty() {
                    cap = r.s_value * DISPERSION_COST_FACTOR;
                } else if r.s_value > cap {
                    break;
                }
                pool.push(r);
                if pool.len() == pool_size {
                    break;
                }
            }
            let take = k.min(pool.len());
            let verts: Vec<Vec<CellCoord>> = pool.iter().map(|r| r.vertices.clone()).collect();
            let mut idx = k_dispersion(&verts, take, spec.metric)?;
            idx.sort_unstable();
            let short = take < k;
            (idx.into_iter().map(|i| pool[i].clone()).collect(), short)
        }
        DiversityMethod::CorridorPenalizing => unreachable!("handled above"),
    };
    let mut paths = routes
        .into_iter()
        .map(|r| Path::evaluate(raster, scenario.params.w_c, &scenario.angle_cost, r.vertices))
        .collect::<Result<Vec<_>>>()?;
    paths.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    let warning = short.then(|| format!("only {} of {} requested routes found", paths.len(), k));
    Ok(KspOutcome { paths, warning, stats })
}
