//! k shortest and k diverse routes from a pair of shortest-path trees.
//!
//! The forward tree gives the cheapest walk from the source ending with each
//! edge and the backward tree, computed on the reversed graph, the cheapest
//! walk from each edge to the target. Their sum minus the edge cost is the
//! cheapest route through that edge.

mod metrics;
mod select;

pub use metrics::{jaccard, mean_euclidean, yau_hausdorff, DiversityMetric};
pub use select::{
    corridor_penalizing, default_penalty, find_ksp_max, find_ksp_mean, greedy_set, k_dispersion, run_ksp,
    DiversityMethod, DiversitySpec, KspOutcome,
};

use crate::anglebf::{mabf, reconstruct_edges, AngleCostFunction, EdgeDistanceState, KernelChoice, Reversed};
use crate::error::{Error, Result};
use crate::graph::{CellCoord, RouteGraph};

#[derive(Debug, Clone)]
pub struct ShortestPathTrees {
    /// Rooted at the source.
    pub forward: EdgeDistanceState,
    /// Rooted at the target on the reversed graph.
    pub backward: EdgeDistanceState,
}

impl ShortestPathTrees {
    /// Elements held by the four edge maps.
    pub fn map_elements(&self) -> usize {
        self.forward.map_elements() + self.backward.map_elements()
    }

    pub fn s_map(&self, g: &RouteGraph) -> SMap {
        let s = (0..g.m())
            .map(|e| {
                let (a, b) = (self.forward.dist[e], self.backward.dist[e]);
                if a.is_finite() && b.is_finite() {
                    a + b - g.cost(e)
                } else {
                    f64::INFINITY
                }
            })
            .collect();
        SMap { s }
    }

    /// Best route cost, from the forward tree.
    pub fn forward_optimum(&self, g: &RouteGraph) -> Option<f64> {
        let t = g.cell_index(g.target());
        self.forward.best_into(g, t).map(|e| self.forward.dist[e])
    }

    /// Best route cost, from the backward tree.
    pub fn backward_optimum(&self, g: &RouteGraph) -> Option<f64> {
        let s = g.cell_index(g.source());
        let r = Reversed(g);
        self.backward.best_into(&r, s).map(|e| self.backward.dist[e])
    }

    /// Edge ids of the cheapest route through `e`.
    pub fn route_edges(&self, g: &RouteGraph, e: usize) -> Result<Vec<usize>> {
        let mut edges = reconstruct_edges(&self.forward, e)?;
        if !self.backward.dist[e].is_finite() {
            return Err(Error::Unreachable);
        }
        let mut cur = e;
        while let Some(n) = self.backward.predecessor(cur) {
            if edges.len() > 2 * g.m() + 1 {
                return Err(Error::CorruptPredecessors(format!("backward chain from edge {e} does not terminate")));
            }
            edges.push(n);
            cur = n;
        }
        let (s, t) = (g.cell_index(g.source()), g.cell_index(g.target()));
        if g.tail(edges[0]) != s || g.head(*edges.last().expect("nonempty")) != t {
            return Err(Error::CorruptPredecessors(format!("route through edge {e} does not join source and target")));
        }
        Ok(edges)
    }

    /// Pylon cells of the cheapest route through `e`.
    pub fn route_through(&self, g: &RouteGraph, e: usize) -> Result<Vec<CellCoord>> {
        let edges = self.route_edges(g, e)?;
        let mut v = Vec::with_capacity(edges.len() + 1);
        v.push(g.cell(g.tail(edges[0])));
        v.extend(edges.iter().map(|&e| g.cell(g.head(e))));
        Ok(v)
    }
}

/// Cheapest route cost through each edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SMap {
    pub s: Vec<f64>,
}

impl SMap {
    pub fn min(&self) -> Option<f64> {
        self.s.iter().copied().filter(|v| v.is_finite()).reduce(f64::min)
    }

    /// Finite edges by increasing value, ties by edge id.
    pub fn sorted_edges(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.s.len()).filter(|&e| self.s[e].is_finite()).collect();
        ids.sort_by(|&a, &b| self.s[a].total_cmp(&self.s[b]).then(a.cmp(&b)));
        ids
    }
}

/// Both trees with the same kernel and path limit.
pub fn build_trees(g: &RouteGraph, f: &AngleCostFunction, kernel: KernelChoice, p: usize) -> Result<ShortestPathTrees> {
    let forward = mabf(g, f, kernel, p)?;
    let backward = mabf(&Reversed(g), f, kernel, p)?;
    let trees = ShortestPathTrees { forward, backward };
    if trees.forward_optimum(g).is_none() {
        return Err(Error::Unreachable);
    }
    Ok(trees)
}

/// A route from the trees with its through-edge value.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateRoute {
    pub vertices: Vec<CellCoord>,
    /// S value of the edge that produced this route.
    pub s_value: f64,
    pub edge: usize,
}

/// Distinct routes in increasing S order, deduplicated by vertex sequence.
pub struct RouteEnumerator<'a> {
    trees: &'a ShortestPathTrees,
    g: &'a RouteGraph,
    smap: SMap,
    order: Vec<usize>,
    next: usize,
    seen: std::collections::HashSet<Vec<CellCoord>>,
}

impl<'a> RouteEnumerator<'a> {
    pub fn new(trees: &'a ShortestPathTrees, g: &'a RouteGraph) -> Self {
        let smap = trees.s_map(g);
        let order = smap.sorted_edges();
        Self {
            trees,
            g,
            smap,
            order,
            next: 0,
            seen: Default::default(),
        }
    }

    pub fn smap(&self) -> &SMap {
        &self.smap
    }
}

impl Iterator for RouteEnumerator<'_> {
    type Item = Result<CandidateRoute>;

    fn next(&mut self) -> Option<Self::Item> {
        while self.next < self.order.len() {
            let e = self.order[self.next];
            self.next += 1;
            let vertices = match self.trees.route_through(self.g, e) {
                Ok(v) => v,
                Err(err) => return Some(Err(err)),
            };
            if self.seen.insert(vertices.clone()) {
                return Some(Ok(CandidateRoute { vertices, s_value: self.smap.s[e], edge: e }));
            }
        }
        None
    }
}

/// Up to `k` distinct routes by increasing cost. The flag is set when fewer
/// than `k` exist.
pub fn k_shortest(trees: &ShortestPathTrees, g: &RouteGraph, k: usize) -> Result<(Vec<CandidateRoute>, bool)> {
    if k == 0 {
        return Err(Error::InvalidParameter { field: "k", reason: "k must be at least 1".into() });
    }
    let mut out = Vec::with_capacity(k);
    for r in RouteEnumerator::new(trees, g) {
        out.push(r?);
        if out.len() == k {
            return Ok((out, false));
        }
    }
    Ok((out, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphParams;
    use crate::raster::ResistanceRaster;
    use crate::scenario::Scenario;

    fn setup(r: &ResistanceRaster, s: (usize, usize), t: (usize, usize), theta: f64, d: (f64, f64), f: AngleCostFunction) -> (RouteGraph, ShortestPathTrees) {
        let sc = Scenario::new(
            GraphParams { d_min: d.0, d_max: d.1, theta_alpha_deg: theta, w_c: 1.0 },
            s.into(),
            t.into(),
            f,
        );
        let g = RouteGraph::build(r, &sc).unwrap();
        let trees = build_trees(&g, &sc.angle_cost, KernelChoice::Auto, sc.path_limit()).unwrap();
        (g, trees)
    }

    #[test]
    fn path_graph_has_constant_s_along_route() {
        let r = ResistanceRaster::from_fn(1, 6, |x, _| x as f64, |_, _| 1.0);
        let (g, trees) = setup(&r, (0, 0), (5, 0), 45.0, (1.0, 1.0), AngleCostFunction::zero());
        let sm = trees.s_map(&g);
        let opt = sm.min().unwrap();
        assert!(sm.s.iter().all(|&v| (v - opt).abs() < 1e-12));
        assert_eq!(trees.map_elements(), 4 * g.m());
    }

    #[test]
    fn both_directions_agree() {
        let r = ResistanceRaster::from_fn(9, 9, |x, y| ((x * 3 + y * 5) % 7) as f64, |x, y| ((x + y) % 3) as f64);
        let (g, trees) = setup(&r, (0, 0), (8, 8), 60.0, (1.0, 2.3), AngleCostFunction::Convex { a: 4.0, q: 2.0 });
        let a = trees.forward_optimum(&g).unwrap();
        let b = trees.backward_optimum(&g).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!((trees.s_map(&g).min().unwrap() - a).abs() < 1e-9);
    }

    #[test]
    fn two_equal_disjoint_routes() {
        // a wall in the middle row leaves two symmetric corridors
        let mut r = ResistanceRaster::uniform(3, 5, 1.0, 1.0);
        for x in 1..4 {
            r.forbid_pylon(CellCoord::new(x, 1));
            r.forbid_cable(CellCoord::new(x, 1));
        }
        let (g, trees) = setup(&r, (0, 1), (4, 1), 180.0, (1.0, 1.5), AngleCostFunction::zero());
        let (routes, short) = k_shortest(&trees, &g, 2).unwrap();
        assert!(!short);
        assert_eq!(routes[0].s_value, routes[1].s_value);
        assert!(routes[0].vertices.iter().any(|c| c.y == 0));
        assert!(routes[1].vertices.iter().any(|c| c.y == 2));
    }

    #[test]
    fn k_shortest_reports_shortage_and_sorted_costs() {
        let r = ResistanceRaster::from_fn(6, 6, |x, y| ((x * 7 + y * 3) % 5) as f64, |_, _| 1.0);
        let (g, trees) = setup(&r, (0, 0), (5, 5), 60.0, (1.0, 1.5), AngleCostFunction::zero());
        let (routes, short) = k_shortest(&trees, &g, 10_000).unwrap();
        assert!(short);
        assert!(routes.windows(2).all(|w| w[0].s_value <= w[1].s_value));
        assert!(k_shortest(&trees, &g, 0).is_err());
    }
}
