//! Angle-aware Bellman-Ford over edge-indexed distance maps.

pub mod avl;
mod convex;
mod cost;
mod local;
mod step;

use std::ops::Range;

pub use avl::AvlTree;
pub use convex::{compute_intersection, convex_update, BetaTrees, ShiftedCost};
pub use cost::{AngleCostFunction, KernelChoice};
pub use local::{naive_update, turning_angle, Assignment, OpCounters, VertexLocalProblem};
pub use step::step_update;

use crate::error::{Error, Result};
use crate::graph::{EdgeRef, RouteGraph};

/// Edge ids of one adjacency list.
#[derive(Debug, Clone)]
pub enum EdgeIter<'a> {
    Range(Range<usize>),
    Slice(std::slice::Iter<'a, u32>),
}

impl Iterator for EdgeIter<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        match self {
            EdgeIter::Range(r) => r.next(),
            EdgeIter::Slice(s) => s.next().map(|&e| e as usize),
        }
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        match self {
            EdgeIter::Range(r) => r.size_hint(),
            EdgeIter::Slice(s) => s.size_hint(),
        }
    }
}

impl ExactSizeIterator for EdgeIter<'_> {}

/// What the solver needs from a graph. Edge ids are dense in `0..edge_count`.
pub trait AngleGraph {
    /// Size of the vertex index space.
    fn vertex_slots(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn start_vertex(&self) -> usize;
    fn out_edges(&self, v: usize) -> EdgeIter<'_>;
    fn in_edges(&self, v: usize) -> EdgeIter<'_>;
    fn tail(&self, e: usize) -> usize;
    fn head(&self, e: usize) -> usize;
    fn cost(&self, e: usize) -> f64;
    /// Travel direction of `e` in degrees, clockwise from +x.
    fn angle(&self, e: usize) -> f64;
    /// Direction class of `e` when edges come from a shared offset set.
    fn class(&self, _e: usize) -> Option<usize> {
        None
    }
    /// Angle of every direction class.
    fn class_angles(&self) -> Option<Vec<f64>> {
        None
    }
    /// Vertices in an order where every edge points forward, if acyclic.
    fn topological_order(&self) -> Option<Vec<u32>> {
        None
    }
}

impl AngleGraph for RouteGraph {
    fn vertex_slots(&self) -> usize {
        self.cell_count()
    }
    fn edge_count(&self) -> usize {
        self.m()
    }
    fn start_vertex(&self) -> usize {
        self.cell_index(self.source())
    }
    #[inline]
    fn out_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Range(RouteGraph::out_edges(self, v))
    }
    #[inline]
    fn in_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Slice(RouteGraph::in_edges(self, v).iter())
    }
    #[inline]
    fn tail(&self, e: usize) -> usize {
        RouteGraph::tail(self, e)
    }
    #[inline]
    fn head(&self, e: usize) -> usize {
        RouteGraph::head(self, e)
    }
    #[inline]
    fn cost(&self, e: usize) -> f64 {
        RouteGraph::cost(self, e)
    }
    #[inline]
    fn angle(&self, e: usize) -> f64 {
        RouteGraph::angle(self, e)
    }
    #[inline]
    fn class(&self, e: usize) -> Option<usize> {
        Some(self.offset_index(e))
    }
    fn class_angles(&self) -> Option<Vec<f64>> {
        Some(self.ring_angles().to_vec())
    }
    fn topological_order(&self) -> Option<Vec<u32>> {
        RouteGraph::topological_order(self)
    }
}

/// A graph with every edge reversed, rooted at its original target. Edge ids
/// are shared with the underlying graph, and reversing both edges of a turn
/// leaves the turning angle unchanged.
#[derive(Debug, Clone, Copy)]
pub struct Reversed<'a>(pub &'a RouteGraph);

impl AngleGraph for Reversed<'_> {
    fn vertex_slots(&self) -> usize {
        self.0.cell_count()
    }
    fn edge_count(&self) -> usize {
        self.0.m()
    }
    fn start_vertex(&self) -> usize {
        self.0.cell_index(self.0.target())
    }
    #[inline]
    fn out_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Slice(self.0.in_edges(v).iter())
    }
    #[inline]
    fn in_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Range(self.0.out_edges(v))
    }
    #[inline]
    fn tail(&self, e: usize) -> usize {
        self.0.head(e)
    }
    #[inline]
    fn head(&self, e: usize) -> usize {
        self.0.tail(e)
    }
    #[inline]
    fn cost(&self, e: usize) -> f64 {
        self.0.cost(e)
    }
    #[inline]
    fn angle(&self, e: usize) -> f64 {
        reverse_angle(self.0.angle(e))
    }
    #[inline]
    fn class(&self, e: usize) -> Option<usize> {
        Some(self.0.offset_index(e))
    }
    fn class_angles(&self) -> Option<Vec<f64>> {
        Some(self.0.ring_angles().iter().map(|&a| reverse_angle(a)).collect())
    }
    fn topological_order(&self) -> Option<Vec<u32>> {
        self.0.topological_order().map(|mut o| {
            o.reverse();
            o
        })
    }
}

#[inline]
fn reverse_angle(a: f64) -> f64 {
    let r = a + 180.0;
    if r >= 360.0 {
        r - 360.0
    } else {
        r
    }
}

/// A small explicit directed graph with per-edge angles.
#[derive(Debug, Clone, Default)]
pub struct ExplicitGraph {
    vertices: usize,
    start: usize,
    tails: Vec<usize>,
    heads: Vec<usize>,
    costs: Vec<f64>,
    angles: Vec<f64>,
    out_lists: Vec<Vec<u32>>,
    in_lists: Vec<Vec<u32>>,
}

impl ExplicitGraph {
    pub fn new(vertices: usize, start: usize) -> Self {
        Self {
            vertices,
            start,
            out_lists: vec![Vec::new(); vertices],
            in_lists: vec![Vec::new(); vertices],
            ..Self::default()
        }
    }

    /// Adds an edge and returns its id.
    pub fn add_edge(&mut self, tail: usize, head: usize, cost: f64, angle_deg: f64) -> usize {
        let e = self.tails.len();
        self.tails.push(tail);
        self.heads.push(head);
        self.costs.push(cost);
        self.angles.push(angle_deg.rem_euclid(360.0));
        self.out_lists[tail].push(e as u32);
        self.in_lists[head].push(e as u32);
        e
    }
}

impl AngleGraph for ExplicitGraph {
    fn vertex_slots(&self) -> usize {
        self.vertices
    }
    fn edge_count(&self) -> usize {
        self.tails.len()
    }
    fn start_vertex(&self) -> usize {
        self.start
    }
    fn out_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Slice(self.out_lists[v].iter())
    }
    fn in_edges(&self, v: usize) -> EdgeIter<'_> {
        EdgeIter::Slice(self.in_lists[v].iter())
    }
    fn tail(&self, e: usize) -> usize {
        self.tails[e]
    }
    fn head(&self, e: usize) -> usize {
        self.heads[e]
    }
    fn cost(&self, e: usize) -> f64 {
        self.costs[e]
    }
    fn angle(&self, e: usize) -> f64 {
        self.angles[e]
    }
    fn topological_order(&self) -> Option<Vec<u32>> {
        let mut indeg: Vec<usize> = self.in_lists.iter().map(Vec::len).collect();
        let mut stack: Vec<usize> = (0..self.vertices).filter(|&v| indeg[v] == 0).collect();
        stack.reverse();
        let mut order = Vec::with_capacity(self.vertices);
        while let Some(v) = stack.pop() {
            order.push(v as u32);
            for &e in &self.out_lists[v] {
                let h = self.heads[e as usize];
                indeg[h] -= 1;
                if indeg[h] == 0 {
                    stack.push(h);
                }
            }
        }
        (order.len() == self.vertices).then_some(order)
    }
}

/// How the distance maps were filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// One in-place pass in topological order.
    Topological,
    /// Double-buffered sweeps over all vertices.
    Sweeps,
}

/// Edge-indexed distances and predecessors. `pred[e] == e` means unset.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistanceState {
    pub dist: Vec<f64>,
    pub pred: Vec<u32>,
    pub path_limit: usize,
    pub schedule: Schedule,
    /// Sweeps executed after initialization (1 for the topological pass).
    pub sweeps: usize,
    pub counters: OpCounters,
    /// Size of the temporary second distance buffer used by sweeps.
    pub scratch_elements: usize,
}

impl EdgeDistanceState {
    /// Elements held in the two edge maps.
    pub fn map_elements(&self) -> usize {
        self.dist.len() + self.pred.len()
    }

    pub fn predecessor(&self, e: usize) -> Option<usize> {
        let p = self.pred[e] as usize;
        (p != e).then_some(p)
    }

    /// Cheapest edge into `v`, ties to the lowest edge id.
    pub fn best_into<G: AngleGraph + ?Sized>(&self, g: &G, v: usize) -> Option<usize> {
        let mut best: Option<usize> = None;
        for e in g.in_edges(v) {
            if self.dist[e].is_finite() && best.is_none_or(|b| self.dist[e] < self.dist[b] || (self.dist[e] == self.dist[b] && e < b)) {
                best = Some(e);
            }
        }
        best
    }
}

/// Largest ring for which a full class-by-class cost table is built.
const TABLE_LIMIT: usize = 2048;

struct Buffers {
    in_ids: Vec<usize>,
    out_ids: Vec<usize>,
    problem: VertexLocalProblem,
    in_class: Vec<usize>,
    out_class: Vec<usize>,
    results: Vec<(usize, f64, u32)>,
}

struct Driver<'a, G: AngleGraph + ?Sized> {
    g: &'a G,
    f: &'a AngleCostFunction,
    kernel: KernelChoice,
    table: Option<(usize, Vec<f64>)>,
    counters: OpCounters,
    buf: Buffers,
}

impl<G: AngleGraph + ?Sized> Driver<'_, G> {
    /// Computes candidate distances for the out-edges of `v` from `src`
    /// into `self.buf.results`.
    fn relax(&mut self, v: usize, src: &[f64]) -> Result<()> {
        let g = self.g;
        let b = &mut self.buf;
        b.results.clear();
        b.in_ids.clear();
        b.problem.in_dist.clear();
        b.problem.in_angle.clear();
        b.in_class.clear();
        for e in g.in_edges(v) {
            let d = src[e];
            if d.is_finite() {
                b.in_ids.push(e);
                b.problem.in_dist.push(d);
                b.problem.in_angle.push(g.angle(e));
                if self.table.is_some() {
                    b.in_class.push(g.class(e).expect("classes available with table"));
                }
            }
        }
        if b.in_ids.is_empty() {
            return Ok(());
        }
        b.out_ids.clear();
        b.problem.out_angle.clear();
        b.out_class.clear();
        for e in g.out_edges(v) {
            b.out_ids.push(e);
            b.problem.out_angle.push(g.angle(e));
            if self.table.is_some() {
                b.out_class.push(g.class(e).expect("classes available with table"));
            }
        }
        if b.out_ids.is_empty() {
            return Ok(());
        }
        let (k, l) = (b.in_ids.len(), b.out_ids.len());
        let kind = self.kernel.resolve(self.f, k, l);
        match (kind, &self.table) {
            (KernelChoice::Naive, Some((nc, table))) => {
                for j in 0..l {
                    let row = b.out_class[j];
                    let mut best = f64::INFINITY;
                    let mut arg = usize::MAX;
                    for i in 0..k {
                        let val = b.problem.in_dist[i] + table[b.in_class[i] * nc + row];
                        if val < best {
                            best = val;
                            arg = i;
                        }
                    }
                    if arg != usize::MAX {
                        let e = b.out_ids[j];
                        b.results.push((e, best + g.cost(e), b.in_ids[arg] as u32));
                    }
                }
                self.counters.comparisons += (k * l) as u64;
                self.counters.evaluations += (k * l) as u64;
            }
            _ => {
                let out = match kind {
                    KernelChoice::Step => step_update(&b.problem, self.f, &mut self.counters)?,
                    KernelChoice::Convex => convex_update(&b.problem, self.f, &mut self.counters)?,
                    _ => naive_update(&b.problem, self.f, &mut self.counters),
                };
                for (j, a) in out.iter().enumerate() {
                    if let Some(i) = a.pred {
                        let e = b.out_ids[j];
                        b.results.push((e, a.dist + g.cost(e), b.in_ids[i] as u32));
                    }
                }
            }
        }
        Ok(())
    }

    /// Writes strict improvements from the last `relax`.
    fn commit(&self, dst: &mut [f64], pred: &mut [u32]) -> bool {
        let mut changed = false;
        for &(e, nd, p) in &self.buf.results {
            if nd < dst[e] {
                dst[e] = nd;
                pred[e] = p;
                changed = true;
            }
        }
        changed
    }
}

/// Longest hop count of any path from `start`, given a topological order.
fn longest_hops<G: AngleGraph + ?Sized>(g: &G, order: &[u32]) -> usize {
    let mut hops = vec![usize::MAX; g.vertex_slots()];
    hops[g.start_vertex()] = 0;
    let mut best = 0;
    for &v in order {
        let h = hops[v as usize];
        if h == usize::MAX {
            continue;
        }
        best = best.max(h);
        for e in g.out_edges(v as usize) {
            let w = g.head(e);
            if hops[w] == usize::MAX || hops[w] < h + 1 {
                hops[w] = h + 1;
            }
        }
    }
    best
}

/// Distances of the cheapest walks with at most `p` edges that start with an
/// out-edge of the start vertex, for every edge.
///
/// Acyclic graphs whose longest path has at most `p` edges are solved in one
/// topological pass; otherwise `p - 1` double-buffered sweeps run, stopping
/// early once a sweep changes nothing.
pub fn mabf<G: AngleGraph + ?Sized>(g: &G, f: &AngleCostFunction, kernel: KernelChoice, p: usize) -> Result<EdgeDistanceState> {
    if p == 0 {
        return Err(Error::InvalidParameter {
            field: "p",
            reason: "path limit must be at least 1".into(),
        });
    }
    f.validate()?;
    kernel.check(f)?;
    let m = g.edge_count();
    let mut dist = vec![f64::INFINITY; m];
    let mut pred: Vec<u32> = (0..m as u32).collect();
    for e in g.out_edges(g.start_vertex()) {
        dist[e] = g.cost(e);
    }
    let table = g.class_angles().filter(|a| a.len() <= TABLE_LIMIT).map(|angles| {
        let nc = angles.len();
        let mut t = vec![0.0; nc * nc];
        for (a, &aa) in angles.iter().enumerate() {
            for (b, &bb) in angles.iter().enumerate() {
                t[a * nc + b] = f.evaluate(turning_angle(aa, bb));
            }
        }
        (nc, t)
    });
    let mut drv = Driver {
        g,
        f,
        kernel,
        table,
        counters: OpCounters::default(),
        buf: Buffers {
            in_ids: Vec::new(),
            out_ids: Vec::new(),
            problem: VertexLocalProblem::default(),
            in_class: Vec::new(),
            out_class: Vec::new(),
            results: Vec::new(),
        },
    };

    let topo = g.topological_order().filter(|o| longest_hops(g, o) <= p);
    let mut state = EdgeDistanceState {
        dist: Vec::new(),
        pred: Vec::new(),
        path_limit: p,
        schedule: Schedule::Sweeps,
        sweeps: 0,
        counters: OpCounters::default(),
        scratch_elements: 0,
    };
    if let Some(order) = topo {
        // In place is exact here: every in-edge of v is final before v runs.
        for &v in &order {
            drv.relax(v as usize, &dist)?;
            drv.commit(&mut dist, &mut pred);
        }
        state.schedule = Schedule::Topological;
        state.sweeps = 1;
    } else if p > 1 {
        let mut next = dist.clone();
        state.scratch_elements = m;
        for _ in 1..p {
            let mut changed = false;
            for v in 0..g.vertex_slots() {
                drv.relax(v, &dist)?;
                changed |= drv.commit(&mut next, &mut pred);
            }
            state.sweeps += 1;
            if !changed {
                break;
            }
            dist.copy_from_slice(&next);
        }
    }
    state.dist = dist;
    state.pred = pred;
    state.counters = drv.counters;
    Ok(state)
}

/// Edge sequence of the walk ending with `e_t`, first edge first.
pub fn reconstruct_edges(state: &EdgeDistanceState, e_t: usize) -> Result<Vec<usize>> {
    if e_t >= state.dist.len() || !state.dist[e_t].is_finite() {
        return Err(Error::Unreachable);
    }
    let mut edges = vec![e_t];
    let mut e = e_t;
    while let Some(f) = state.predecessor(e) {
        if edges.len() > state.dist.len() {
            return Err(Error::CorruptPredecessors(format!("predecessor chain from edge {e_t} does not terminate")));
        }
        edges.push(f);
        e = f;
    }
    edges.reverse();
    Ok(edges)
}

/// Vertex sequence of the walk ending with `e_t`.
pub fn reconstruct_path<G: AngleGraph + ?Sized>(g: &G, state: &EdgeDistanceState, e_t: usize) -> Result<Vec<usize>> {
    let edges = reconstruct_edges(state, e_t)?;
    if g.tail(edges[0]) != g.start_vertex() {
        return Err(Error::CorruptPredecessors(format!("walk to edge {e_t} does not begin at the start vertex")));
    }
    let mut verts = Vec::with_capacity(edges.len() + 1);
    verts.push(g.tail(edges[0]));
    verts.extend(edges.iter().map(|&e| g.head(e)));
    Ok(verts)
}

/// Unsigned turn from `f` into `e`, which must meet head to tail.
pub fn angle_between(g: &RouteGraph, f: EdgeRef, e: EdgeRef) -> Result<f64> {
    let fi = g.resolve(f).ok_or(Error::NotIncident)?;
    let ei = g.resolve(e).ok_or(Error::NotIncident)?;
    if RouteGraph::head(g, fi) != RouteGraph::tail(g, ei) {
        return Err(Error::NotIncident);
    }
    Ok(turning_angle(RouteGraph::angle(g, fi), RouteGraph::angle(g, ei)))
}
