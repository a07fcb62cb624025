//! Pylon-spotting graph: one vertex per usable raster cell, one directed edge
//! per feasible span between two pylons.
//!
//! Edges are stored implicitly as `(tail cell, ring offset)` pairs in a
//! compressed row layout, so a graph with `m` edges costs `m` cost entries
//! plus a few index arrays and nothing per-edge beyond that.

pub mod baseline;
mod bresenham;

use std::ops::Range;

pub use baseline::{line_routing_baseline, BaselineRoute};
pub use bresenham::{bresenham, Bresenham};

use crate::error::{Error, Result};
use crate::raster::ResistanceRaster;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn as_i64(self) -> (i64, i64) {
        (self.x as i64, self.y as i64)
    }

    pub fn offset(self, dx: i32, dy: i32) -> (i64, i64) {
        (self.x as i64 + dx as i64, self.y as i64 + dy as i64)
    }

    pub fn dist(self, other: CellCoord) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

impl From<(usize, usize)> for CellCoord {
    fn from((x, y): (usize, usize)) -> Self {
        Self { x, y }
    }
}

/// Span-length and direction constraints of the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphParams {
    /// Minimum span in cells.
    pub d_min: f64,
    /// Maximum span in cells.
    pub d_max: f64,
    /// Maximum deviation of a span from the source-target direction, degrees.
    /// `180` disables the cone.
    pub theta_alpha_deg: f64,
    /// Weight of the mean cable resistance against the pylon resistance.
    pub w_c: f64,
}

impl GraphParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "d_min",
                reason: format!("must be positive, got {}", self.d_min),
            });
        }
        if !(self.d_max >= self.d_min && self.d_max.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "d_max",
                reason: format!("must be at least d_min={}, got {}", self.d_min, self.d_max),
            });
        }
        if !(self.theta_alpha_deg > 0.0 && self.theta_alpha_deg <= 180.0) {
            return Err(Error::InvalidParameter {
                field: "theta_alpha",
                reason: format!("must lie in (0, 180], got {}", self.theta_alpha_deg),
            });
        }
        if !(self.w_c >= 0.0 && self.w_c.is_finite()) {
            return Err(Error::InvalidParameter {
                field: "w_c",
                reason: format!("must be nonnegative, got {}", self.w_c),
            });
        }
        Ok(())
    }

    pub fn is_dag(&self) -> bool {
        self.theta_alpha_deg < 90.0
    }
}

/// Integer span offsets admissible at every vertex, sorted by `(dx, dy)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingOffsets {
    offsets: Vec<(i32, i32)>,
}

impl RingOffsets {
    pub fn as_slice(&self) -> &[(i32, i32)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn get(&self, i: usize) -> (i32, i32) {
        self.offsets[i]
    }

    pub fn position(&self, off: (i32, i32)) -> Option<usize> {
        self.offsets.binary_search(&off).ok()
    }
}

/// All integer offsets with `d_min <= |o| <= d_max` deviating less than
/// `theta_alpha` degrees from `target_dir`.
pub fn ring_offsets(
    d_min: f64,
    d_max: f64,
    theta_alpha_deg: f64,
    target_dir: (f64, f64),
) -> Result<RingOffsets> {
    let params = GraphParams {
        d_min,
        d_max,
        theta_alpha_deg,
        w_c: 0.0,
    };
    params.validate()?;
    let r = d_max.ceil() as i32;
    let (lo, hi) = (d_min * d_min, d_max * d_max);
    let tnorm = (target_dir.0 * target_dir.0 + target_dir.1 * target_dir.1).sqrt();
    let cone = theta_alpha_deg < 180.0;
    if cone && !(tnorm > 0.0) {
        return Err(Error::InvalidParameter {
            field: "target_dir",
            reason: "direction must be nonzero when the cone is active".into(),
        });
    }
    let mut offsets = Vec::new();
    for dx in -r..=r {
        for dy in -r..=r {
            let n2 = (dx * dx + dy * dy) as f64;
            if n2 < lo || n2 > hi || n2 == 0.0 {
                continue;
            }
            if cone {
                let cos = (dx as f64 * target_dir.0 + dy as f64 * target_dir.1) / (n2.sqrt() * tnorm);
                let angle = cos.clamp(-1.0, 1.0).acos().to_degrees();
                if angle >= theta_alpha_deg {
                    continue;
                }
            }
            offsets.push((dx, dy));
        }
    }
    if offsets.is_empty() {
        return Err(Error::EmptyRing {
            d_min,
            d_max,
            theta_alpha: theta_alpha_deg,
        });
    }
    offsets.sort_unstable();
    Ok(RingOffsets { offsets })
}

/// Direction of an offset in degrees in `[0, 360)`, measured clockwise from
/// the +x axis on the y-down raster.
pub fn offset_angle(dx: i32, dy: i32) -> f64 {
    let a = (dy as f64).atan2(dx as f64).to_degrees();
    if a < 0.0 {
        a + 360.0
    } else {
        a
    }
}

/// Span cost: mean of the two pylon resistances plus `w_c` times the mean
/// cable resistance along the Bresenham cells. `None` if a cable cell on the
/// way is forbidden.
pub fn edge_cost(raster: &ResistanceRaster, u: CellCoord, v: CellCoord, w_c: f64) -> Option<f64> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (x, y) in Bresenham::new(u.as_i64(), v.as_i64()) {
        let c = CellCoord::new(x as usize, y as usize);
        if raster.cable_forbidden(c) {
            return None;
        }
        sum += raster.cable(c);
        count += 1;
    }
    Some((raster.pylon(u) + raster.pylon(v)) / 2.0 + w_c * sum / count as f64)
}

/// An edge named by its tail cell and ring offset index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeRef {
    pub tail: CellCoord,
    pub offset_index: u16,
}

#[derive(Debug, Clone)]
pub struct RouteGraph {
    rows: usize,
    cols: usize,
    source: CellCoord,
    target: CellCoord,
    ring: RingOffsets,
    ring_angles: Vec<f64>,
    is_dag: bool,
    direction: (f64, f64),
    usable: Vec<bool>,
    n: usize,
    out_start: Vec<u32>,
    edge_offset: Vec<u16>,
    edge_tail: Vec<u32>,
    edge_cost: Vec<f64>,
    in_start: Vec<u32>,
    in_edges: Vec<u32>,
}

impl RouteGraph {
    pub fn build(raster: &ResistanceRaster, scenario: &Scenario) -> Result<Self> {
        scenario.validate(raster)?;
        Self::build_unchecked(raster, &scenario.params, scenario.source, scenario.target)
    }

    pub(crate) fn build_unchecked(
        raster: &ResistanceRaster,
        params: &GraphParams,
        source: CellCoord,
        target: CellCoord,
    ) -> Result<Self> {
        params.validate()?;
        let direction = (
            target.x as f64 - source.x as f64,
            target.y as f64 - source.y as f64,
        );
        let ring = ring_offsets(params.d_min, params.d_max, params.theta_alpha_deg, direction)?;
        if ring.len() > u16::MAX as usize {
            return Err(Error::InvalidParameter {
                field: "d_max",
                reason: format!("ring has {} offsets, at most {} supported", ring.len(), u16::MAX),
            });
        }
        let ring_angles = ring.offsets.iter().map(|&(dx, dy)| offset_angle(dx, dy)).collect();
        let (rows, cols) = (raster.rows(), raster.cols());
        let cells = rows * cols;
        let usable: Vec<bool> = raster.pylon_mask().iter().map(|f| !f).collect();
        let n = usable.iter().filter(|u| **u).count();

        let mut out_start = Vec::with_capacity(cells + 1);
        let mut edge_offset = Vec::new();
        let mut edge_tail = Vec::new();
        let mut edge_cost_v = Vec::new();
        out_start.push(0u32);
        for idx in 0..cells {
            if usable[idx] {
                let u = raster.coord(idx);
                for (k, &(dx, dy)) in ring.offsets.iter().enumerate() {
                    let (vx, vy) = u.offset(dx, dy);
                    if !raster.contains(vx, vy) {
                        continue;
                    }
                    let v = CellCoord::new(vx as usize, vy as usize);
                    if !usable[raster.index(v.x, v.y)] {
                        continue;
                    }
                    if let Some(c) = edge_cost(raster, u, v, params.w_c) {
                        edge_offset.push(k as u16);
                        edge_tail.push(idx as u32);
                        edge_cost_v.push(c);
                    }
                }
            }
            let m = edge_offset.len();
            if m > u32::MAX as usize - 1 {
                return Err(Error::InvalidParameter {
                    field: "raster",
                    reason: "more than 2^32 edges".into(),
                });
            }
            out_start.push(m as u32);
        }

        let m = edge_offset.len();
        let mut in_count = vec![0u32; cells + 1];
        for e in 0..m {
            let h = Self::head_index(cols, edge_tail[e], ring.offsets[edge_offset[e] as usize]);
            in_count[h + 1] += 1;
        }
        for i in 0..cells {
            in_count[i + 1] += in_count[i];
        }
        let in_start = in_count;
        let mut fill = in_start.clone();
        let mut in_edges = vec![0u32; m];
        for e in 0..m {
            let h = Self::head_index(cols, edge_tail[e], ring.offsets[edge_offset[e] as usize]);
            in_edges[fill[h] as usize] = e as u32;
            fill[h] += 1;
        }

        let g = Self {
            rows,
            cols,
            source,
            target,
            ring,
            ring_angles,
            is_dag: params.is_dag(),
            direction,
            usable,
            n,
            out_start,
            edge_offset,
            edge_tail,
            edge_cost: edge_cost_v,
            in_start,
            in_edges,
        };
        if g.out_edges(g.cell_index(source)).is_empty() {
            return Err(Error::Isolated { which: "source" });
        }
        if g.in_edges(g.cell_index(target)).is_empty() {
            return Err(Error::Isolated { which: "target" });
        }
        Ok(g)
    }

    #[inline]
    fn head_index(cols: usize, tail: u32, (dx, dy): (i32, i32)) -> usize {
        let t = tail as usize;
        let x = (t % cols) as i64 + dx as i64;
        let y = (t / cols) as i64 + dy as i64;
        y as usize * cols + x as usize
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn source(&self) -> CellCoord {
        self.source
    }

    pub fn target(&self) -> CellCoord {
        self.target
    }

    pub fn ring(&self) -> &RingOffsets {
        &self.ring
    }

    pub fn is_dag(&self) -> bool {
        self.is_dag
    }

    /// Number of usable vertices.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of directed edges.
    pub fn m(&self) -> usize {
        self.edge_offset.len()
    }

    #[inline]
    pub fn cell_index(&self, c: CellCoord) -> usize {
        c.y * self.cols + c.x
    }

    #[inline]
    pub fn cell(&self, index: usize) -> CellCoord {
        CellCoord::new(index % self.cols, index / self.cols)
    }

    pub fn is_usable(&self, c: CellCoord) -> bool {
        c.x < self.cols && c.y < self.rows && self.usable[self.cell_index(c)]
    }

    #[inline]
    pub fn out_edges(&self, cell: usize) -> Range<usize> {
        self.out_start[cell] as usize..self.out_start[cell + 1] as usize
    }

    #[inline]
    pub fn in_edges(&self, cell: usize) -> &[u32] {
        &self.in_edges[self.in_start[cell] as usize..self.in_start[cell + 1] as usize]
    }

    #[inline]
    pub fn tail(&self, e: usize) -> usize {
        self.edge_tail[e] as usize
    }

    #[inline]
    pub fn head(&self, e: usize) -> usize {
        Self::head_index(self.cols, self.edge_tail[e], self.ring.offsets[self.edge_offset[e] as usize])
    }

    #[inline]
    pub fn offset_index(&self, e: usize) -> usize {
        self.edge_offset[e] as usize
    }

    #[inline]
    pub fn cost(&self, e: usize) -> f64 {
        self.edge_cost[e]
    }

    /// Direction of travel along `e`, clockwise degrees from +x.
    #[inline]
    pub fn angle(&self, e: usize) -> f64 {
        self.ring_angles[self.edge_offset[e] as usize]
    }

    pub fn ring_angles(&self) -> &[f64] {
        &self.ring_angles
    }

    pub fn edge_ref(&self, e: usize) -> EdgeRef {
        EdgeRef {
            tail: self.cell(self.tail(e)),
            offset_index: self.edge_offset[e],
        }
    }

    pub fn resolve(&self, r: EdgeRef) -> Option<usize> {
        if !self.is_usable(r.tail) {
            return None;
        }
        let range = self.out_edges(self.cell_index(r.tail));
        let slice = &self.edge_offset[range.clone()];
        slice
            .binary_search(&r.offset_index)
            .ok()
            .map(|i| range.start + i)
    }

    /// Usable cells ordered so that every edge goes forward. Only meaningful
    /// for DAG graphs, where each edge strictly increases the projection onto
    /// the source-target direction.
    pub fn topological_order(&self) -> Option<Vec<u32>> {
        if !self.is_dag {
            return None;
        }
        let (dx, dy) = self.direction;
        let mut cells: Vec<(f64, u32)> = (0..self.cell_count())
            .filter(|&i| self.usable[i])
            .map(|i| {
                let c = self.cell(i);
                let p = (c.x as f64 - self.source.x as f64) * dx + (c.y as f64 - self.source.y as f64) * dy;
                (p, i as u32)
            })
            .collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Some(cells.into_iter().map(|(_, i)| i).collect())
    }
}

pub fn build_graph(raster: &ResistanceRaster, scenario: &Scenario) -> Result<RouteGraph> {
    RouteGraph::build(raster, scenario)
}
