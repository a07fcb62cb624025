//! Resistance rasters: binary geographic layers combined into separate pylon
//! and cable cost grids, plus the downsampling and corridor masking used by
//! the coarse-to-fine pipeline.
//!
//! Coordinates are `(x, y)` with `x` the column and `y` the row, row 0 at the
//! top. Forbidden cells store a cost of `0.0` and carry a mask flag; callers
//! must consult the mask before using a cost.

pub mod ascii;

use crate::error::{Error, Result};
use crate::graph::CellCoord;

/// A binary feature layer, e.g. "forest" or "residential".
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    name: String,
    rows: usize,
    cols: usize,
    grid: Vec<u8>,
}

impl Layer {
    pub fn new(name: impl Into<String>, rows: usize, cols: usize, grid: Vec<u8>) -> Result<Self> {
        let name = name.into();
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter {
                field: "layer",
                reason: format!("layer `{name}` has zero size"),
            });
        }
        if grid.len() != rows * cols {
            return Err(Error::InvalidParameter {
                field: "layer",
                reason: format!(
                    "layer `{name}` has {} values, expected {}",
                    grid.len(),
                    rows * cols
                ),
            });
        }
        if let Some(&v) = grid.iter().find(|&&v| v > 1) {
            return Err(Error::NonBinaryLayer {
                name,
                value: v as i64,
            });
        }
        Ok(Self {
            name,
            rows,
            cols,
            grid,
        })
    }

    pub fn from_fn(
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Self {
        let mut grid = Vec::with_capacity(rows * cols);
        for y in 0..rows {
            for x in 0..cols {
                grid.push(f(x, y) as u8);
            }
        }
        Self {
            name: name.into(),
            rows,
            cols,
            grid,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.grid[y * self.cols + x] == 1
    }

    pub fn values(&self) -> &[u8] {
        &self.grid
    }
}

/// Weight of a layer; `Infinite` marks the feature as prohibitive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weight {
    Finite(f64),
    Infinite,
}

impl Weight {
    pub fn is_infinite(self) -> bool {
        matches!(self, Weight::Infinite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerWeight {
    pub pylon: Weight,
    pub cable: Weight,
}

impl LayerWeight {
    pub fn new(pylon: Weight, cable: Weight) -> Self {
        Self { pylon, cable }
    }

    pub fn finite(pylon: f64, cable: f64) -> Self {
        Self {
            pylon: Weight::Finite(pylon),
            cable: Weight::Finite(cable),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceRaster {
    rows: usize,
    cols: usize,
    cell_size_m: f64,
    pylon_cost: Vec<f64>,
    cable_cost: Vec<f64>,
    forbidden_pylon: Vec<bool>,
    forbidden_cable: Vec<bool>,
}

impl ResistanceRaster {
    /// Builds a raster from dense row-major grids. Costs of forbidden cells are
    /// reset to zero.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        cell_size_m: f64,
        mut pylon_cost: Vec<f64>,
        mut cable_cost: Vec<f64>,
        forbidden_pylon: Vec<bool>,
        forbidden_cable: Vec<bool>,
    ) -> Result<Self> {
        let n = rows * cols;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter {
                field: "raster",
                reason: "raster has zero size".into(),
            });
        }
        if !(cell_size_m.is_finite() && cell_size_m > 0.0) {
            return Err(Error::InvalidParameter {
                field: "cell_size_m",
                reason: format!("must be positive, got {cell_size_m}"),
            });
        }
        for len in [
            pylon_cost.len(),
            cable_cost.len(),
            forbidden_pylon.len(),
            forbidden_cable.len(),
        ] {
            if len != n {
                return Err(Error::InvalidParameter {
                    field: "raster",
                    reason: format!("grid has {len} cells, expected {n}"),
                });
            }
        }
        for (costs, mask) in [
            (&mut pylon_cost, &forbidden_pylon),
            (&mut cable_cost, &forbidden_cable),
        ] {
            for (c, &f) in costs.iter_mut().zip(mask) {
                if f {
                    *c = 0.0;
                } else if !(c.is_finite() && *c >= 0.0) {
                    return Err(Error::InvalidParameter {
                        field: "raster",
                        reason: format!("cost {c} is not a finite nonnegative number"),
                    });
                }
            }
        }
        Ok(Self {
            rows,
            cols,
            cell_size_m,
            pylon_cost,
            cable_cost,
            forbidden_pylon,
            forbidden_cable,
        })
    }

    /// Raster with the given costs everywhere and nothing forbidden.
    pub fn uniform(rows: usize, cols: usize, pylon: f64, cable: f64) -> Self {
        let n = rows * cols;
        Self::from_parts(
            rows,
            cols,
            1.0,
            vec![pylon; n],
            vec![cable; n],
            vec![false; n],
            vec![false; n],
        )
        .expect("uniform raster parameters are valid")
    }

    /// Raster from closures over `(x, y)`; nothing forbidden.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut pylon: impl FnMut(usize, usize) -> f64,
        mut cable: impl FnMut(usize, usize) -> f64,
    ) -> Self {
        let mut p = Vec::with_capacity(rows * cols);
        let mut c = Vec::with_capacity(rows * cols);
        for y in 0..rows {
            for x in 0..cols {
                p.push(pylon(x, y));
                c.push(cable(x, y));
            }
        }
        Self::from_parts(
            rows,
            cols,
            1.0,
            p,
            c,
            vec![false; rows * cols],
            vec![false; rows * cols],
        )
        .expect("closure costs must be finite and nonnegative")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_size_m(&self) -> f64 {
        self.cell_size_m
    }

    pub fn with_cell_size(mut self, cell_size_m: f64) -> Self {
        assert!(cell_size_m > 0.0);
        self.cell_size_m = cell_size_m;
        self
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.cols && y < self.rows);
        y * self.cols + x
    }

    #[inline]
    pub fn coord(&self, index: usize) -> CellCoord {
        CellCoord::new(index % self.cols, index / self.cols)
    }

    #[inline]
    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.cols && (y as usize) < self.rows
    }

    #[inline]
    pub fn pylon(&self, c: CellCoord) -> f64 {
        self.pylon_cost[self.index(c.x, c.y)]
    }

    #[inline]
    pub fn cable(&self, c: CellCoord) -> f64 {
        self.cable_cost[self.index(c.x, c.y)]
    }

    #[inline]
    pub fn pylon_forbidden(&self, c: CellCoord) -> bool {
        self.forbidden_pylon[self.index(c.x, c.y)]
    }

    #[inline]
    pub fn cable_forbidden(&self, c: CellCoord) -> bool {
        self.forbidden_cable[self.index(c.x, c.y)]
    }

    pub fn pylon_costs(&self) -> &[f64] {
        &self.pylon_cost
    }

    pub fn cable_costs(&self) -> &[f64] {
        &self.cable_cost
    }

    pub fn pylon_mask(&self) -> &[bool] {
        &self.forbidden_pylon
    }

    pub fn cable_mask(&self) -> &[bool] {
        &self.forbidden_cable
    }

    pub fn set_pylon(&mut self, c: CellCoord, cost: f64) {
        assert!(cost.is_finite() && cost >= 0.0);
        let i = self.index(c.x, c.y);
        if !self.forbidden_pylon[i] {
            self.pylon_cost[i] = cost;
        }
    }

    pub fn set_cable(&mut self, c: CellCoord, cost: f64) {
        assert!(cost.is_finite() && cost >= 0.0);
        let i = self.index(c.x, c.y);
        if !self.forbidden_cable[i] {
            self.cable_cost[i] = cost;
        }
    }

    pub fn forbid_pylon(&mut self, c: CellCoord) {
        let i = self.index(c.x, c.y);
        self.forbidden_pylon[i] = true;
        self.pylon_cost[i] = 0.0;
    }

    pub fn forbid_cable(&mut self, c: CellCoord) {
        let i = self.index(c.x, c.y);
        self.forbidden_cable[i] = true;
        self.cable_cost[i] = 0.0;
    }

    /// Number of cells where a pylon may be placed.
    pub fn pylon_allowed_count(&self) -> usize {
        self.forbidden_pylon.iter().filter(|f| !**f).count()
    }

    /// Mean pylon cost over non-forbidden cells (0 if none).
    pub fn mean_pylon_cost(&self) -> f64 {
        mean_finite(&self.pylon_cost, &self.forbidden_pylon)
    }
}

fn mean_finite(costs: &[f64], mask: &[bool]) -> f64 {
    let (sum, n) = costs
        .iter()
        .zip(mask)
        .filter(|(_, f)| !**f)
        .fold((0.0, 0usize), |(s, n), (c, _)| (s + c, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Combines layers into pylon and cable resistances as a weighted sum.
///
/// A cell is forbidden for pylons (cables) iff some layer with an infinite
/// pylon (cable) weight is set there.
pub fn build_resistance(
    layers: &[Layer],
    weights: &[LayerWeight],
    cell_size_m: f64,
) -> Result<ResistanceRaster> {
    let first = layers.first().ok_or(Error::EmptyLayers)?;
    if layers.len() != weights.len() {
        return Err(Error::WeightCountMismatch {
            layers: layers.len(),
            weights: weights.len(),
        });
    }
    let (rows, cols) = (first.rows, first.cols);
    for l in layers {
        if l.rows != rows || l.cols != cols {
            return Err(Error::DimensionMismatch {
                expected_rows: rows,
                expected_cols: cols,
                rows: l.rows,
                cols: l.cols,
            });
        }
    }
    for w in weights {
        for wt in [w.pylon, w.cable] {
            if let Weight::Finite(v) = wt {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::InvalidParameter {
                        field: "weight",
                        reason: format!("layer weights must be nonnegative, got {v}"),
                    });
                }
            }
        }
    }
    let n = rows * cols;
    let mut pylon = vec![0.0; n];
    let mut cable = vec![0.0; n];
    let mut fp = vec![false; n];
    let mut fc = vec![false; n];
    for (layer, w) in layers.iter().zip(weights) {
        accumulate(&layer.grid, w.pylon, &mut pylon, &mut fp);
        accumulate(&layer.grid, w.cable, &mut cable, &mut fc);
    }
    ResistanceRaster::from_parts(rows, cols, cell_size_m, pylon, cable, fp, fc)
}

fn accumulate(grid: &[u8], weight: Weight, costs: &mut [f64], mask: &mut [bool]) {
    match weight {
        Weight::Finite(w) => {
            for (c, &g) in costs.iter_mut().zip(grid) {
                *c += w * g as f64;
            }
        }
        Weight::Infinite => {
            for (m, &g) in mask.iter_mut().zip(grid) {
                *m |= g == 1;
            }
        }
    }
}

/// Block-mean downsampling. A coarse cell is forbidden only if every member is.
pub fn downsample(raster: &ResistanceRaster, factor: usize) -> Result<ResistanceRaster> {
    if factor == 0 {
        return Err(Error::ZeroFactor);
    }
    if factor == 1 {
        return Ok(raster.clone());
    }
    let rows = raster.rows.div_ceil(factor);
    let cols = raster.cols.div_ceil(factor);
    let n = rows * cols;
    let mut pylon = vec![0.0; n];
    let mut cable = vec![0.0; n];
    let mut fp = vec![false; n];
    let mut fc = vec![false; n];
    for by in 0..rows {
        for bx in 0..cols {
            let o = by * cols + bx;
            let (p, pf) = block_mean(raster, bx, by, factor, &raster.pylon_cost, &raster.forbidden_pylon);
            let (c, cf) = block_mean(raster, bx, by, factor, &raster.cable_cost, &raster.forbidden_cable);
            pylon[o] = p;
            fp[o] = pf;
            cable[o] = c;
            fc[o] = cf;
        }
    }
    ResistanceRaster::from_parts(
        rows,
        cols,
        raster.cell_size_m * factor as f64,
        pylon,
        cable,
        fp,
        fc,
    )
}

fn block_mean(
    r: &ResistanceRaster,
    bx: usize,
    by: usize,
    factor: usize,
    costs: &[f64],
    mask: &[bool],
) -> (f64, bool) {
    let (mut sum, mut n) = (0.0, 0usize);
    for y in by * factor..((by + 1) * factor).min(r.rows) {
        for x in bx * factor..((bx + 1) * factor).min(r.cols) {
            let i = y * r.cols + x;
            if !mask[i] {
                sum += costs[i];
                n += 1;
            }
        }
    }
    if n == 0 {
        (0.0, true)
    } else {
        (sum / n as f64, false)
    }
}

/// Marks every cell farther than `width_cells` (Euclidean, cell units) from
/// all given vertices as forbidden for both pylons and cables.
pub fn corridor_mask<I>(raster: &ResistanceRaster, vertices: I, width_cells: f64) -> Result<ResistanceRaster>
where
    I: IntoIterator<Item = CellCoord>,
{
    if !(width_cells >= 0.0) {
        return Err(Error::InvalidParameter {
            field: "width_cells",
            reason: format!("corridor width must be nonnegative, got {width_cells}"),
        });
    }
    let inside = corridor_cells(raster.rows, raster.cols, vertices, width_cells)?;
    let mut out = raster.clone();
    for (i, keep) in inside.iter().enumerate() {
        if !keep {
            out.forbidden_pylon[i] = true;
            out.forbidden_cable[i] = true;
            out.pylon_cost[i] = 0.0;
            out.cable_cost[i] = 0.0;
        }
    }
    Ok(out)
}

/// Boolean buffer of cells within `width` of any vertex.
pub fn corridor_cells<I>(rows: usize, cols: usize, vertices: I, width: f64) -> Result<Vec<bool>>
where
    I: IntoIterator<Item = CellCoord>,
{
    let d2 = squared_distance_field(rows, cols, vertices)?;
    let w2 = width * width;
    Ok(d2.iter().map(|&d| d <= w2).collect())
}

/// Squared Euclidean distance from every cell to the nearest seed, row-major.
/// Exact, in time linear in the cell count.
pub fn squared_distance_field<I>(rows: usize, cols: usize, seeds: I) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = CellCoord>,
{
    let mut f = vec![f64::INFINITY; rows * cols];
    let mut any = false;
    for v in seeds {
        if v.x < cols && v.y < rows {
            f[v.y * cols + v.x] = 0.0;
            any = true;
        }
    }
    if !any {
        return Err(Error::EmptyPath);
    }
    let n = rows.max(cols);
    let (mut line, mut out) = (vec![0.0; n], vec![0.0; n]);
    let (mut v, mut z) = (vec![0usize; n], vec![0.0; n + 1]);
    for x in 0..cols {
        for y in 0..rows {
            line[y] = f[y * cols + x];
        }
        lower_envelope(&line[..rows], &mut out[..rows], &mut v, &mut z);
        for y in 0..rows {
            f[y * cols + x] = out[y];
        }
    }
    for y in 0..rows {
        line[..cols].copy_from_slice(&f[y * cols..(y + 1) * cols]);
        lower_envelope(&line[..cols], &mut out[..cols], &mut v, &mut z);
        f[y * cols..(y + 1) * cols].copy_from_slice(&out[..cols]);
    }
    Ok(f)
}

/// One-dimensional squared distance transform of a sampled function
/// (Felzenszwalb and Huttenlocher). Infinite samples are skipped.
fn lower_envelope(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let p = v[k as usize];
            let pf = p as f64;
            let s = ((f[q] + qf * qf) - (f[p] + pf * pf)) / (2.0 * qf - 2.0 * pf);
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        d.fill(f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[j + 1] < qf {
            j += 1;
        }
        let p = v[j] as f64;
        *out = (qf - p) * (qf - p) + f[v[j]];
    }
}
