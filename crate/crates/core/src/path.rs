use crate::anglebf::{turning_angle, AngleCostFunction};
use crate::error::{Error, Result};
use crate::graph::{edge_cost, offset_angle, Bresenham, CellCoord};
use crate::raster::ResistanceRaster;

/// A pylon sequence with its cost breakdown.
///
/// `pylon` sums the mean endpoint pylon resistance of every span, `cable`
/// sums `w_c` times the mean cable resistance of every span and `angle` sums
/// the turning penalties, so `cost == pylon + cable + angle` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub vertices: Vec<CellCoord>,
    pub cost: f64,
    pub pylon: f64,
    pub cable: f64,
    pub angle: f64,
    /// Largest turning angle at any inner pylon, degrees.
    pub max_angle: f64,
}

impl Path {
    /// Evaluates a pylon sequence on `raster`.
    pub fn evaluate(raster: &ResistanceRaster, w_c: f64, f: &AngleCostFunction, vertices: Vec<CellCoord>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::EmptyPath);
        }
        let (mut cost, mut pylon, mut cable, mut angle, mut max_angle) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
        let mut prev_dir: Option<f64> = None;
        for w in vertices.windows(2) {
            let (u, v) = (w[0], w[1]);
            let c = edge_cost(raster, u, v, w_c).ok_or_else(|| Error::InvalidParameter {
                field: "path",
                reason: format!("span ({},{})-({},{}) crosses a cable-forbidden cell", u.x, u.y, v.x, v.y),
            })?;
            let p = (raster.pylon(u) + raster.pylon(v)) / 2.0;
            pylon += p;
            cable += c - p;
            let dir = offset_angle(v.x as i32 - u.x as i32, v.y as i32 - u.y as i32);
            let mut a = 0.0;
            if let Some(d) = prev_dir {
                let t = turning_angle(d, dir);
                max_angle = max_angle.max(t);
                a = f.evaluate(t);
                angle += a;
            }
            // same grouping as the solver: (D + turn) + span
            cost += a;
            cost += c;
            prev_dir = Some(dir);
        }
        Ok(Self { vertices, cost, pylon, cable, angle, max_angle })
    }

    pub fn pylon_count(&self) -> usize {
        self.vertices.len()
    }

    /// Every cell touched by a cable of this path, in order, without repeats
    /// at span joints.
    pub fn cable_cells(&self) -> Vec<CellCoord> {
        let mut out = Vec::new();
        for w in self.vertices.windows(2) {
            let skip = usize::from(!out.is_empty());
            out.extend(
                Bresenham::new(w[0].as_i64(), w[1].as_i64())
                    .skip(skip)
                    .map(|(x, y)| CellCoord::new(x as usize, y as usize)),
            );
        }
        if out.is_empty() {
            out.extend(self.vertices.iter().copied());
        }
        out
    }

    /// Whether some pylon position occurs twice.
    pub fn has_repeated_vertex(&self) -> bool {
        let mut v = self.vertices.clone();
        v.sort_unstable();
        v.windows(2).any(|w| w[0] == w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn breakdown_sums_to_total() {
        let r = ResistanceRaster::from_fn(6, 6, |x, y| (x + y) as f64, |x, _| x as f64 * 0.5);
        let f = AngleCostFunction::Convex { a: 3.0, q: 2.0 };
        let v = vec![CellCoord::new(0, 0), CellCoord::new(2, 1), CellCoord::new(4, 4), CellCoord::new(5, 5)];
        let p = Path::evaluate(&r, 2.0, &f, v).unwrap();
        assert!((p.cost - (p.pylon + p.cable + p.angle)).abs() < 1e-9);
        assert!(p.max_angle > 0.0);
        assert_eq!(p.pylon_count(), 4);
    }

    #[test]
    fn straight_line_has_no_angle_cost() {
        let r = ResistanceRaster::uniform(1, 7, 2.0, 4.0);
        let f = AngleCostFunction::Convex { a: 100.0, q: 1.0 };
        let v = (0..7).step_by(3).map(|x| CellCoord::new(x, 0)).collect();
        let p = Path::evaluate(&r, 0.5, &f, v).unwrap();
        assert_eq!(p.angle, 0.0);
        assert_eq!(p.cost, 8.0);
        assert_eq!(p.cable_cells().len(), 7);
    }

    #[test]
    fn repeated_vertex_detection() {
        let r = ResistanceRaster::uniform(3, 3, 1.0, 1.0);
        let v = vec![CellCoord::new(0, 0), CellCoord::new(1, 0), CellCoord::new(0, 0)];
        assert!(Path::evaluate(&r, 1.0, &AngleCostFunction::zero(), v).unwrap().has_repeated_vertex());
    }

    #[test]
    fn empty_rejected() {
        let r = ResistanceRaster::uniform(3, 3, 1.0, 1.0);
        assert_eq!(Path::evaluate(&r, 1.0, &AngleCostFunction::zero(), vec![]), Err(Error::EmptyPath));
    }
}
