use super::CellCoord;
use crate::error::{Error, Result};

/// Integer-error Bresenham walk from `a` to `b`, both endpoints included.
#[derive(Debug, Clone)]
pub struct Bresenham {
    x: i64,
    y: i64,
    x1: i64,
    y1: i64,
    dx: i64,
    dy: i64,
    sx: i64,
    sy: i64,
    err: i64,
    done: bool,
}

impl Bresenham {
    pub fn new(a: (i64, i64), b: (i64, i64)) -> Self {
        let dx = (b.0 - a.0).abs();
        let dy = -(b.1 - a.1).abs();
        Self {
            x: a.0,
            y: a.1,
            x1: b.0,
            y1: b.1,
            dx,
            dy,
            sx: if a.0 < b.0 { 1 } else { -1 },
            sy: if a.1 < b.1 { 1 } else { -1 },
            err: dx + dy,
            done: false,
        }
    }
}

impl Iterator for Bresenham {
    type Item = (i64, i64);

    fn next(&mut self) -> Option<(i64, i64)> {
        if self.done {
            return None;
        }
        let out = (self.x, self.y);
        if self.x == self.x1 && self.y == self.y1 {
            self.done = true;
        } else {
            let e2 = 2 * self.err;
            if e2 >= self.dy {
                self.err += self.dy;
                self.x += self.sx;
            }
            if e2 <= self.dx {
                self.err += self.dx;
                self.y += self.sy;
            }
        }
        Some(out)
    }
}

/// Cells on the rasterized segment `a -> b`.
pub fn bresenham(a: CellCoord, b: CellCoord) -> Result<Vec<CellCoord>> {
    if a == b {
        return Err(Error::DegenerateSegment);
    }
    Ok(Bresenham::new(a.as_i64(), b.as_i64())
        .map(|(x, y)| CellCoord::new(x as usize, y as usize))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: usize, y: usize) -> CellCoord {
        CellCoord::new(x, y)
    }

    /// First-octant textbook formulation with decision variable 2dy - dx.
    fn textbook(x0: i64, y0: i64, x1: i64, y1: i64) -> Vec<(i64, i64)> {
        let (dx, dy) = (x1 - x0, y1 - y0);
        assert!(0 <= dy && dy <= dx);
        let mut d = 2 * dy - dx;
        let mut y = y0;
        let mut out = vec![];
        for x in x0..=x1 {
            out.push((x, y));
            if d > 0 {
                y += 1;
                d -= 2 * dx;
            }
            d += 2 * dy;
        }
        out
    }

    #[test]
    fn axis_and_diagonal() {
        assert_eq!(
            bresenham(c(0, 0), c(4, 0)).unwrap(),
            (0..5).map(|x| c(x, 0)).collect::<Vec<_>>()
        );
        assert_eq!(
            bresenham(c(0, 0), c(3, 3)).unwrap(),
            (0..4).map(|i| c(i, i)).collect::<Vec<_>>()
        );
    }

    #[test]
    fn shallow_slope_matches_textbook() {
        let expect: Vec<_> = textbook(0, 0, 3, 2)
            .into_iter()
            .map(|(x, y)| c(x as usize, y as usize))
            .collect();
        assert_eq!(expect, vec![c(0, 0), c(1, 1), c(2, 1), c(3, 2)]);
        assert_eq!(bresenham(c(0, 0), c(3, 2)).unwrap(), expect);
    }

    #[test]
    fn coincident_endpoints_rejected() {
        assert_eq!(bresenham(c(2, 2), c(2, 2)), Err(Error::DegenerateSegment));
    }

    proptest! {
        #[test]
        fn first_octant_matches_textbook(dx in 1i64..40, frac in 0.0f64..=1.0) {
            let dy = ((dx as f64) * frac).floor() as i64;
            let got: Vec<_> = Bresenham::new((5, 7), (5 + dx, 7 + dy)).collect();
            let want = textbook(5, 7, 5 + dx, 7 + dy);
            prop_assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                prop_assert_eq!(g.0, w.0);
                let t = g.0 - 5;
                // the two conventions may round exact half-steps differently
                let tie = (2 * dy * t) % (2 * dx) == dx;
                if !tie {
                    prop_assert_eq!(g.1, w.1);
                }
                let exact = 7.0 + dy as f64 * t as f64 / dx as f64;
                prop_assert!((g.1 as f64 - exact).abs() <= 0.5);
            }
        }

        #[test]
        fn endpoints_and_adjacency(ax in 0usize..30, ay in 0usize..30, bx in 0usize..30, by in 0usize..30) {
            prop_assume!((ax, ay) != (bx, by));
            let fwd = bresenham(c(ax, ay), c(bx, by)).unwrap();
            let back = bresenham(c(bx, by), c(ax, ay)).unwrap();
            prop_assert_eq!(fwd[0], c(ax, ay));
            prop_assert_eq!(*fwd.last().unwrap(), c(bx, by));
            prop_assert_eq!(back[0], c(bx, by));
            prop_assert_eq!(*back.last().unwrap(), c(ax, ay));
            prop_assert_eq!(fwd.len(), back.len());
            let steps = ax.abs_diff(bx).max(ay.abs_diff(by));
            prop_assert_eq!(fwd.len(), steps + 1);
            for w in fwd.windows(2) {
                prop_assert!(w[0].x.abs_diff(w[1].x) <= 1 && w[0].y.abs_diff(w[1].y) <= 1);
            }
        }
    }
}
