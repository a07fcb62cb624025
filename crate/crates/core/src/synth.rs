//! Seeded synthetic rasters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::raster::ResistanceRaster;

/// Isotropic Gaussian bump centred at `(cx, cy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub cx: f64,
    pub cy: f64,
    pub sigma: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn at(&self, x: f64, y: f64) -> f64 {
        let d2 = (x - self.cx).powi(2) + (y - self.cy).powi(2);
        self.amplitude * (-d2 / (2.0 * self.sigma * self.sigma)).exp()
    }
}

pub fn random_bumps(rng: &mut impl Rng, rows: usize, cols: usize, count: usize) -> Vec<Bump> {
    let scale = rows.min(cols) as f64;
    (0..count)
        .map(|_| Bump {
            cx: rng.gen_range(0.0..cols as f64),
            cy: rng.gen_range(0.0..rows as f64),
            sigma: rng.gen_range(0.06..0.18) * scale,
            amplitude: rng.gen_range(5.0..20.0),
        })
        .collect()
}

/// `base` plus the sum of `bumps` at every cell, row-major.
pub fn bump_field(rows: usize, cols: usize, base: f64, bumps: &[Bump]) -> Vec<f64> {
    let mut out = Vec::with_capacity(rows * cols);
    for y in 0..rows {
        for x in 0..cols {
            out.push(base + bumps.iter().map(|b| b.at(x as f64, y as f64)).sum::<f64>());
        }
    }
    out
}

/// Smooth raster of 3 to 6 bumps shared by pylon and cable resistance.
pub fn smooth_raster(rows: usize, cols: usize, seed: u64) -> ResistanceRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.gen_range(3..=6);
    let bumps = random_bumps(&mut rng, rows, cols, count);
    let field = bump_field(rows, cols, 1.0, &bumps);
    ResistanceRaster::from_fn(rows, cols, |x, y| field[y * cols + x], |x, y| field[y * cols + x])
}

/// Raster whose pylon and cable resistances follow unrelated structures:
/// pylon costs are bumps, cable costs are bands plus their own bumps.
pub fn split_raster(rows: usize, cols: usize, seed: u64) -> ResistanceRaster {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_p = rng.gen_range(3..=6);
    let n_c = rng.gen_range(2..=4);
    let pb = random_bumps(&mut rng, rows, cols, n_p);
    let cb = random_bumps(&mut rng, rows, cols, n_c);
    let pylon = bump_field(rows, cols, 1.0, &pb);
    let cable = bump_field(rows, cols, 0.5, &cb);
    let period = rng.gen_range(4..9);
    let band = rng.gen_range(2.0..8.0);
    let vertical = rng.gen_bool(0.5);
    ResistanceRaster::from_fn(
        rows,
        cols,
        |x, y| pylon[y * cols + x],
        |x, y| {
            let t = if vertical { x } else { y };
            cable[y * cols + x] + if t % period == 0 { band } else { 0.0 }
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_smooth() {
        let a = smooth_raster(40, 50, 3);
        assert_eq!(a, smooth_raster(40, 50, 3));
        assert_ne!(a, smooth_raster(40, 50, 4));
        let p = a.pylon_costs();
        for y in 0..40 {
            for x in 1..50 {
                assert!((p[y * 50 + x] - p[y * 50 + x - 1]).abs() < 3.0);
            }
        }
        assert!(p.iter().all(|&v| v >= 1.0));
    }

    #[test]
    fn split_differs_between_layers() {
        let r = split_raster(30, 30, 1);
        assert_ne!(r.pylon_costs(), r.cable_costs());
    }
}
