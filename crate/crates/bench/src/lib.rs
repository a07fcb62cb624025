//! Fixed benchmark instances.

use pylon_core::anglebf::VertexLocalProblem;
use pylon_core::graph::{offset_angle, ring_offsets};
use pylon_core::{synth, AngleCostFunction, CellCoord, GraphParams, ResistanceRaster, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Local problem at a vertex of a cone-free graph whose ring has at least
/// `n` offsets; in-edges arrive along every ring direction.
pub fn ring_problem(n: usize, seed: u64) -> VertexLocalProblem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = 1.0;
    let ring = loop {
        let ring = ring_offsets(d, d * 1.45, 180.0, (1.0, 0.0)).expect("valid ring");
        if ring.len() >= n {
            break ring;
        }
        d += 0.25;
    };
    let out: Vec<f64> = ring.as_slice().iter().map(|&(dx, dy)| offset_angle(dx, dy)).collect();
    let inc = out.iter().map(|a| (a + 180.0) % 360.0).collect();
    let dist = (0..out.len()).map(|_| rng.gen_range(0..100) as f64).collect();
    VertexLocalProblem::new(dist, inc, out)
}

pub fn convex_cost() -> AngleCostFunction {
    AngleCostFunction::Convex { a: 50.0, q: 2.0 }
}

pub fn step_cost() -> AngleCostFunction {
    AngleCostFunction::Step { breakpoints: vec![30.0, 90.0], costs: vec![0.0, 10.0, 40.0] }
}

/// Smooth square raster with a corner-to-corner scenario.
pub fn raster_route(size: usize, d_max: f64, angle_cost: AngleCostFunction) -> (ResistanceRaster, Scenario) {
    let raster = synth::smooth_raster(size, size, 7);
    let params = GraphParams { d_min: 2.0, d_max, theta_alpha_deg: 60.0, w_c: 1.0 };
    let s = CellCoord::new(1, 1);
    let t = CellCoord::new(size - 2, size - 2);
    (raster, Scenario::new(params, s, t, angle_cost))
}
