use std::collections::HashSet;

use proptest::prelude::*;
use pylon_core::anglebf::mabf;
use pylon_core::graph::{edge_cost, offset_angle, ring_offsets};
use pylon_core::ksp::{build_trees, find_ksp_max, k_dispersion, k_shortest, yau_hausdorff};
use pylon_core::multiscale::run_multiscale;
use pylon_core::raster::downsample;
use pylon_core::{
    solve_route, AngleCostFunction, CellCoord, DiversityMetric, GraphParams, KernelChoice, MultiScalePlan, Path,
    ResistanceRaster, RouteGraph, Scenario,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raster(seed: u64, rows: usize, cols: usize, forbidden: f64) -> ResistanceRaster {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = rows * cols;
    let pylon = (0..n).map(|_| r.gen_range(0.0..10.0)).collect();
    let cable = (0..n).map(|_| r.gen_range(0.0..10.0)).collect();
    let fp = (0..n).map(|_| r.gen_bool(forbidden)).collect();
    let fc = (0..n).map(|_| r.gen_bool(forbidden / 2.0)).collect();
    ResistanceRaster::from_parts(rows, cols, 1.0, pylon, cable, fp, fc).unwrap()
}

/// Raster and a scenario from the left to the right border with open endpoints.
fn instance(seed: u64, d_max: f64, theta: f64) -> (ResistanceRaster, Scenario) {
    let mut r = raster(seed, 12, 14, 0.08);
    let (s, t) = (CellCoord::new(0, 5), CellCoord::new(13, 7));
    r.set_pylon(s, 1.0);
    r.set_pylon(t, 1.0);
    let params = GraphParams { d_min: 1.0, d_max, theta_alpha_deg: theta, w_c: 1.0 };
    (r, Scenario::new(params, s, t, AngleCostFunction::Convex { a: 3.0, q: 2.0 }))
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_matches_norm_scan(d_min in 1.0f64..4.0, extra in 0.0f64..3.0, theta in 10.0f64..=180.0, dir in 0.0f64..360.0) {
        let d_max = d_min + extra;
        let target = (dir.to_radians().cos(), dir.to_radians().sin());
        let ring = ring_offsets(d_min, d_max, theta, target);
        let r = d_max.ceil() as i32;
        let want: HashSet<(i32, i32)> = (-r..=r)
            .flat_map(|dx| (-r..=r).map(move |dy| (dx, dy)))
            .filter(|&(dx, dy)| {
                let n = ((dx * dx + dy * dy) as f64).sqrt();
                let dev = angle_diff(offset_angle(dx, dy), offset_angle_f(target));
                n >= d_min && n <= d_max && (theta >= 180.0 || dev < theta - 1e-9)
            })
            .collect();
        match ring {
            Ok(ring) => {
                let got: HashSet<(i32, i32)> = ring.as_slice().iter().copied().collect();
                prop_assert_eq!(got.len(), ring.len(), "duplicate offsets");
                // offsets within rounding distance of the cone edge may go either way
                for o in got.symmetric_difference(&want) {
                    let dev = angle_diff(offset_angle(o.0, o.1), offset_angle_f(target));
                    prop_assert!((dev - theta).abs() < 1e-6, "offset {:?} at {} deg", o, dev);
                }
            }
            Err(_) => prop_assert!(want.is_empty()),
        }
    }

    #[test]
    fn graph_edges_pass_every_filter(seed in any::<u64>(), d_max in 1.0f64..3.0, theta in prop::sample::select(vec![45.0, 60.0, 89.0, 90.0, 135.0, 180.0])) {
        let (r, sc) = instance(seed, d_max, theta);
        let Ok(g) = RouteGraph::build(&r, &sc) else { return Ok(()) };
        prop_assert_eq!(g.is_dag(), theta < 90.0);
        prop_assert_eq!(g.topological_order().is_some() || !g.is_dag(), true);
        let mut expected = 0;
        for idx in 0..g.cell_count() {
            let u = r.coord(idx);
            if r.pylon_forbidden(u) {
                continue;
            }
            for &(dx, dy) in g.ring().as_slice() {
                let (vx, vy) = u.offset(dx, dy);
                if r.contains(vx, vy) {
                    let v = CellCoord::new(vx as usize, vy as usize);
                    if !r.pylon_forbidden(v) && edge_cost(&r, u, v, 1.0).is_some() {
                        expected += 1;
                    }
                }
            }
        }
        prop_assert_eq!(g.m(), expected);
        for e in 0..g.m() {
            let (u, v) = (g.cell(g.tail(e)), g.cell(g.head(e)));
            prop_assert!(!r.pylon_forbidden(u) && !r.pylon_forbidden(v));
            let d = u.dist(v);
            prop_assert!(d >= 1.0 - 1e-12 && d <= d_max + 1e-12);
            prop_assert_eq!(Some(g.cost(e)), edge_cost(&r, u, v, 1.0));
        }
    }

    #[test]
    fn parametric_families_have_their_shape(a in 0.1f64..50.0, q in 0.05f64..=1.0, q2 in 1.0f64..4.0, x in 0.0f64..180.0, y in 0.0f64..180.0) {
        let concave = AngleCostFunction::Concave { a, q };
        let convex = AngleCostFunction::Convex { a, q: q2 };
        let mid = (x + y) / 2.0;
        let tol = 1e-9 * a;
        prop_assert!(concave.evaluate(mid) + tol >= (concave.evaluate(x) + concave.evaluate(y)) / 2.0);
        prop_assert!(convex.evaluate(mid) <= (convex.evaluate(x) + convex.evaluate(y)) / 2.0 + tol);
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        prop_assert!(convex.evaluate(lo) <= convex.evaluate(hi));
        prop_assert!(concave.evaluate(0.0) == 0.0 && convex.evaluate(0.0) == 0.0);
    }

    #[test]
    fn step_levels_are_constant_between_breakpoints(mut bp in prop::collection::vec(1.0f64..179.0, 0..4), x in 0.0f64..=180.0) {
        bp.sort_by(f64::total_cmp);
        bp.dedup();
        let costs: Vec<f64> = (0..=bp.len()).map(|i| 3.0 * i as f64).collect();
        let f = AngleCostFunction::Step { breakpoints: bp.clone(), costs: costs.clone() };
        let level = bp.iter().filter(|&&g| g <= x).count();
        prop_assert_eq!(f.evaluate(x), costs[level]);
    }

    #[test]
    fn distances_never_grow_with_the_path_limit(seed in any::<u64>(), p in 1usize..12) {
        let (r, sc) = instance(seed, 2.3, 180.0);
        let Ok(g) = RouteGraph::build(&r, &sc) else { return Ok(()) };
        let short = mabf(&g, &sc.angle_cost, KernelChoice::Auto, p).unwrap();
        let long = mabf(&g, &sc.angle_cost, KernelChoice::Auto, p + 1).unwrap();
        let s = g.cell_index(sc.source);
        for e in 0..g.m() {
            prop_assert!(long.dist[e] <= short.dist[e]);
            if g.tail(e) == s {
                prop_assert_eq!(short.dist[e], g.cost(e));
            }
        }
    }

    #[test]
    fn kernels_agree_on_raster_graphs(seed in any::<u64>(), theta in prop::sample::select(vec![60.0, 180.0])) {
        let (r, sc) = instance(seed, 2.5, theta);
        let Ok(g) = RouteGraph::build(&r, &sc) else { return Ok(()) };
        let p = sc.path_limit();
        let f = sc.angle_cost.clone();
        let naive = mabf(&g, &f, KernelChoice::Naive, p).unwrap();
        let convex = mabf(&g, &f, KernelChoice::Convex, p).unwrap();
        for e in 0..g.m() {
            let (a, b) = (naive.dist[e], convex.dist[e]);
            prop_assert!(a == b || (a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
        let step = AngleCostFunction::Step { breakpoints: vec![20.0, 70.0], costs: vec![0.0, 2.0, 9.0] };
        let naive = mabf(&g, &step, KernelChoice::Naive, p).unwrap();
        let fast = mabf(&g, &step, KernelChoice::Step, p).unwrap();
        prop_assert_eq!(naive.dist, fast.dist);
    }

    #[test]
    fn routes_decompose_and_respect_spans(seed in any::<u64>(), theta in prop::sample::select(vec![60.0, 120.0, 180.0])) {
        let (r, sc) = instance(seed, 2.5, theta);
        let Ok(sol) = solve_route(&r, &sc) else { return Ok(()) };
        let p = &sol.path;
        prop_assert!((p.cost - (p.pylon + p.cable + p.angle)).abs() <= 1e-6);
        prop_assert_eq!(p.vertices.first(), Some(&sc.source));
        prop_assert_eq!(p.vertices.last(), Some(&sc.target));
        for w in p.vertices.windows(2) {
            let d = w[0].dist(w[1]);
            prop_assert!(d >= 1.0 - 1e-12 && d <= 2.5 + 1e-12);
        }
        let again = Path::evaluate(&r, sc.params.w_c, &sc.angle_cost, p.vertices.clone()).unwrap();
        prop_assert!((again.cost - p.cost).abs() <= 1e-9 * p.cost.max(1.0));
        prop_assert_eq!(sol.map_elements, 2 * sol.m);
    }

    #[test]
    fn trees_agree_on_the_optimum(seed in any::<u64>(), theta in prop::sample::select(vec![60.0, 180.0])) {
        let (r, sc) = instance(seed, 2.5, theta);
        let Ok(g) = RouteGraph::build(&r, &sc) else { return Ok(()) };
        let trees = build_trees(&g, &sc.angle_cost, KernelChoice::Auto, sc.path_limit()).unwrap();
        let (Some(fwd), Some(bwd)) = (trees.forward_optimum(&g), trees.backward_optimum(&g)) else { return Ok(()) };
        let s_min = trees.s_map(&g).min().unwrap();
        prop_assert!((fwd - bwd).abs() <= 1e-9 * fwd.max(1.0));
        prop_assert!((fwd - s_min).abs() <= 1e-9 * fwd.max(1.0));
        prop_assert_eq!(trees.map_elements(), 4 * g.m());
        let (routes, _) = k_shortest(&trees, &g, 6).unwrap();
        prop_assert!(routes.windows(2).all(|w| w[0].s_value <= w[1].s_value));
    }

    #[test]
    fn diverse_sets_are_pairwise_far(seed in any::<u64>(), theta in 0.5f64..3.0) {
        let (r, sc) = instance(seed, 2.5, 60.0);
        let Ok(g) = RouteGraph::build(&r, &sc) else { return Ok(()) };
        let trees = build_trees(&g, &sc.angle_cost, KernelChoice::Auto, sc.path_limit()).unwrap();
        let (routes, _) = find_ksp_max(&trees, &g, 4, theta).unwrap();
        for i in 0..routes.len() {
            for j in 0..i {
                prop_assert!(yau_hausdorff(&routes[i].vertices, &routes[j].vertices).unwrap() > theta);
            }
        }
        prop_assert!(routes.windows(2).all(|w| w[0].s_value <= w[1].s_value));
    }

    #[test]
    fn dispersion_picks_distinct_candidates(seed in any::<u64>(), size in 1usize..12, k in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pool: Vec<Vec<CellCoord>> = (0..size)
            .map(|_| (0..rng.gen_range(1..6)).map(|_| CellCoord::new(rng.gen_range(0..20), rng.gen_range(0..20))).collect())
            .collect();
        if k > size {
            prop_assert!(k_dispersion(&pool, k, DiversityMetric::YauHausdorff).is_err());
            return Ok(());
        }
        let picked = k_dispersion(&pool, k, DiversityMetric::YauHausdorff).unwrap();
        prop_assert_eq!(picked.len(), k);
        prop_assert_eq!(picked.iter().collect::<HashSet<_>>().len(), picked.len());
        prop_assert!(picked.iter().all(|&i| i < size));
    }

    #[test]
    fn downsampling_blocks_only_fully_forbidden_cells(seed in any::<u64>(), factor in 1usize..4) {
        let r = raster(seed, 12, 12, 0.6);
        let c = downsample(&r, factor).unwrap();
        for by in 0..c.rows() {
            for bx in 0..c.cols() {
                let members: Vec<CellCoord> = (by * factor..(by + 1) * factor)
                    .flat_map(|y| (bx * factor..(bx + 1) * factor).map(move |x| CellCoord::new(x, y)))
                    .collect();
                let open: Vec<f64> = members.iter().filter(|&&m| !r.pylon_forbidden(m)).map(|&m| r.pylon(m)).collect();
                let cell = CellCoord::new(bx, by);
                prop_assert_eq!(c.pylon_forbidden(cell), open.is_empty());
                if !open.is_empty() {
                    let mean = open.iter().sum::<f64>() / open.len() as f64;
                    prop_assert!((c.pylon(cell) - mean).abs() <= 1e-9);
                }
            }
        }
    }
}

fn offset_angle_f((x, y): (f64, f64)) -> f64 {
    y.atan2(x).to_degrees().rem_euclid(360.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn multiscale_stages_fit_the_budget(seed in 0u64..1000, budget in 4000usize..40000) {
        let r = pylon_core::synth::smooth_raster(48, 48, seed);
        let sc = Scenario::new(
            GraphParams { d_min: 2.0, d_max: 4.0, theta_alpha_deg: 60.0, w_c: 1.0 },
            CellCoord::new(2, 3),
            CellCoord::new(45, 44),
            AngleCostFunction::Convex { a: 3.0, q: 2.0 },
        );
        match run_multiscale(&r, &sc, &MultiScalePlan::new(vec![3, 2, 1], budget)) {
            Ok(res) => {
                prop_assert!(res.stages.iter().all(|s| s.m <= budget));
                prop_assert!(res.corridor_widths().iter().all(|&w| w >= 4.0));
                prop_assert_eq!(res.path.vertices.first(), Some(&sc.source));
                prop_assert_eq!(res.path.vertices.last(), Some(&sc.target));
            }
            Err(e) => prop_assert!(matches!(e, pylon_core::Error::BudgetExceeded { .. }), "{e}"),
        }
    }
}
