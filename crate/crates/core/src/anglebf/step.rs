//! Step-function update: candidate distances `D_i + theta_s` are visited in
//! increasing order and each claims the still-unassigned outgoing angles
//! inside its angular band, which are then deleted from the tree.

use std::cmp::Ordering;

use super::avl::AvlTree;
use super::cost::{step_level, AngleCostFunction};
use super::local::{turning_angle, Assignment, OpCounters, VertexLocalProblem};
use crate::error::{Error, Result};

/// Slack on band limits; candidates are re-checked exactly afterwards.
const BAND_EPS: f64 = 1e-7;

/// Appends the keys in the circular arc `[lo, hi]` (degrees, `hi >= lo`).
pub(crate) fn query_arc(tree: &AvlTree<f64, u32>, lo: f64, hi: f64, out: &mut Vec<f64>, counters: &mut OpCounters) {
    if hi - lo >= 360.0 {
        counters.tree_ops += 1;
        tree.get_inbetween(f64::NEG_INFINITY, f64::INFINITY, out);
        return;
    }
    let shift = (lo / 360.0).floor() * 360.0;
    let (lo, hi) = (lo - shift, hi - shift);
    if hi < 360.0 {
        counters.tree_ops += 1;
        tree.get_inbetween(lo, hi, out);
    } else {
        counters.tree_ops += 2;
        tree.get_inbetween(lo, 360.0, out);
        tree.get_inbetween(0.0, hi - 360.0, out);
    }
}

/// Buckets outgoing edges by angle in a tree keyed by angle.
pub(crate) fn bucket_tree(out_angle: &[f64], counters: &mut OpCounters) -> (AvlTree<f64, u32>, Vec<Vec<u32>>) {
    let mut tree = AvlTree::with_capacity(out_angle.len());
    let mut buckets: Vec<Vec<u32>> = Vec::new();
    for (j, &b) in out_angle.iter().enumerate() {
        counters.tree_ops += 1;
        match tree.get(&b) {
            Some(&id) => buckets[id as usize].push(j as u32),
            None => {
                counters.tree_ops += 1;
                tree.insert(b, buckets.len() as u32);
                buckets.push(vec![j as u32]);
            }
        }
    }
    (tree, buckets)
}

/// Incoming indices sorted by `(distance, index)`, counting comparisons.
pub(crate) fn sorted_by_distance(dist: &[f64], counters: &mut OpCounters) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dist.len()).collect();
    let mut cmp = 0u64;
    order.sort_by(|&a, &b| {
        cmp += 1;
        dist[a].total_cmp(&dist[b]).then(a.cmp(&b))
    });
    counters.comparisons += cmp;
    order
}

fn bit_length(n: usize) -> u64 {
    (usize::BITS - n.leading_zeros()) as u64
}

pub fn step_update(
    problem: &VertexLocalProblem,
    f: &AngleCostFunction,
    counters: &mut OpCounters,
) -> Result<Vec<Assignment>> {
    let AngleCostFunction::Step { breakpoints, costs } = f else {
        return Err(Error::InvalidParameter {
            field: "kernel",
            reason: format!("step update needs a step angle cost, got {}", f.kind()),
        });
    };
    let (k, l) = (problem.k(), problem.l());
    let mut out = vec![Assignment::NONE; l];
    if k == 0 || l == 0 {
        return Ok(out);
    }
    let levels = costs.len();
    let (mut tree, buckets) = bucket_tree(&problem.out_angle, counters);
    let order = sorted_by_distance(&problem.in_dist, counters);

    // The k*|S| tuples are the merge of |S| runs that share the order above.
    let mut cursor = vec![0usize; levels];
    let mut cand = Vec::new();
    let level_cost = bit_length(breakpoints.len());
    while !tree.is_empty() {
        let mut pick: Option<(f64, usize, usize)> = None;
        for (s, &c) in cursor.iter().enumerate() {
            if c == k {
                continue;
            }
            let i = order[c];
            let v = problem.in_dist[i] + costs[s];
            let better = match pick {
                None => true,
                Some((bv, bi, _)) => {
                    counters.comparisons += 1;
                    match v.total_cmp(&bv) {
                        Ordering::Less => true,
                        Ordering::Equal => i < bi,
                        Ordering::Greater => false,
                    }
                }
            };
            if better {
                pick = Some((v, i, s));
            }
        }
        let Some((value, i, s)) = pick else { break };
        if !value.is_finite() {
            break;
        }
        cursor[s] += 1;

        let lo = if s == 0 { 0.0 } else { breakpoints[s - 1] };
        let hi = if s + 1 == levels { 180.0 } else { breakpoints[s] };
        let a = problem.in_angle[i];
        cand.clear();
        if lo == 0.0 {
            query_arc(&tree, a - hi - BAND_EPS, a + hi + BAND_EPS, &mut cand, counters);
        } else if hi == 180.0 {
            query_arc(&tree, a + lo - BAND_EPS, a + 360.0 - lo + BAND_EPS, &mut cand, counters);
        } else {
            query_arc(&tree, a + lo - BAND_EPS, a + hi + BAND_EPS, &mut cand, counters);
            query_arc(&tree, a - hi - BAND_EPS, a - lo + BAND_EPS, &mut cand, counters);
        }
        for &b in &cand {
            counters.comparisons += level_cost;
            if step_level(breakpoints, turning_angle(a, b)) != s {
                continue;
            }
            counters.tree_ops += 1;
            if let Some(id) = tree.remove(&b) {
                for &j in &buckets[id as usize] {
                    out[j as usize] = Assignment { dist: value, pred: Some(i) };
                }
            }
        }
    }
    counters.comparisons += tree.comparisons();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::local::naive_update;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dists(a: &[Assignment]) -> Vec<f64> {
        a.iter().map(|x| x.dist).collect()
    }

    #[test]
    fn single_level_goes_to_global_minimum() {
        let f = AngleCostFunction::Step { breakpoints: vec![], costs: vec![4.0] };
        let p = VertexLocalProblem::new(vec![7.0, 1.0, 3.0], vec![0.0, 120.0, 240.0], vec![5.0, 100.0, 359.0]);
        let out = step_update(&p, &f, &mut OpCounters::default()).unwrap();
        assert!(out.iter().all(|a| a.pred == Some(1) && a.dist == 5.0));
    }

    #[test]
    fn hand_built_two_levels() {
        let f = AngleCostFunction::Step { breakpoints: vec![45.0], costs: vec![0.0, 10.0] };
        let p = VertexLocalProblem::new(vec![2.0, 5.0], vec![0.0, 90.0], vec![30.0, 80.0, 200.0]);
        let s = step_update(&p, &f, &mut OpCounters::default()).unwrap();
        let n = naive_update(&p, &f, &mut OpCounters::default());
        assert_eq!(dists(&s), vec![2.0, 5.0, 12.0]);
        assert_eq!(s, n);
    }

    #[test]
    fn wraparound_band() {
        let f = AngleCostFunction::Step { breakpoints: vec![20.0], costs: vec![0.0, 50.0] };
        let p = VertexLocalProblem::new(vec![1.0, 2.0], vec![350.0, 180.0], vec![5.0, 345.0, 175.0]);
        let s = step_update(&p, &f, &mut OpCounters::default()).unwrap();
        assert_eq!(s, naive_update(&p, &f, &mut OpCounters::default()));
        assert_eq!(s[0].pred, Some(0));
    }

    #[test]
    fn duplicate_out_angles_share_a_bucket() {
        let f = AngleCostFunction::Step { breakpoints: vec![90.0], costs: vec![0.0, 3.0] };
        let p = VertexLocalProblem::new(vec![1.0, 0.5], vec![0.0, 180.0], vec![10.0, 10.0, 190.0]);
        let s = step_update(&p, &f, &mut OpCounters::default()).unwrap();
        assert_eq!(s, naive_update(&p, &f, &mut OpCounters::default()));
    }

    #[test]
    fn random_against_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let k = rng.gen_range(0..30);
            let l = rng.gen_range(0..30);
            let levels = rng.gen_range(1..=4);
            let mut bp: Vec<f64> = (0..levels - 1).map(|_| rng.gen_range(1..180) as f64).collect();
            bp.sort_by(f64::total_cmp);
            bp.dedup();
            let mut costs: Vec<f64> = (0..=bp.len()).map(|_| rng.gen_range(0..30) as f64).collect();
            costs.sort_by(f64::total_cmp);
            let f = AngleCostFunction::Step { breakpoints: bp, costs };
            // coarse angle grid forces exact band-edge hits and duplicates
            let ang = |r: &mut ChaCha8Rng| r.gen_range(0..72) as f64 * 5.0;
            let p = VertexLocalProblem::new(
                (0..k).map(|_| rng.gen_range(0..40) as f64).collect(),
                (0..k).map(|_| ang(&mut rng)).collect(),
                (0..l).map(|_| ang(&mut rng)).collect(),
            );
            let s = step_update(&p, &f, &mut OpCounters::default()).unwrap();
            let n = naive_update(&p, &f, &mut OpCounters::default());
            assert_eq!(dists(&s), dists(&n), "{p:?} {f:?}");
        }
    }

    #[test]
    fn rejects_other_families() {
        let p = VertexLocalProblem::new(vec![1.0], vec![0.0], vec![0.0]);
        assert!(step_update(&p, &AngleCostFunction::Convex { a: 1.0, q: 2.0 }, &mut OpCounters::default()).is_err());
    }
}
