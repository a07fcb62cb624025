use std::ops::AddAssign;

use super::cost::AngleCostFunction;

/// Incoming distances and angles plus outgoing angles at one vertex.
/// Angles are directions of travel in `[0, 360)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VertexLocalProblem {
    pub in_dist: Vec<f64>,
    pub in_angle: Vec<f64>,
    pub out_angle: Vec<f64>,
}

impl VertexLocalProblem {
    pub fn new(in_dist: Vec<f64>, in_angle: Vec<f64>, out_angle: Vec<f64>) -> Self {
        assert_eq!(in_dist.len(), in_angle.len(), "one angle per incoming edge");
        Self {
            in_dist,
            in_angle,
            out_angle,
        }
    }

    pub fn k(&self) -> usize {
        self.in_dist.len()
    }

    pub fn l(&self) -> usize {
        self.out_angle.len()
    }
}

/// Best distance for one outgoing edge, excluding the edge's own cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Assignment {
    pub dist: f64,
    pub pred: Option<usize>,
}

impl Assignment {
    pub const NONE: Assignment = Assignment {
        dist: f64::INFINITY,
        pred: None,
    };
}

/// Instrumentation for the update kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounters {
    /// Elementary comparisons: key comparisons inside trees and sorts plus
    /// comparisons of candidate distances.
    pub comparisons: u64,
    /// Angle cost evaluations.
    pub evaluations: u64,
    /// Tree insertions, deletions and queries.
    pub tree_ops: u64,
    /// Convex updates that took the exhaustive path.
    pub fallbacks: u64,
}

impl AddAssign for OpCounters {
    fn add_assign(&mut self, o: Self) {
        self.comparisons += o.comparisons;
        self.evaluations += o.evaluations;
        self.tree_ops += o.tree_ops;
        self.fallbacks += o.fallbacks;
    }
}

/// Unsigned turn between two travel directions, in `[0, 180]`.
#[inline]
pub fn turning_angle(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(360.0 - d)
}

/// Reference kernel: every outgoing edge scans every incoming edge.
/// Ties go to the lowest incoming index.
pub fn naive_update(
    problem: &VertexLocalProblem,
    f: &AngleCostFunction,
    counters: &mut OpCounters,
) -> Vec<Assignment> {
    let k = problem.k();
    problem
        .out_angle
        .iter()
        .map(|&beta| {
            let mut best = Assignment::NONE;
            for i in 0..k {
                let v = problem.in_dist[i] + f.evaluate(turning_angle(problem.in_angle[i], beta));
                if v < best.dist {
                    best = Assignment { dist: v, pred: Some(i) };
                }
            }
            counters.comparisons += k as u64;
            counters.evaluations += k as u64;
            best
        })
        .collect()
}
