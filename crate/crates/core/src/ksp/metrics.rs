use crate::error::{Error, Result};
use crate::graph::CellCoord;

/// Path dissimilarity measure over pylon positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DiversityMetric {
    YauHausdorff,
    MeanEuclidean,
    Jaccard,
}

impl DiversityMetric {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "yau_hausdorff" | "hausdorff" | "d_y" => Some(Self::YauHausdorff),
            "mean_euclidean" | "mean" | "d_m" => Some(Self::MeanEuclidean),
            "jaccard" | "d_j" => Some(Self::Jaccard),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::YauHausdorff => "yau_hausdorff",
            Self::MeanEuclidean => "mean_euclidean",
            Self::Jaccard => "jaccard",
        }
    }

    pub fn distance(self, p: &[CellCoord], q: &[CellCoord]) -> Result<f64> {
        match self {
            Self::YauHausdorff => yau_hausdorff(p, q),
            Self::MeanEuclidean => mean_euclidean(p, q),
            Self::Jaccard => jaccard(p, q),
        }
    }
}

fn nearest(p: CellCoord, q: &[CellCoord]) -> f64 {
    q.iter().map(|&c| p.dist(c)).fold(f64::INFINITY, f64::min)
}

fn nonempty(p: &[CellCoord], q: &[CellCoord]) -> Result<()> {
    if p.is_empty() || q.is_empty() {
        Err(Error::EmptyPath)
    } else {
        Ok(())
    }
}

/// Larger of the two directed max-min distances.
pub fn yau_hausdorff(p: &[CellCoord], q: &[CellCoord]) -> Result<f64> {
    nonempty(p, q)?;
    let dir = |a: &[CellCoord], b: &[CellCoord]| a.iter().map(|&x| nearest(x, b)).fold(0.0, f64::max);
    Ok(dir(p, q).max(dir(q, p)))
}

/// Larger of the two directed mean-min distances.
pub fn mean_euclidean(p: &[CellCoord], q: &[CellCoord]) -> Result<f64> {
    nonempty(p, q)?;
    let dir = |a: &[CellCoord], b: &[CellCoord]| a.iter().map(|&x| nearest(x, b)).sum::<f64>() / a.len() as f64;
    Ok(dir(p, q).max(dir(q, p)))
}

/// One minus intersection over union of the vertex sets.
pub fn jaccard(p: &[CellCoord], q: &[CellCoord]) -> Result<f64> {
    if p.is_empty() && q.is_empty() {
        return Err(Error::EmptyPath);
    }
    let set = |v: &[CellCoord]| {
        let mut s = v.to_vec();
        s.sort_unstable();
        s.dedup();
        s
    };
    let (a, b) = (set(p), set(q));
    let inter = a.iter().filter(|c| b.binary_search(c).is_ok()).count();
    let union = a.len() + b.len() - inter;
    Ok(1.0 - inter as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(usize, usize)]) -> Vec<CellCoord> {
        v.iter().map(|&c| c.into()).collect()
    }

    #[test]
    fn examples() {
        let p = pts(&[(0, 0), (1, 2), (3, 3)]);
        assert_eq!(yau_hausdorff(&p, &p).unwrap(), 0.0);
        assert_eq!(yau_hausdorff(&pts(&[(0, 0)]), &pts(&[(3, 4)])).unwrap(), 5.0);
        assert_eq!(mean_euclidean(&p, &p).unwrap(), 0.0);
        assert_eq!(mean_euclidean(&pts(&[(0, 0), (0, 2)]), &pts(&[(0, 0)])).unwrap(), 1.0);
        assert_eq!(jaccard(&p, &p).unwrap(), 0.0);
        assert_eq!(jaccard(&pts(&[(0, 0)]), &pts(&[(1, 1)])).unwrap(), 1.0);
        let a = pts(&[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]);
        let b = pts(&[(0, 0), (1, 0), (5, 0), (6, 0), (7, 0)]);
        assert_eq!(jaccard(&a, &b).unwrap(), 0.75);
        assert_eq!(yau_hausdorff(&[], &a), Err(Error::EmptyPath));
        assert_eq!(jaccard(&[], &[]), Err(Error::EmptyPath));
    }

    #[test]
    fn parse_names() {
        for m in [DiversityMetric::YauHausdorff, DiversityMetric::MeanEuclidean, DiversityMetric::Jaccard] {
            assert_eq!(DiversityMetric::parse(m.name()), Some(m));
        }
        assert_eq!(DiversityMetric::parse("frechet"), None);
    }

    fn point_set() -> impl Strategy<Value = Vec<CellCoord>> {
        prop::collection::vec((0usize..30, 0usize..30), 1..20).prop_map(|v| pts(&v))
    }

    proptest! {
        #[test]
        fn hausdorff_matches_double_loop(p in point_set(), q in point_set()) {
            let mut best = 0.0f64;
            for a in &p {
                let mut m = f64::INFINITY;
                for b in &q {
                    m = m.min(a.dist(*b));
                }
                best = best.max(m);
            }
            for b in &q {
                let mut m = f64::INFINITY;
                for a in &p {
                    m = m.min(a.dist(*b));
                }
                best = best.max(m);
            }
            prop_assert_eq!(yau_hausdorff(&p, &q).unwrap(), best);
        }

        #[test]
        fn metrics_are_symmetric(p in point_set(), q in point_set()) {
            for m in [DiversityMetric::YauHausdorff, DiversityMetric::MeanEuclidean, DiversityMetric::Jaccard] {
                prop_assert_eq!(m.distance(&p, &q).unwrap(), m.distance(&q, &p).unwrap());
                prop_assert_eq!(m.distance(&p, &p).unwrap(), 0.0);
            }
            let j = jaccard(&p, &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&j));
        }

        #[test]
        fn hausdorff_triangle(p in point_set(), q in point_set(), r in point_set()) {
            let pq = yau_hausdorff(&p, &q).unwrap();
            let qr = yau_hausdorff(&q, &r).unwrap();
            let pr = yau_hausdorff(&p, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-9);
        }
    }
}
