use crate::anglebf::{AngleCostFunction, KernelChoice};
use crate::error::{Error, Result};
use crate::graph::{CellCoord, GraphParams};
use crate::raster::ResistanceRaster;

/// A routing problem over a given raster.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: GraphParams,
    pub source: CellCoord,
    pub target: CellCoord,
    pub angle_cost: AngleCostFunction,
    /// Upper bound on the number of spans; `None` uses [`Scenario::default_path_limit`].
    pub path_limit: Option<usize>,
    pub kernel: KernelChoice,
}

impl Scenario {
    pub fn new(params: GraphParams, source: CellCoord, target: CellCoord, angle_cost: AngleCostFunction) -> Self {
        Self {
            params,
            source,
            target,
            angle_cost,
            path_limit: None,
            kernel: KernelChoice::Auto,
        }
    }

    pub fn with_kernel(mut self, kernel: KernelChoice) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_path_limit(mut self, p: usize) -> Self {
        self.path_limit = Some(p);
        self
    }

    /// `ceil(2 * |s - t| / d_min)`, at least 1.
    pub fn default_path_limit(&self) -> usize {
        let d = self.source.dist(self.target);
        ((2.0 * d / self.params.d_min).ceil() as usize).max(1)
    }

    pub fn path_limit(&self) -> usize {
        self.path_limit.unwrap_or_else(|| self.default_path_limit())
    }

    pub fn validate(&self, raster: &ResistanceRaster) -> Result<()> {
        self.params.validate()?;
        self.angle_cost.validate()?;
        if self.path_limit == Some(0) {
            return Err(Error::InvalidParameter {
                field: "p",
                reason: "path limit must be at least 1".into(),
            });
        }
        for (which, c) in [("source", self.source), ("target", self.target)] {
            if c.x >= raster.cols() || c.y >= raster.rows() {
                return Err(Error::OutOfBounds {
                    which,
                    x: c.x,
                    y: c.y,
                    rows: raster.rows(),
                    cols: raster.cols(),
                });
            }
        }
        if self.source == self.target {
            return Err(Error::SourceIsTarget);
        }
        if raster.pylon_forbidden(self.source) {
            return Err(Error::Forbidden { which: "source" });
        }
        if raster.pylon_forbidden(self.target) {
            return Err(Error::Forbidden { which: "target" });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(s: (usize, usize), t: (usize, usize)) -> Scenario {
        Scenario::new(
            GraphParams {
                d_min: 2.0,
                d_max: 4.0,
                theta_alpha_deg: 60.0,
                w_c: 1.0,
            },
            s.into(),
            t.into(),
            AngleCostFunction::zero(),
        )
    }

    #[test]
    fn validation() {
        let mut r = ResistanceRaster::uniform(5, 5, 1.0, 1.0);
        assert!(sc((0, 0), (4, 4)).validate(&r).is_ok());
        assert_eq!(sc((1, 1), (1, 1)).validate(&r), Err(Error::SourceIsTarget));
        assert!(matches!(sc((0, 0), (5, 4)).validate(&r), Err(Error::OutOfBounds { .. })));
        r.forbid_pylon(CellCoord::new(4, 4));
        let e = sc((0, 0), (4, 4)).validate(&r).unwrap_err();
        assert_eq!(e.to_string(), "target forbidden");
    }

    #[test]
    fn default_limit() {
        let s = sc((0, 0), (3, 4));
        assert_eq!(s.default_path_limit(), 5);
        assert_eq!(s.clone().with_path_limit(9).path_limit(), 9);
    }
}
