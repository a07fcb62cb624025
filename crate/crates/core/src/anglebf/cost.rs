use crate::error::{Error, Result};

/// Turning-angle penalty over `[0, 180]` degrees.
#[derive(Debug, Clone, PartialEq)]
pub enum AngleCostFunction {
    /// `costs[s]` applies for `breakpoints[s-1] <= x < breakpoints[s]`
    /// (with implicit bounds 0 and 180); `costs.len() == breakpoints.len() + 1`.
    Step { breakpoints: Vec<f64>, costs: Vec<f64> },
    /// `a * (x / 180)^q` with `0 < q <= 1`.
    Concave { a: f64, q: f64 },
    /// `a * (x / 180)^q` with `q >= 1`.
    Convex { a: f64, q: f64 },
}

impl AngleCostFunction {
    /// The constant zero penalty.
    pub fn zero() -> Self {
        Self::Step {
            breakpoints: Vec::new(),
            costs: vec![0.0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter {
            field: "angle_cost",
            reason,
        });
        match self {
            Self::Step { breakpoints, costs } => {
                if costs.len() != breakpoints.len() + 1 {
                    return bad(format!(
                        "{} breakpoints need {} costs, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        costs.len()
                    ));
                }
                if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
                    return bad("step costs must be finite and nonnegative".into());
                }
                if breakpoints.iter().any(|g| !(*g > 0.0 && *g < 180.0)) {
                    return bad("breakpoints must lie strictly between 0 and 180".into());
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be strictly increasing".into());
                }
            }
            Self::Concave { a, q } => {
                if !(a.is_finite() && *a >= 0.0) || !(*q > 0.0 && *q <= 1.0) {
                    return bad(format!("concave needs a >= 0 and 0 < q <= 1, got a={a} q={q}"));
                }
            }
            Self::Convex { a, q } => {
                if !(a.is_finite() && *a >= 0.0) || !(q.is_finite() && *q >= 1.0) {
                    return bad(format!("convex needs a >= 0 and q >= 1, got a={a} q={q}"));
                }
            }
        }
        Ok(())
    }

    /// Penalty for a turn of `x` degrees, `x` in `[0, 180]`.
    #[inline]
    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            Self::Step { breakpoints, costs } => costs[step_level(breakpoints, x)],
            Self::Concave { a, q } | Self::Convex { a, q } => a * (x / 180.0).powf(*q),
        }
    }

    /// Number of distinct step levels, `None` for the parametric families.
    pub fn levels(&self) -> Option<usize> {
        match self {
            Self::Step { costs, .. } => Some(costs.len()),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Step { .. } => "step",
            Self::Concave { .. } => "concave",
            Self::Convex { .. } => "convex",
        }
    }
}

/// Index of the step level containing `x`.
#[inline]
pub(crate) fn step_level(breakpoints: &[f64], x: f64) -> usize {
    breakpoints.partition_point(|&g| g <= x)
}

/// Update kernel used at each vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KernelChoice {
    #[default]
    Auto,
    Naive,
    Step,
    Convex,
}

impl KernelChoice {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Some(Self::Auto),
            "naive" => Some(Self::Naive),
            "step" => Some(Self::Step),
            "convex" => Some(Self::Convex),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Auto => "auto",
            Self::Naive => "naive",
            Self::Step => "step",
            Self::Convex => "convex",
        }
    }

    /// Rejects kernels that cannot handle the given function class.
    pub fn check(self, f: &AngleCostFunction) -> Result<()> {
        let ok = match self {
            Self::Auto | Self::Naive => true,
            Self::Step => matches!(f, AngleCostFunction::Step { .. }),
            Self::Convex => matches!(f, AngleCostFunction::Convex { .. }),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                field: "kernel",
                reason: format!("kernel `{}` cannot handle a {} angle cost", self.name(), f.kind()),
            })
        }
    }

    /// Concrete kernel for a vertex with `k` incoming and `l` outgoing edges.
    pub fn resolve(self, f: &AngleCostFunction, k: usize, l: usize) -> KernelChoice {
        match self {
            Self::Auto => match f {
                AngleCostFunction::Step { costs, .. } if costs.len() * 4 < k.min(l) => Self::Step,
                AngleCostFunction::Convex { .. } => Self::Convex,
                _ => Self::Naive,
            },
            other => other,
        }
    }
}

impl std::fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}
