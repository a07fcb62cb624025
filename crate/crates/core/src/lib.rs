//! Pylon spotting for transmission lines over resistance rasters.
//!
//! A route is a sequence of pylon cells. Consecutive pylons must lie within a
//! span range of each other, and the route pays for pylon resistance, cable
//! resistance along each span and a penalty on every turn.

pub mod anglebf;
pub mod error;
pub mod graph;
pub mod ksp;
pub mod multiscale;
pub mod path;
pub mod raster;
pub mod scenario;
pub mod solve;
pub mod synth;

pub use anglebf::{AngleCostFunction, EdgeDistanceState, KernelChoice, OpCounters};
pub use error::{Error, Result};
pub use graph::{CellCoord, EdgeRef, GraphParams, RouteGraph};
pub use ksp::{DiversityMethod, DiversityMetric, DiversitySpec};
pub use multiscale::MultiScalePlan;
pub use path::Path;
pub use raster::{Layer, LayerWeight, ResistanceRaster, Weight};
pub use scenario::Scenario;
pub use solve::{solve_route, RouteSolution};
