//! JSON scenario documents and their conversion into engine inputs.
//!
//! ```json
//! {
//!   "layers": [{"grid_path": "forest.asc", "name": "forest", "pylon_weight": 4, "cable_weight": 1},
//!              {"grid_path": "town.asc", "name": "town", "pylon_weight": "inf", "cable_weight": "inf"}],
//!   "w_c": 1.0, "d_min_m": 200, "d_max_m": 400, "theta_alpha_deg": 60,
//!   "angle_cost": {"kind": "convex", "a": 5, "q": 2},
//!   "source": [2, 30], "target": [77, 30],
//!   "scales": [2, 1], "edge_budget": 400000,
//!   "ksp": {"k": 3, "metric": "yau_hausdorff", "theta": 4, "method": "find_ksp_max"}
//! }
//! ```
//!
//! Grid paths are relative to the scenario file. Span lengths are in meters
//! and are converted with the grids' `cellsize`.

use std::collections::BTreeMap;
use std::path::Path as FsPath;

use pylon_core::multiscale::MultiScalePlan;
use pylon_core::raster::ascii::parse_grid;
use pylon_core::raster::build_resistance;
use pylon_core::{
    AngleCostFunction, CellCoord, DiversityMethod, DiversityMetric, DiversitySpec, GraphParams, KernelChoice, Layer,
    LayerWeight, ResistanceRaster, Scenario, Weight,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub layers: Vec<LayerSpec>,
    pub w_c: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub theta_alpha_deg: f64,
    pub angle_cost: AngleCostSpec,
    pub source: [usize; 2],
    pub target: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ksp: Option<KspSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    pub grid_path: String,
    pub name: String,
    pub pylon_weight: WeightValue,
    pub cable_weight: WeightValue,
}

/// A layer weight: a nonnegative number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue(pub Weight);

impl Serialize for WeightValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Weight::Finite(v) => s.serialize_f64(v),
            Weight::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for WeightValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Self(Weight::Finite(v))),
            Raw::Str(s) if s == "inf" => Ok(Self(Weight::Infinite)),
            Raw::Str(s) => Err(serde::de::Error::custom(format!("weight must be a number or \"inf\", got \"{s}\""))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AngleCostSpec {
    Step { breakpoints: Vec<f64>, costs: Vec<f64> },
    /// `a * (x / 180)^q`, square root by default.
    Concave {
        a: f64,
        #[serde(default = "half")]
        q: f64,
    },
    /// `a * (x / 180)^q`, quadratic by default.
    Convex {
        a: f64,
        #[serde(default = "two")]
        q: f64,
    },
}

fn half() -> f64 {
    0.5
}

fn two() -> f64 {
    2.0
}

impl AngleCostSpec {
    pub fn to_function(&self) -> AngleCostFunction {
        match self.clone() {
            Self::Step { breakpoints, costs } => AngleCostFunction::Step { breakpoints, costs },
            Self::Concave { a, q } => AngleCostFunction::Concave { a, q },
            Self::Convex { a, q } => AngleCostFunction::Convex { a, q },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KspSpec {
    pub k: usize,
    pub metric: String,
    pub theta: f64,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<f64>,
}

impl KspSpec {
    pub fn to_spec(&self) -> CliResult<DiversitySpec> {
        let metric = DiversityMetric::parse(&self.metric)
            .ok_or_else(|| CliError::invalid("ksp.metric", format!("unknown metric `{}`", self.metric)))?;
        let method = DiversityMethod::parse(&self.method)
            .ok_or_else(|| CliError::invalid("ksp.method", format!("unknown method `{}`", self.method)))?;
        let spec = DiversitySpec { k: self.k, metric, theta: self.theta, method, penalty: self.penalty };
        spec.validate()?;
        Ok(spec)
    }
}

/// Per-request parameter changes applied on top of a scenario.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Layer weights by layer name.
    #[serde(default)]
    pub weights: Option<BTreeMap<String, WeightOverride>>,
    #[serde(default)]
    pub w_c: Option<f64>,
    #[serde(default)]
    pub angle_cost: Option<AngleCostSpec>,
    /// Cone half-angle in degrees.
    #[serde(default)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightOverride {
    #[serde(default)]
    pub pylon_weight: Option<WeightValue>,
    #[serde(default)]
    pub cable_weight: Option<WeightValue>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> CliResult<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Copy with `o` applied.
    pub fn with_overrides(&self, o: &Overrides) -> CliResult<Self> {
        let mut f = self.clone();
        if let Some(ws) = &o.weights {
            for (name, w) in ws {
                let layer = f
                    .layers
                    .iter_mut()
                    .find(|l| &l.name == name)
                    .ok_or_else(|| CliError::invalid(format!("overrides.weights.{name}"), "no layer with this name"))?;
                if let Some(p) = w.pylon_weight {
                    layer.pylon_weight = p;
                }
                if let Some(c) = w.cable_weight {
                    layer.cable_weight = c;
                }
            }
        }
        if let Some(w_c) = o.w_c {
            f.w_c = w_c;
        }
        if let Some(a) = &o.angle_cost {
            f.angle_cost = a.clone();
        }
        if let Some(t) = o.theta {
            f.theta_alpha_deg = t;
        }
        Ok(f)
    }

    pub fn multiscale_plan(&self) -> CliResult<Option<MultiScalePlan>> {
        let Some(scales) = &self.scales else {
            return Ok(None);
        };
        let plan = MultiScalePlan::new(scales.clone(), self.edge_budget.unwrap_or(usize::MAX));
        plan.validate()?;
        Ok(Some(plan))
    }
}

/// Parsed layer grids, in scenario order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrids {
    pub layers: Vec<Layer>,
    pub cell_size: f64,
}

impl LayerGrids {
    /// Reads each layer's grid through `fetch`, which maps a grid path to its
    /// text or `None` when missing.
    pub fn load(file: &ScenarioFile, mut fetch: impl FnMut(&str) -> CliResult<Option<String>>) -> CliResult<Self> {
        if file.layers.is_empty() {
            return Err(CliError::invalid("layers", "at least one layer is required"));
        }
        let mut layers = Vec::with_capacity(file.layers.len());
        let mut cell_size: Option<f64> = None;
        for (i, spec) in file.layers.iter().enumerate() {
            let text = fetch(&spec.grid_path)?.ok_or_else(|| CliError::GridNotFound {
                field: format!("layers[{i}].grid_path"),
                path: spec.grid_path.clone(),
            })?;
            let grid = parse_grid(&spec.name, &text).map_err(|e| CliError::invalid(format!("layers[{i}].grid_path"), e.to_string()))?;
            match cell_size {
                None => cell_size = Some(grid.cell_size),
                Some(c) if c != grid.cell_size => {
                    return Err(CliError::invalid(
                        format!("layers[{i}].grid_path"),
                        format!("cellsize {} differs from {}", grid.cell_size, c),
                    ))
                }
                _ => {}
            }
            layers.push(grid.layer);
        }
        let cell_size = cell_size.expect("at least one layer");
        if !(cell_size.is_finite() && cell_size > 0.0) {
            return Err(CliError::invalid("layers", format!("cellsize must be positive, got {cell_size}")));
        }
        Ok(Self { layers, cell_size })
    }

    /// Reads grids from disk relative to `base`.
    pub fn load_from_dir(file: &ScenarioFile, base: &FsPath) -> CliResult<Self> {
        Self::load(file, |p| {
            let path = base.join(p);
            match std::fs::read_to_string(&path) {
                Ok(t) => Ok(Some(t)),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(source) => Err(CliError::Read { path, source }),
            }
        })
    }
}

/// A scenario ready for the engine.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub file: ScenarioFile,
    pub raster: ResistanceRaster,
    pub scenario: Scenario,
}

impl LoadedScenario {
    pub fn new(file: ScenarioFile, grids: &LayerGrids) -> CliResult<Self> {
        if file.layers.len() != grids.layers.len() {
            return Err(CliError::invalid("layers", "layer count differs from the loaded grids"));
        }
        let weights: Vec<LayerWeight> =
            file.layers.iter().map(|l| LayerWeight::new(l.pylon_weight.0, l.cable_weight.0)).collect();
        let raster = build_resistance(&grids.layers, &weights, grids.cell_size)?;
        let params = GraphParams {
            d_min: file.d_min_m / grids.cell_size,
            d_max: file.d_max_m / grids.cell_size,
            theta_alpha_deg: file.theta_alpha_deg,
            w_c: file.w_c,
        };
        let mut scenario = Scenario::new(
            params,
            CellCoord::new(file.source[0], file.source[1]),
            CellCoord::new(file.target[0], file.target[1]),
            file.angle_cost.to_function(),
        );
        scenario.path_limit = file.p;
        scenario.validate(&raster)?;
        Ok(Self { file, raster, scenario })
    }

    /// Reads a scenario file and its grids from disk.
    pub fn from_path(path: &FsPath) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        let file = ScenarioFile::parse(&text)?;
        let base = path.parent().unwrap_or(FsPath::new("."));
        let grids = LayerGrids::load_from_dir(&file, base)?;
        Self::new(file, &grids)
    }

    pub fn with_kernel(mut self, kernel: KernelChoice) -> CliResult<Self> {
        kernel.check(&self.scenario.angle_cost)?;
        self.scenario.kernel = kernel;
        Ok(self)
    }
}
