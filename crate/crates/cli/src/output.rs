//! Route reports and their GeoJSON rendering.
//!
//! Every output document is a FeatureCollection in cell coordinates with one
//! `LineString` per route, one `Point` per pylon and the run report as the
//! `report` member.

use pylon_core::multiscale::ScaleStage;
use pylon_core::{OpCounters, Path};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Largest tolerated gap between a route total and the sum of its parts.
pub const DECOMPOSITION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathReport {
    pub total_cost: f64,
    pub pylon_cost: f64,
    pub cable_cost: f64,
    pub angle_cost: f64,
    pub pylon_count: usize,
    pub max_angle_deg: f64,
}

impl PathReport {
    pub fn new(p: &Path) -> Self {
        Self {
            total_cost: p.cost,
            pylon_cost: p.pylon,
            cable_cost: p.cable,
            angle_cost: p.angle,
            pylon_count: p.pylon_count(),
            max_angle_deg: p.max_angle,
        }
    }

    pub fn decomposition_gap(&self) -> f64 {
        (self.total_cost - (self.pylon_cost + self.cable_cost + self.angle_cost)).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct OpsReport {
    pub comparisons: u64,
    pub evaluations: u64,
    pub tree_ops: u64,
    pub fallbacks: u64,
}

impl From<OpCounters> for OpsReport {
    fn from(c: OpCounters) -> Self {
        Self { comparisons: c.comparisons, evaluations: c.evaluations, tree_ops: c.tree_ops, fallbacks: c.fallbacks }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub scale: usize,
    pub rows: usize,
    pub cols: usize,
    pub corridor_width: Option<f64>,
    pub predicted_edges: usize,
    pub n: usize,
    pub m: usize,
    pub map_elements: usize,
    pub cost: f64,
}

impl From<&ScaleStage> for StageReport {
    fn from(s: &ScaleStage) -> Self {
        Self {
            scale: s.scale,
            rows: s.rows,
            cols: s.cols,
            corridor_width: s.corridor_width,
            predicted_edges: s.predicted_edges,
            n: s.n,
            m: s.m,
            map_elements: s.map_elements,
            cost: s.cost,
        }
    }
}

/// Per-route figures plus solver statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteReport {
    pub command: String,
    pub kernel: String,
    pub paths: Vec<PathReport>,
    pub n: usize,
    pub m: usize,
    pub map_elements: usize,
    pub ops: OpsReport,
    /// Left out unless timing was requested, so outputs stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stages: Option<Vec<StageReport>>,
}

impl RouteReport {
    pub fn check(&self) -> CliResult<()> {
        for (i, p) in self.paths.iter().enumerate() {
            let gap = p.decomposition_gap();
            if !(gap <= DECOMPOSITION_TOLERANCE) {
                return Err(CliError::Internal(format!("route {i} cost does not decompose (gap {gap})")));
            }
        }
        Ok(())
    }
}

/// A FeatureCollection for `paths`, which must match `report.paths`.
pub fn feature_collection(paths: &[Path], report: &RouteReport) -> CliResult<Value> {
    report.check()?;
    let mut features = Vec::new();
    for (i, (p, r)) in paths.iter().zip(&report.paths).enumerate() {
        let coords: Vec<[usize; 2]> = p.vertices.iter().map(|c| [c.x, c.y]).collect();
        let mut props = serde_json::to_value(r)?;
        props["kind"] = json!("route");
        props["path_index"] = json!(i);
        features.push(json!({
            "type": "Feature",
            "geometry": {"type": "LineString", "coordinates": coords},
            "properties": props,
        }));
    }
    for (i, p) in paths.iter().enumerate() {
        for (j, c) in p.vertices.iter().enumerate() {
            features.push(json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [c.x, c.y]},
                "properties": {"kind": "pylon", "path_index": i, "pylon_index": j},
            }));
        }
    }
    Ok(json!({
        "type": "FeatureCollection",
        "features": features,
        "report": serde_json::to_value(report)?,
    }))
}

/// Canonical text form: pretty JSON with a trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use pylon_core::{AngleCostFunction, CellCoord, ResistanceRaster};

    fn sample() -> (Vec<Path>, RouteReport) {
        let r = ResistanceRaster::uniform(3, 5, 1.0, 2.0);
        let f = AngleCostFunction::Convex { a: 4.0, q: 2.0 };
        let p = Path::evaluate(&r, 1.0, &f, vec![CellCoord::new(0, 0), CellCoord::new(2, 0), CellCoord::new(4, 2)]).unwrap();
        let report = RouteReport {
            command: "route".into(),
            kernel: "auto".into(),
            paths: vec![PathReport::new(&p)],
            n: 15,
            m: 40,
            map_elements: 80,
            ops: OpCounters::default().into(),
            wall_time_ms: None,
            warning: None,
            stages: None,
        };
        (vec![p], report)
    }

    #[test]
    fn collection_layout() {
        let (paths, report) = sample();
        let doc = feature_collection(&paths, &report).unwrap();
        let features = doc["features"].as_array().unwrap();
        assert_eq!(features.len(), 4);
        assert_eq!(features[0]["geometry"]["type"], "LineString");
        assert_eq!(features[0]["geometry"]["coordinates"], json!([[0, 0], [2, 0], [4, 2]]));
        assert_eq!(features[0]["properties"]["pylon_count"], 3);
        assert_eq!(features[3]["properties"]["pylon_index"], 2);
        assert!(doc["report"].get("wall_time_ms").is_none());
        assert!(render(&doc).ends_with("}\n"));
    }

    #[test]
    fn broken_decomposition_is_internal() {
        let (paths, mut report) = sample();
        report.paths[0].total_cost += 1.0;
        let e = feature_collection(&paths, &report).unwrap_err();
        assert_eq!(e.exit_code(), 4);
    }
}
