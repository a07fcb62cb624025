#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use pylon_core::raster::ascii::write_grid;
use pylon_core::Layer;
use serde_json::{json, Value};

pub const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/demo/scenario.json");

/// Writes `layers` as grids next to a scenario document built from `scenario`
/// (whose `layers` entries get their `grid_path` filled in).
pub fn write_scenario(dir: &Path, layers: &[Layer], mut scenario: Value) -> PathBuf {
    for (i, l) in layers.iter().enumerate() {
        let name = format!("{}.asc", l.name());
        std::fs::write(dir.join(&name), write_grid(l, 10.0)).unwrap();
        scenario["layers"][i]["grid_path"] = json!(name);
        scenario["layers"][i]["name"] = json!(l.name());
    }
    let p = dir.join("scenario.json");
    std::fs::write(&p, serde_json::to_string_pretty(&scenario).unwrap()).unwrap();
    p
}

/// 20x20 open raster with one unit-weight base layer and an optional
/// prohibited block.
pub fn uniform_scenario(dir: &Path, blocked: Option<(usize, usize, usize, usize)>, target: [usize; 2]) -> PathBuf {
    let base = Layer::from_fn("base", 20, 20, |_, _| true);
    let block = Layer::from_fn("block", 20, 20, |x, y| {
        blocked.is_some_and(|(x0, y0, x1, y1)| (x0..=x1).contains(&x) && (y0..=y1).contains(&y))
    });
    let doc = json!({
        "layers": [
            {"pylon_weight": 1, "cable_weight": 1},
            {"pylon_weight": "inf", "cable_weight": "inf"}
        ],
        "w_c": 1.0, "d_min_m": 20, "d_max_m": 40, "theta_alpha_deg": 60,
        "angle_cost": {"kind": "convex", "a": 2},
        "source": [0, 10], "target": target,
        "scales": [2, 1],
        "ksp": {"k": 3, "metric": "yau_hausdorff", "theta": 2, "method": "find_ksp_max"}
    });
    write_scenario(dir, &[base, block], doc)
}

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn pylon(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_pylon")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn json_of(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap()
}

/// Vertex sequences of the route features.
pub fn routes(doc: &Value) -> Vec<Value> {
    doc["features"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|f| f["geometry"]["type"] == "LineString")
        .map(|f| f["geometry"]["coordinates"].clone())
        .collect()
}
