mod common;

use common::*;
use serde_json::json;

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn uniform_route_is_straight() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), None, [19, 10]);
    let r = pylon(&["route", "--scenario", s(&sc), "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r.stdout);
    let route = &routes(&doc)[0];
    assert!(route.as_array().unwrap().iter().all(|c| c[1] == 10));
    let rep = &doc["report"];
    assert_eq!(rep["map_elements"], json!(2 * rep["m"].as_u64().unwrap()));
    let p = &rep["paths"][0];
    let sum = p["pylon_cost"].as_f64().unwrap() + p["cable_cost"].as_f64().unwrap() + p["angle_cost"].as_f64().unwrap();
    assert!((p["total_cost"].as_f64().unwrap() - sum).abs() <= 1e-6);
    assert_eq!(p["max_angle_deg"], 0.0);
}

#[test]
fn forbidden_target_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), Some((17, 8, 19, 12)), [19, 10]);
    let r = pylon(&["route", "--scenario", s(&sc)]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("target forbidden"), "{}", r.stderr);
}

#[test]
fn walled_off_target_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), Some((8, 0, 13, 19)), [19, 10]);
    let r = pylon(&["route", "--scenario", s(&sc)]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert!(r.stderr.contains("unreachable") || r.stderr.contains("isolated"), "{}", r.stderr);
}

#[test]
fn bad_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(pylon(&["route", "--scenario", s(&missing)]).code, 2);
    std::fs::write(&missing, "{\"layers\": 3}").unwrap();
    assert_eq!(pylon(&["route", "--scenario", s(&missing)]).code, 2);
    let sc = uniform_scenario(dir.path(), None, [19, 10]);
    let r = pylon(&["route", "--scenario", s(&sc), "--kernel", "step"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn ksp_with_one_route_matches_route() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), Some((9, 6, 11, 14)), [19, 10]);
    let route = json_of(&pylon(&["route", "--scenario", s(&sc), "--quiet"]).stdout);
    let one = pylon(&["ksp", "--scenario", s(&sc), "--k", "1", "--quiet"]);
    assert_eq!(one.code, 0, "{}", one.stderr);
    let one = json_of(&one.stdout);
    assert_eq!(routes(&one), routes(&route));
    let three = json_of(&pylon(&["ksp", "--scenario", s(&sc), "--quiet"]).stdout);
    let rep = &three["report"];
    assert_eq!(rep["map_elements"], json!(4 * rep["m"].as_u64().unwrap()));
    let costs: Vec<f64> = rep["paths"].as_array().unwrap().iter().map(|p| p["total_cost"].as_f64().unwrap()).collect();
    assert_eq!(costs.len(), 3);
    assert!(costs.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn single_scale_multiscale_matches_route() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), Some((9, 6, 11, 14)), [19, 10]);
    let route = json_of(&pylon(&["route", "--scenario", s(&sc), "--quiet"]).stdout);
    let ms = pylon(&["multiscale", "--scenario", s(&sc), "--scales", "1", "--quiet"]);
    assert_eq!(ms.code, 0, "{}", ms.stderr);
    let ms = json_of(&ms.stdout);
    assert_eq!(routes(&ms), routes(&route));
    assert_eq!(ms["report"]["paths"], route["report"]["paths"]);
    let two = json_of(&pylon(&["multiscale", "--scenario", s(&sc), "--quiet"]).stdout);
    assert_eq!(two["report"]["stages"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_never_loses_to_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), None, [19, 12]);
    let r = pylon(&["bench", "--scenario", s(&sc), "--synthetic", "4", "--seed", "7", "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = String::from_utf8(r.stdout).unwrap();
    let (rows, ops) = text.split_once("\n\n").unwrap();
    let mut reader = csv::Reader::from_reader(rows.as_bytes());
    let mut n = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let ps: f64 = rec[1].parse().unwrap();
        let bl: f64 = rec[4].parse().unwrap();
        assert!(ps <= bl + 1e-6, "{rec:?}");
        n += 1;
    }
    assert_eq!(n, 5);
    assert!(ops.starts_with("kernel,optimum"));
    assert!(ops.contains("\nnaive,") && ops.contains("\nconvex,"));
}

#[test]
fn outputs_go_to_file_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), Some((9, 6, 11, 14)), [19, 10]);
    let a = dir.path().join("a.geojson");
    let b = dir.path().join("b.geojson");
    for out in [&a, &b] {
        assert_eq!(pylon(&["ksp", "--scenario", s(&sc), "--out", s(out), "--quiet"]).code, 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn timing_is_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let sc = uniform_scenario(dir.path(), None, [19, 10]);
    let r = json_of(&pylon(&["route", "--scenario", s(&sc), "--timing", "--quiet"]).stdout);
    assert!(r["report"]["wall_time_ms"].as_f64().is_some());
}

#[test]
fn demo_scenario_runs() {
    let r = pylon(&["route", "--scenario", DEMO, "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let r = pylon(&["bench", "--scenario", DEMO, "--quiet"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(String::from_utf8(r.stdout).unwrap().lines().nth(1).unwrap().ends_with("infeasible"));
}
