use cantor_qc_web::{disks_json, grid_json, lp_curve_json};
use serde_json::Value;

#[test]
fn disks_have_both_sides() {
    let v: Value = serde_json::from_str(&disks_json(1.0, 2.0, 7, 2).unwrap()).unwrap();
    assert_eq!(v["disks"]["source"].as_array().unwrap().len(), 49);
    assert_eq!(v["disks"]["image"].as_array().unwrap().len(), 49);
    assert_eq!(v["params"]["m"], 7);
}

#[test]
fn identity_grid_is_unchanged() {
    let v: Value = serde_json::from_str(&grid_json(1.0, 1.0, 7, 3, 5, 20).unwrap()).unwrap();
    let first = &v["polylines"][0];
    assert_eq!(first[0][0].as_f64().unwrap(), -1.1);
    assert_eq!(first[0][1].as_f64().unwrap(), -1.1);
    assert_eq!(v["polylines"].as_array().unwrap().len(), 6);
}

#[test]
fn curve_crosses_one_above_the_critical_exponent() {
    let v: Value = serde_json::from_str(&lp_curve_json(0.8, 2.0, 100, 1.0, 3.0, 21).unwrap()).unwrap();
    assert_eq!(v["critical"].as_f64().unwrap(), 2.0);
    let pts = v["points"].as_array().unwrap();
    assert!(pts[0]["converges"].as_bool().unwrap());
    assert!(!pts[20]["converges"].as_bool().unwrap());
}

#[test]
fn invalid_parameters_are_reported() {
    assert!(disks_json(2.5, 2.0, 7, 1).is_err());
    assert!(disks_json(1.0, 2.0, 100, 4).is_err());
}
