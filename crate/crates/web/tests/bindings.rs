use homsing_web::{family_heatmap_json, liouville_field_json, noswirl_profile_json};
use serde_json::Value;

fn parse(s: String) -> Value {
    serde_json::from_str(&s).unwrap()
}

#[test]
fn heatmap_shape_and_values() {
    let v = parse(family_heatmap_json(r#"{"family":"landau","params":{"sigma":0.5}}"#, 9, 4).unwrap());
    let speed = v["speed"].as_array().unwrap();
    assert_eq!(speed.len(), 9);
    assert!(speed.iter().all(|row| row.as_array().unwrap().len() == 4));
    // theta = pi/2 sits in the middle row; u = (-2/9, 2/3, 0) there
    let mid = speed[4][0].as_f64().unwrap();
    assert!((mid - (4.0f64 / 81.0 + 4.0 / 9.0).sqrt()).abs() < 1e-12);
}

#[test]
fn heatmap_marks_domain_gaps() {
    let v = parse(family_heatmap_json(r#"{"family":"type_two_log","params":{"alpha":0}}"#, 20, 1).unwrap());
    assert!(v["speed"].as_array().unwrap().iter().any(|r| r[0].is_null()));
}

#[test]
fn heatmap_rejects_bad_input() {
    assert!(family_heatmap_json("{", 4, 4).is_err());
    assert!(family_heatmap_json(r#"{"family":"landau","params":{"sigma":0.5}}"#, 0, 4).is_err());
}

#[test]
fn profile_matches_closed_form() {
    // c = 0, gamma = 1: U_theta = 2 (1 - y^2) / (2 + y)
    let v = parse(noswirl_profile_json(0.0, 0.0, 0.0, 1.0, 11).unwrap());
    assert!((v["gamma_minus"].as_f64().unwrap() + 2.0).abs() < 0.05);
    assert!((v["gamma_plus"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert_eq!(v["admissible"], true);
    let ys = v["y"].as_array().unwrap();
    let us = v["u_theta"].as_array().unwrap();
    assert_eq!(ys.len(), 11);
    for (y, u) in ys.iter().zip(us) {
        let (y, u) = (y.as_f64().unwrap(), u.as_f64().unwrap());
        assert!((u - 2.0 * (1.0 - y * y) / (2.0 + y)).abs() < 1e-8);
    }
    assert!(noswirl_profile_json(0.0, 0.0, -5.0, 0.0, 11).is_err());
}

#[test]
fn liouville_slopes_reported() {
    let v = parse(liouville_field_json(r#"{"points":[[0,0,-1],[0,0,1]],"exponents":[2,-2]}"#, 8, 8).unwrap());
    let fits = v["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 2);
    for f in fits {
        assert!((f["slope"].as_f64().unwrap() - 2.0).abs() < 0.06);
    }
    assert!(liouville_field_json(r#"{"f":"power","params":{"a":[1,0],"alpha":2}}"#, 8, 8).is_ok());
    assert!(liouville_field_json(r#"{"points":[[0,0,1]],"exponents":[2]}"#, 8, 8).is_err());
}
