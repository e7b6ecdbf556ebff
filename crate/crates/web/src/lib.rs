//! Browser bindings: each export takes plain values or JSON text and returns JSON text.

use homsing::families::{Solution, SolutionSpec};
use homsing::field::SphereField;
use homsing::liouville::{LiouvilleField, LiouvilleInput};
use homsing::reduced_ode::{estimate_gamma_bounds_with, integrate_noswirl};
use serde_json::{json, Value};
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

const MARGIN: f64 = 0.05;

fn grid(n_theta: usize, n_phi: usize) -> (Vec<f64>, Vec<f64>) {
    let th = (0..n_theta).map(|i| MARGIN + (PI - 2.0 * MARGIN) * (i as f64 + 0.5) / n_theta as f64).collect();
    let ph = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
    (th, ph)
}

fn speed_grid(field: &dyn SphereField, th: &[f64], ph: &[f64]) -> Vec<Vec<Value>> {
    th.iter()
        .map(|&t| {
            ph.iter()
                .map(|&p| match field.sample(t, p) {
                    Ok(s) if s.is_finite() => json!(s.velocity_norm()),
                    _ => Value::Null,
                })
                .collect()
        })
        .collect()
}

fn check_grid(n_theta: usize, n_phi: usize) -> Result<(), String> {
    if n_theta == 0 || n_phi == 0 || n_theta * n_phi > 40_000 {
        return Err("grid must be nonempty and at most 40000 nodes".into());
    }
    Ok(())
}

/// `|u|` of a catalog member on a `(theta, phi)` grid; `null` outside the domain.
pub fn family_heatmap_json(spec: &str, n_theta: usize, n_phi: usize) -> Result<String, String> {
    check_grid(n_theta, n_phi)?;
    let spec: SolutionSpec = serde_json::from_str(spec).map_err(|e| e.to_string())?;
    let sol = Solution::new(spec).map_err(|e| e.to_string())?;
    let (th, ph) = grid(n_theta, n_phi);
    let speed = speed_grid(&sol, &th, &ph);
    let d = sol.domain();
    Ok(json!({
        "theta": th,
        "phi": ph,
        "speed": speed,
        "domain": { "theta_min": d.theta_min, "theta_max": d.theta_max },
    })
    .to_string())
}

/// No-swirl profile `U_theta(y)` started at `gamma`, with the estimated admissible interval.
pub fn noswirl_profile_json(c1: f64, c2: f64, c3: f64, gamma: f64, n: usize) -> Result<String, String> {
    if !(2..=2000).contains(&n) {
        return Err("n must lie in 2..=2000".into());
    }
    let c = (c1, c2, c3);
    let bounds = estimate_gamma_bounds_with(c, 1e-2).map_err(|e| e.to_string())?;
    let (ys, us): (Vec<f64>, Vec<f64>) = match integrate_noswirl(c, gamma, (-0.999, 0.999)) {
        Ok(traj) => traj.sample(-0.999, 0.999, n).into_iter().map(|s| (s.y, s.u_theta)).unzip(),
        Err(_) => (vec![], vec![]),
    };
    Ok(json!({
        "y": ys,
        "u_theta": us,
        "gamma_minus": bounds.gamma_minus_hat,
        "gamma_plus": bounds.gamma_plus_hat,
        "admissible": gamma >= bounds.gamma_minus_hat && gamma <= bounds.gamma_plus_hat,
    })
    .to_string())
}

/// `|u|` of a Liouville construction on a grid, plus the fitted slopes at each singular point.
pub fn liouville_field_json(input: &str, n_theta: usize, n_phi: usize) -> Result<String, String> {
    check_grid(n_theta, n_phi)?;
    let input: LiouvilleInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
    let field = LiouvilleField::from_input(&input).map_err(|e| e.to_string())?;
    let (th, ph) = grid(n_theta, n_phi);
    let speed = speed_grid(&field, &th, &ph);
    let fits: Vec<Value> = field
        .verify_asymptotics()
        .into_iter()
        .map(|r| match r {
            Ok(f) => json!({ "point": f.point, "expected": f.expected, "slope": f.slope }),
            Err(e) => json!({ "error": e.to_string() }),
        })
        .collect();
    Ok(json!({ "theta": th, "phi": ph, "speed": speed, "fits": fits }).to_string())
}

#[wasm_bindgen]
pub fn family_heatmap(spec: &str, n_theta: usize, n_phi: usize) -> Result<String, JsError> {
    family_heatmap_json(spec, n_theta, n_phi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn noswirl_profile(c1: f64, c2: f64, c3: f64, gamma: f64, n: usize) -> Result<String, JsError> {
    noswirl_profile_json(c1, c2, c3, gamma, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn liouville_field(input: &str, n_theta: usize, n_phi: usize) -> Result<String, JsError> {
    liouville_field_json(input, n_theta, n_phi).map_err(|e| JsError::new(&e))
}
