//! Residuals of the full 3D equations and asymptotics near singular rays.

use crate::extrapolate::{diverging, estimate_limit, ladder, lstsq, LimitEstimate};
use crate::field::{AxisymmetricField, FieldError, SphereField};
use crate::geometry::{distance_to_ray, gradient_tensor_axisym, spatial_derivatives, SphericalPoint};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no usable grid points ({excluded} excluded)")]
    EmptyGrid { excluded: usize },
    #[error("sequence for {what} does not converge")]
    Inconclusive { what: &'static str },
    #[error("eta is only defined when tau is 2 (got {0})")]
    TauNotTwo(f64),
    #[error("pole must be a nonzero vector")]
    BadPole,
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    pub theta_margin: f64,
    pub radii: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_theta: 20, n_phi: 12, theta_margin: 0.3, radii: vec![1.0] }
    }
}

impl GridSpec {
    /// `(theta, phi)` nodes inside `(theta_min + margin, theta_max - margin)`.
    pub fn angles(&self, theta_min: f64, theta_max: f64) -> Vec<(f64, f64)> {
        let lo = self.theta_margin.max(theta_min + self.theta_margin);
        let hi = (PI - self.theta_margin).min(theta_max - self.theta_margin);
        let mut out = Vec::with_capacity(self.n_theta * self.n_phi);
        for i in 0..self.n_theta {
            let t = if self.n_theta == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (self.n_theta - 1) as f64 };
            for j in 0..self.n_phi {
                out.push((t, TAU * j as f64 / self.n_phi as f64));
            }
        }
        out
    }

    pub fn size(&self) -> usize {
        self.n_theta * self.n_phi * self.radii.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    NavierStokes,
    Euler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub max_momentum: f64,
    pub rms_momentum: f64,
    pub max_divergence: f64,
    pub n_points: usize,
    pub excluded: usize,
}

impl ResidualReport {
    pub fn passes(&self, tol_momentum: f64, tol_divergence: f64) -> bool {
        self.max_momentum < tol_momentum && self.max_divergence < tol_divergence
    }
}

/// Relative finite-difference step: `h = FD_STEP * min(r, distance to the nearest singular ray)`.
pub const FD_STEP: f64 = 6e-3;

/// Momentum and divergence residuals on a grid, with angular range `theta_range`.
pub fn residual(
    field: &dyn SphereField,
    grid: &GridSpec,
    theta_range: (f64, f64),
    mode: ResidualMode,
) -> Result<ResidualReport, AnalysisError> {
    residual_at(field, &grid.angles(theta_range.0, theta_range.1), &grid.radii, mode)
}

/// Residuals at explicit `(theta, phi)` nodes, each scaled to every radius in `radii`.
pub fn residual_at(
    field: &dyn SphereField,
    angles: &[(f64, f64)],
    radii: &[f64],
    mode: ResidualMode,
) -> Result<ResidualReport, AnalysisError> {
    let sing = field.singular_points();
    let mut max_m = 0.0f64;
    let mut sum2 = 0.0;
    let mut max_d = 0.0f64;
    let mut n = 0;
    let mut excluded = 0;
    for &r in radii {
        for &(t, p) in angles {
            let x = SphericalPoint::unit(t, p).map_err(FieldError::from)?.to_cartesian() * r;
            let d = sing.iter().map(|s| distance_to_ray(&x, s)).fold(r, f64::min);
            let h = FD_STEP * d;
            let res = spatial_derivatives(|y: &Vector3<f64>| field.cartesian(y), &x, h);
            match res {
                Ok(s) => {
                    let m = match mode {
                        ResidualMode::NavierStokes => s.navier_stokes().norm(),
                        ResidualMode::Euler => s.euler().norm(),
                    };
                    if !m.is_finite() {
                        excluded += 1;
                        continue;
                    }
                    max_m = max_m.max(m);
                    sum2 += m * m;
                    max_d = max_d.max(s.divergence().abs());
                    n += 1;
                }
                Err(_) => excluded += 1,
            }
        }
    }
    if n == 0 {
        return Err(AnalysisError::EmptyGrid { excluded });
    }
    Ok(ResidualReport { max_momentum: max_m, rms_momentum: (sum2 / n as f64).sqrt(), max_divergence: max_d, n_points: n, excluded })
}

pub fn ns_residual(field: &dyn SphereField, grid: &GridSpec, theta_range: (f64, f64)) -> Result<ResidualReport, AnalysisError> {
    residual(field, grid, theta_range, ResidualMode::NavierStokes)
}

pub fn euler_residual(field: &dyn SphereField, grid: &GridSpec, theta_range: (f64, f64)) -> Result<ResidualReport, AnalysisError> {
    residual(field, grid, theta_range, ResidualMode::Euler)
}

/// Approach to a pole: point at axis distance `d` on azimuth `psi`, with the
/// unit vector toward the pole and the azimuthal unit vector `x × P / |x × P|`.
#[derive(Clone, Copy, Debug)]
struct Approach {
    pole: Vector3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
}

impl Approach {
    fn new(pole: &Vector3<f64>) -> Result<Self, AnalysisError> {
        let n = pole.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(AnalysisError::BadPole);
        }
        let p = pole / n;
        let a = if p.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let e1 = a.cross(&p).normalize();
        Ok(Approach { pole: p, e1, e2: p.cross(&e1) })
    }

    fn point(&self, d: f64, psi: f64) -> Vector3<f64> {
        let c = (1.0 - d * d).sqrt();
        self.pole * c + (self.e1 * psi.cos() + self.e2 * psi.sin()) * d
    }

    fn toward(&self, x: &Vector3<f64>) -> Vector3<f64> {
        (self.pole - x * self.pole.dot(x)).normalize()
    }

    fn around(&self, x: &Vector3<f64>) -> Vector3<f64> {
        x.cross(&self.pole).normalize()
    }
}

/// Axis distances used for extrapolation.
pub fn extraction_ladder() -> Vec<f64> {
    ladder(1e-2, 1e-5, 5)
}

const AZIMUTHS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extracted {
    pub value: f64,
    /// Largest disagreement between azimuths.
    pub azimuth_spread: f64,
    /// Disagreement between successive extrapolants.
    pub extrapolation_spread: f64,
}

fn extract(
    field: &dyn SphereField,
    pole: &Vector3<f64>,
    what: &'static str,
    g: impl Fn(&Approach, &Vector3<f64>, Vector3<f64>, f64, f64) -> f64,
) -> Result<Extracted, AnalysisError> {
    let ap = Approach::new(pole)?;
    let ds = extraction_ladder();
    let mut ests: Vec<LimitEstimate> = vec![];
    for k in 0..AZIMUTHS {
        let psi = TAU * k as f64 / AZIMUTHS as f64 + 0.3;
        let mut gs = vec![];
        for &d in &ds {
            let x = ap.point(d, psi);
            let (u, p) = field.cartesian(&x)?;
            gs.push(g(&ap, &x, u, p, d));
        }
        if gs.iter().any(|v| !v.is_finite()) || diverging(&gs) {
            return Err(AnalysisError::Inconclusive { what });
        }
        let e = estimate_limit(&ds, &gs);
        if !e.value.is_finite() {
            return Err(AnalysisError::Inconclusive { what });
        }
        ests.push(e);
    }
    let mean = ests.iter().map(|e| e.value).sum::<f64>() / ests.len() as f64;
    let azimuth_spread = ests.iter().map(|e| (e.value - mean).abs()).fold(0.0, f64::max);
    let extrapolation_spread = ests.iter().map(|e| e.spread).fold(0.0, f64::max);
    Ok(Extracted { value: mean, azimuth_spread, extrapolation_spread })
}

/// `lim |x'| u . t`, with `t` the tangent pointing toward the pole.
pub fn extract_tau(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<Extracted, AnalysisError> {
    extract(field, pole, "tau", |ap, x, u, _, d| d * u.dot(&ap.toward(x)))
}

/// `lim |x'| u . (x × P)/|x × P|`; at the south pole this is `lim |x'| u_phi`.
pub fn extract_sigma(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<Extracted, AnalysisError> {
    extract(field, pole, "sigma", |ap, x, u, _, d| d * u.dot(&ap.around(x)))
}

/// `lim |x'|^2 |ln |x'||^2 u_r`.
pub fn extract_radial_saturation(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<Extracted, AnalysisError> {
    extract(field, pole, "radial saturation", |_, x, u, _, d| d * d * d.ln().powi(2) * u.dot(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaEstimate {
    pub value: f64,
    pub snapped: Option<f64>,
}

/// `lim (|x'| u . t - 2) ln |x'|`, defined when the tau limit is 2.
pub fn extract_eta(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<EtaEstimate, AnalysisError> {
    let tau = extract_tau(field, pole)?;
    if (tau.value - 2.0).abs() > 0.05 {
        return Err(AnalysisError::TauNotTwo(tau.value));
    }
    let e = extract(field, pole, "eta", |ap, x, u, _, d| (d * u.dot(&ap.toward(x)) - 2.0) * d.ln())?;
    let snapped = [0.0, 2.0].into_iter().find(|s| (e.value - s).abs() <= 0.1);
    Ok(EtaEstimate { value: e.value, snapped })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogSlope {
    pub kappa: f64,
    pub intercept: f64,
    /// RMS of the fit relative to the largest sample.
    pub relative_rms: f64,
    pub nonlinear: bool,
}

/// Fit `|u| = kappa |ln d| + c + b d` over the ladder at 8 azimuths.
pub fn extract_log_slope(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<LogSlope, AnalysisError> {
    let ap = Approach::new(pole)?;
    let mut rows = vec![];
    let mut ys = vec![];
    for k in 0..8 {
        let psi = TAU * k as f64 / 8.0 + 0.3;
        for d in extraction_ladder() {
            let (u, _) = field.cartesian(&ap.point(d, psi))?;
            rows.push(vec![d.ln().abs(), 1.0, d]);
            ys.push(u.norm());
        }
    }
    let c = lstsq(&rows, &ys);
    let big = ys.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let rms = (rows.iter().zip(&ys).map(|(r, y)| (r[0] * c[0] + c[1] + r[2] * c[2] - y).powi(2)).sum::<f64>()
        / ys.len() as f64)
        .sqrt();
    Ok(LogSlope { kappa: c[0], intercept: c[1], relative_rms: rms / big, nonlinear: rms / big > 0.05 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityType {
    Type1,
    Type2,
    Type3,
    Removable,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradientType {
    #[serde(rename = "Type1'")]
    Type1,
    #[serde(rename = "Type2'")]
    Type2,
    #[serde(rename = "Type3'")]
    Type3,
    Ambiguous,
}

impl SingularityType {
    /// Whether a gradient label corresponds to this type.
    pub fn matches(self, g: GradientType) -> bool {
        matches!(
            (self, g),
            (SingularityType::Type1 | SingularityType::Removable, GradientType::Type1)
                | (SingularityType::Type2, GradientType::Type2)
                | (SingularityType::Type3, GradientType::Type3)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub tau: f64,
    pub kappa: f64,
    pub gradient: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { tau: 1e-2, kappa: 1e-2, gradient: 1e-2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub pole: [f64; 3],
    pub tau_hat: f64,
    pub eta_hat: Option<f64>,
    pub kappa_hat: f64,
    pub sigma_hat: f64,
    #[serde(rename = "type")]
    pub kind: SingularityType,
    pub confidence: f64,
}

/// Decision: tau or sigma away from zero gives Type 3, a logarithmic slope gives
/// Type 2, otherwise the point is removable (Type 1 when `globally_smooth`).
pub fn classify(
    field: &dyn SphereField,
    pole: &Vector3<f64>,
    th: &Thresholds,
    globally_smooth: bool,
) -> Result<SingularityReport, AnalysisError> {
    let p = pole.normalize();
    let inconclusive = |tau: f64, sigma: f64, kappa: f64| SingularityReport {
        pole: [p.x, p.y, p.z],
        tau_hat: tau,
        eta_hat: None,
        kappa_hat: kappa,
        sigma_hat: sigma,
        kind: SingularityType::Inconclusive,
        confidence: 0.0,
    };
    let (tau, sigma) = match (extract_tau(field, pole), extract_sigma(field, pole)) {
        (Ok(t), Ok(s)) => (t, s),
        (Err(AnalysisError::Inconclusive { .. }), _) | (_, Err(AnalysisError::Inconclusive { .. })) => {
            return Ok(inconclusive(f64::NAN, f64::NAN, f64::NAN))
        }
        (Err(e), _) | (_, Err(e)) => return Err(e),
    };
    let kappa = extract_log_slope(field, pole)?;
    let eta = if (tau.value - 2.0).abs() <= 0.05 { extract_eta(field, pole).ok().map(|e| e.value) } else { None };
    let kind = if tau.value.abs() > th.tau || sigma.value.abs() > th.tau {
        SingularityType::Type3
    } else if kappa.kappa > th.kappa {
        SingularityType::Type2
    } else if globally_smooth {
        SingularityType::Type1
    } else {
        SingularityType::Removable
    };
    let noise = tau.azimuth_spread.max(tau.extrapolation_spread).max(sigma.azimuth_spread).max(sigma.extrapolation_spread);
    Ok(SingularityReport {
        pole: [p.x, p.y, p.z],
        tau_hat: tau.value,
        eta_hat: eta,
        kappa_hat: kappa.kappa,
        sigma_hat: sigma.value,
        kind,
        confidence: (1.0 - noise / th.tau).clamp(0.0, 1.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    /// `lim |x'| |grad u|`
    pub first: f64,
    /// `lim |x'|^2 |grad u|`
    pub second: f64,
    #[serde(rename = "type")]
    pub kind: GradientType,
}

/// Scaling of `|grad u|` along the axis approach, from analytic theta-derivatives.
pub fn gradient_classify(
    field: &dyn AxisymmetricField,
    pole: &Vector3<f64>,
    th: &Thresholds,
) -> Result<GradientReport, AnalysisError> {
    let ap = Approach::new(pole)?;
    let ds = extraction_ladder();
    let mut g1 = vec![];
    let mut g2 = vec![];
    for &d in &ds {
        let x = ap.point(d, 0.3);
        let sp = SphericalPoint::from_cartesian(&x).map_err(FieldError::from)?;
        let j = field.theta_jets(sp.theta())?;
        let u = [j[0].value(), j[1].value(), j[2].value()];
        let du = [j[0].derivative(1), j[1].derivative(1), j[2].derivative(1)];
        let g = gradient_tensor_axisym(u, du, sp.theta(), 1.0).norm();
        g1.push(d * g);
        g2.push(d * d * g);
    }
    let lim = |gs: &[f64]| -> Option<f64> {
        if gs.iter().any(|v| !v.is_finite()) || diverging(gs) {
            None
        } else {
            Some(estimate_limit(&ds, gs).value)
        }
    };
    if g2.iter().any(|v| !v.is_finite()) {
        return Ok(GradientReport { first: f64::NAN, second: f64::NAN, kind: GradientType::Ambiguous });
    }
    // limsup |x'|^2 |grad u| = infinity still counts as Type 3'
    let s = lim(&g2).unwrap_or(f64::INFINITY);
    let first = lim(&g1);
    let kind = if s.abs() > th.gradient {
        GradientType::Type3
    } else {
        match first {
            Some(f) if f.abs() > th.gradient => GradientType::Type2,
            Some(_) => GradientType::Type1,
            None => GradientType::Ambiguous,
        }
    };
    Ok(GradientReport { first: first.unwrap_or(f64::NAN), second: s, kind })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck {
    /// `|u| |x'|^2 |ln |x'||^2` along the ladder, maximized over azimuths.
    pub envelope: Vec<f64>,
    pub k_fit: f64,
    pub passes: bool,
}

/// Envelope `|u| <= K / (|x'| ln |x'|)^2` on `|x'|` in `[1e-5, 1e-2]`: the scaled
/// magnitude must not grow toward the pole by more than a factor 2.
pub fn growth_check(field: &dyn SphereField, pole: &Vector3<f64>) -> Result<GrowthCheck, AnalysisError> {
    let ap = Approach::new(pole)?;
    let ds = ladder(1e-2, 1e-5, 7);
    let mut env = vec![0.0f64; ds.len()];
    for k in 0..8 {
        let psi = TAU * k as f64 / 8.0 + 0.3;
        for (i, &d) in ds.iter().enumerate() {
            let (u, _) = field.cartesian(&ap.point(d, psi))?;
            env[i] = env[i].max(u.norm() * (d * d.ln()).powi(2));
        }
    }
    let k_fit = env.iter().cloned().fold(0.0, f64::max);
    let outer = env[0].max(1e-300);
    let passes = env.iter().all(|v| v.is_finite()) && env[env.len() - 1] <= 2.0 * outer.max(1e-12 * k_fit.max(1.0));
    Ok(GrowthCheck { envelope: env, k_fit, passes })
}
