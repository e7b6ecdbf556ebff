//! Reduced ODE for axisymmetric solutions in `y = cos(theta)`.
//!
//! With `U = u r sin(theta)` the stationary equations become
//!
//! ```text
//! (1-y^2) U_t' + 2y U_t + U_t^2/2 + T = b1 y^2 + b2 y + b3
//! (1-y^2) U_p'' + U_t U_p' = 0
//! T''' = 2 U_p U_p' / (1-y^2),   T = T' = T'' = 0 at the anchor y0
//! ```
//!
//! Without swirl the right side is `c1(1-y) + c2(1+y) + c3(1-y^2)`.

use crate::extrapolate::estimate_limit;
use crate::field::{FieldError, SphereField};
use crate::geometry::{north, south, FieldSample};
use crate::ode::{self, DenseSolution, OdeError, OdeOptions};
use crate::quad::{integrate as quad, QuadError, QuadOptions};
use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReducedError {
    #[error("y range [{0}, {1}] must lie inside (-1 + 1e-6, 1 - 1e-6) and contain the anchor")]
    InvalidRange(f64, f64),
    #[error("U_theta blew up near y = {y}")]
    BlowUp { y: f64 },
    #[error("anchor state must have T = T' = T'' = 0")]
    NonzeroAnchor,
    #[error("c = ({c1}, {c2}, {c3}) lies outside the admissible set J")]
    OutsideJ { c1: f64, c2: f64, c3: f64 },
    #[error("c1 and c2 must be at least -1")]
    BelowMinusOne,
    #[error("trajectory carries swirl; no pressure formula is available")]
    SwirlTrajectory,
    #[error("no admissible U_theta(0) found")]
    NoAdmissibleGamma,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

pub const ENDPOINT_MARGIN: f64 = 1e-6;
const BLOWUP: f64 = 1e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReducedConstants {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
}

impl ReducedConstants {
    /// From the no-swirl form `c1(1-y) + c2(1+y) + c3(1-y^2)`.
    pub fn from_c(c1: f64, c2: f64, c3: f64) -> Self {
        ReducedConstants { b1: -c3, b2: c2 - c1, b3: c1 + c2 + c3 }
    }

    pub fn to_c(&self) -> (f64, f64, f64) {
        let c3 = -self.b1;
        let c1 = 0.5 * (self.b3 - c3 - self.b2);
        let c2 = 0.5 * (self.b3 - c3 + self.b2);
        (c1, c2, c3)
    }

    pub fn poly(&self, y: f64) -> f64 {
        self.b1 * y * y + self.b2 * y + self.b3
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize)]
pub struct ReducedState {
    pub y: f64,
    pub u_theta: f64,
    pub u_phi: f64,
    pub u_phi_prime: f64,
    pub t: f64,
    pub t1: f64,
    pub t2: f64,
}

impl ReducedState {
    fn vector(&self) -> [f64; 6] {
        [self.u_theta, self.u_phi, self.u_phi_prime, self.t, self.t1, self.t2]
    }

    fn from_vector(y: f64, v: &[f64; 6]) -> Self {
        ReducedState { y, u_theta: v[0], u_phi: v[1], u_phi_prime: v[2], t: v[3], t1: v[4], t2: v[5] }
    }
}

fn rhs(k: &ReducedConstants, y: f64, s: &[f64; 6]) -> [f64; 6] {
    let q = 1.0 - y * y;
    let [ut, up, upp, t, t1, t2] = *s;
    [(k.poly(y) - t - 2.0 * y * ut - 0.5 * ut * ut) / q, upp, -ut * upp / q, t1, t2, 2.0 * up * upp / q]
}

/// Dense solution of the reduced system on `[y_min, y_max]`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub consts: ReducedConstants,
    pub y0: f64,
    pub y_min: f64,
    pub y_max: f64,
    fwd: Option<DenseSolution<6>>,
    bwd: Option<DenseSolution<6>>,
    has_swirl: bool,
}

impl Trajectory {
    fn piece(&self, y: f64) -> Option<&DenseSolution<6>> {
        if y >= self.y0 {
            self.fwd.as_ref().or(if y == self.y0 { self.bwd.as_ref() } else { None })
        } else {
            self.bwd.as_ref()
        }
    }

    pub fn state(&self, y: f64) -> Option<ReducedState> {
        if y < self.y_min - 1e-14 || y > self.y_max + 1e-14 {
            return None;
        }
        self.piece(y).and_then(|p| p.eval(y)).map(|(v, _)| ReducedState::from_vector(y, &v))
    }

    /// Derivative of the interpolant.
    pub fn derivative(&self, y: f64) -> Option<[f64; 6]> {
        self.piece(y).and_then(|p| p.eval(y)).map(|(_, d)| d)
    }

    /// `dU_theta/dy` from the equation itself.
    pub fn u_theta_prime(&self, y: f64) -> Option<f64> {
        let s = self.state(y)?;
        Some(rhs(&self.consts, y, &s.vector())[0])
    }

    /// Defect of the algebraic relation, using the interpolant derivative.
    pub fn invariant_defect(&self, y: f64) -> Option<f64> {
        let s = self.state(y)?;
        let d = self.derivative(y)?;
        Some(((1.0 - y * y) * d[0] + 2.0 * y * s.u_theta + 0.5 * s.u_theta * s.u_theta + s.t - self.consts.poly(y)).abs())
    }

    pub fn has_swirl(&self) -> bool {
        self.has_swirl
    }

    /// Rows `(y, U_theta, U_phi, U_phi')` at `n` evenly spaced points.
    pub fn sample(&self, y_lo: f64, y_hi: f64, n: usize) -> Vec<ReducedState> {
        (0..n)
            .filter_map(|i| {
                let y = if n == 1 { y_lo } else { (y_lo * (n - 1 - i) as f64 + y_hi * i as f64) / (n - 1) as f64 };
                self.state(y)
            })
            .collect()
    }

    pub fn to_csv(&self, y_lo: f64, y_hi: f64, n: usize) -> String {
        let mut out = String::from("y,U_theta,U_phi,U_phi_prime\n");
        for s in self.sample(y_lo, y_hi, n) {
            out.push_str(&format!("{:.16e},{:.16e},{:.16e},{:.16e}\n", s.y, s.u_theta, s.u_phi, s.u_phi_prime));
        }
        out
    }
}

fn run(
    init: &ReducedState,
    consts: ReducedConstants,
    end: f64,
    opts: OdeOptions,
    bound: f64,
) -> Result<Option<DenseSolution<6>>, ReducedError> {
    if end == init.y {
        return Ok(None);
    }
    let sol = ode::integrate(|y, s| rhs(&consts, y, s), init.y, init.vector(), end, opts, |_, s| s[0].abs() > bound)?;
    if sol.stopped {
        return Err(ReducedError::BlowUp { y: sol.t_end });
    }
    Ok(Some(sol))
}

fn check_range(y0: f64, range: (f64, f64)) -> Result<(), ReducedError> {
    let (a, b) = range;
    let lim = 1.0 - ENDPOINT_MARGIN;
    if !(a <= y0 && y0 <= b && a >= -lim && b <= lim) {
        return Err(ReducedError::InvalidRange(a, b));
    }
    Ok(())
}

fn trajectory_opts() -> OdeOptions {
    OdeOptions { rtol: 1e-12, atol: 1e-13, h0: 1e-3, max_steps: 2_000_000 }
}

pub fn integrate_reduced(
    init: ReducedState,
    consts: ReducedConstants,
    y_range: (f64, f64),
) -> Result<Trajectory, ReducedError> {
    check_range(init.y, y_range)?;
    if init.t != 0.0 || init.t1 != 0.0 || init.t2 != 0.0 {
        return Err(ReducedError::NonzeroAnchor);
    }
    let opts = trajectory_opts();
    Ok(Trajectory {
        consts,
        y0: init.y,
        y_min: y_range.0,
        y_max: y_range.1,
        fwd: run(&init, consts, y_range.1, opts, BLOWUP)?,
        bwd: run(&init, consts, y_range.0, opts, BLOWUP)?,
        has_swirl: init.u_phi != 0.0 || init.u_phi_prime != 0.0,
    })
}

/// No-swirl trajectory with `U_theta(0) = gamma`.
pub fn integrate_noswirl(c: (f64, f64, f64), gamma: f64, y_range: (f64, f64)) -> Result<Trajectory, ReducedError> {
    let init = ReducedState { y: 0.0, u_theta: gamma, ..Default::default() };
    integrate_reduced(init, ReducedConstants::from_c(c.0, c.1, c.2), y_range)
}

/// Lower boundary of `c3` for which `U_theta` solutions on `[-1, 1]` exist.
pub fn bar_c3(c1: f64, c2: f64) -> Result<f64, ReducedError> {
    if !(c1 >= -1.0 && c2 >= -1.0) {
        return Err(ReducedError::BelowMinusOne);
    }
    let s = (1.0 + c1).sqrt() + (1.0 + c2).sqrt();
    Ok(-0.5 * s * (s + 2.0))
}

pub fn in_j(c1: f64, c2: f64, c3: f64) -> bool {
    bar_c3(c1, c2).map(|b| c3 >= b).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionProbe {
    pub c: (f64, f64, f64),
    pub gamma_minus_hat: f64,
    pub gamma_plus_hat: f64,
    pub bracket_width: f64,
}

const PROBE_EDGE: f64 = 1e-5;
const PROBE_BOUND: f64 = 50.0;

/// Bounded on `(-1 + 1e-5, 1 - 1e-5)` with converging endpoint limits.
pub fn gamma_admissible(c: (f64, f64, f64), gamma: f64) -> bool {
    let consts = ReducedConstants::from_c(c.0, c.1, c.2);
    let init = ReducedState { y: 0.0, u_theta: gamma, ..Default::default() };
    let opts = OdeOptions { rtol: 1e-10, atol: 1e-12, h0: 1e-3, max_steps: 200_000 };
    for end in [1.0 - PROBE_EDGE, -1.0 + PROBE_EDGE] {
        let sol = match ode::integrate(|y, s| rhs(&consts, y, s), 0.0, init.vector(), end, opts, |_, s| {
            s[0].abs() > PROBE_BOUND
        }) {
            Ok(s) if !s.stopped => s,
            _ => return false,
        };
        let ds: Vec<f64> = (0..5).map(|k| 1e-3 * 0.5f64.powi(k)).collect();
        let gs: Vec<f64> = ds
            .iter()
            .map(|d| sol.eval(end.signum() * (1.0 - d)).map(|(v, _)| v[0]).unwrap_or(f64::NAN))
            .collect();
        if gs.iter().any(|g| !g.is_finite()) {
            return false;
        }
        let lim = estimate_limit(&ds, &gs);
        if !lim.value.is_finite() || lim.value.abs() > PROBE_BOUND || lim.spread > 1e-2 * (1.0 + lim.value.abs()) {
            return false;
        }
    }
    true
}

/// Bracket the admissible interval of `U_theta(0)` for given `c`.
pub fn estimate_gamma_bounds(c: (f64, f64, f64)) -> Result<RegionProbe, ReducedError> {
    estimate_gamma_bounds_with(c, 1e-3)
}

pub fn estimate_gamma_bounds_with(c: (f64, f64, f64), width: f64) -> Result<RegionProbe, ReducedError> {
    let b = bar_c3(c.0, c.1)?;
    if c.2 < b {
        return Err(ReducedError::OutsideJ { c1: c.0, c2: c.1, c3: c.2 });
    }
    let mut seeds = vec![0.0];
    for k in 0..12 {
        let g = 0.25 * 1.6f64.powi(k);
        seeds.push(g);
        seeds.push(-g);
    }
    let start = seeds.into_iter().find(|&g| gamma_admissible(c, g)).ok_or(ReducedError::NoAdmissibleGamma)?;
    let edge = |dir: f64| -> f64 {
        let mut inside = start;
        let mut step = 0.25;
        let mut outside = None;
        for _ in 0..40 {
            let g = inside + dir * step;
            if gamma_admissible(c, g) {
                inside = g;
                step *= 2.0;
            } else {
                outside = Some(g);
                break;
            }
        }
        let Some(mut out) = outside else { return inside };
        while (out - inside).abs() > 0.5 * width {
            let mid = 0.5 * (inside + out);
            if gamma_admissible(c, mid) {
                inside = mid;
            } else {
                out = mid;
            }
        }
        0.5 * (inside + out)
    };
    let lo = edge(-1.0);
    let hi = edge(1.0);
    Ok(RegionProbe { c, gamma_minus_hat: lo, gamma_plus_hat: hi, bracket_width: 0.5 * width })
}

/// Axisymmetric field rebuilt from a no-swirl trajectory.
#[derive(Clone, Debug)]
pub struct NoSwirlField {
    traj: Trajectory,
    c3: f64,
}

pub fn reconstruct_noswirl_field(traj: Trajectory, c3: f64) -> Result<NoSwirlField, ReducedError> {
    if traj.has_swirl {
        return Err(ReducedError::SwirlTrajectory);
    }
    Ok(NoSwirlField { traj, c3 })
}

impl SphereField for NoSwirlField {
    fn sample(&self, theta: f64, phi: f64) -> Result<FieldSample, FieldError> {
        let y = theta.cos();
        let st = theta.sin();
        let s = self.traj.state(y).ok_or(FieldError::Domain { theta, phi })?;
        let u_r = self.traj.u_theta_prime(y).ok_or(FieldError::Domain { theta, phi })?;
        let u_theta = s.u_theta / st;
        Ok(FieldSample { u_r, u_theta, u_phi: 0.0, p: u_r - 0.5 * u_theta * u_theta + self.c3 })
    }

    fn singular_points(&self) -> Vec<Vector3<f64>> {
        vec![north(), south()]
    }
}

/// Access to a (possibly synthetic) swirling profile for [`pressure_integral_check`].
pub trait ReducedProfile {
    fn constants(&self) -> ReducedConstants;
    fn anchor(&self) -> f64;
    fn u_theta(&self, y: f64) -> f64;
    fn u_theta_prime(&self, y: f64) -> f64;
    fn u_phi(&self, y: f64) -> f64;
}

impl ReducedProfile for Trajectory {
    fn constants(&self) -> ReducedConstants {
        self.consts
    }
    fn anchor(&self) -> f64 {
        self.y0
    }
    fn u_theta(&self, y: f64) -> f64 {
        self.state(y).map(|s| s.u_theta).unwrap_or(f64::NAN)
    }
    fn u_theta_prime(&self, y: f64) -> f64 {
        self.derivative(y).map(|d| d[0]).unwrap_or(f64::NAN)
    }
    fn u_phi(&self, y: f64) -> f64 {
        self.state(y).map(|s| s.u_phi).unwrap_or(f64::NAN)
    }
}

/// Maximum defect of the integrated radial balance
///
/// ```text
/// (1-y^2) u_r = -2y U_t - U_t^2/2 + int_{y0}^{y} U_p(s)^2 (s-y)(1-sy)/(1-s^2)^2 ds + b1' y^2 + b2' y + b3'
/// ```
///
/// where `r u_r = dU_t/dy` and the primed constants absorb the boundary term at `y0`.
pub fn pressure_integral_check(profile: &dyn ReducedProfile, ys: &[f64]) -> Result<f64, ReducedError> {
    let k = profile.constants();
    let y0 = profile.anchor();
    let up0 = profile.u_phi(y0);
    let w = up0 * up0 / (1.0 - y0 * y0);
    let mut worst = 0.0f64;
    for &y in ys {
        let kernel = |s: f64| {
            let u = profile.u_phi(s);
            u * u * (s - y) * (1.0 - s * y) / (1.0 - s * s).powi(2)
        };
        let (integral, _) = quad(kernel, y0, y, QuadOptions { abs_tol: 1e-12, rel_tol: 1e-12, max_intervals: 4000 })?;
        let ut = profile.u_theta(y);
        let poly = k.poly(y) + 0.5 * w * (y - y0).powi(2);
        let lhs = (1.0 - y * y) * profile.u_theta_prime(y);
        let rhs = -2.0 * y * ut - 0.5 * ut * ut + integral + poly;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}
